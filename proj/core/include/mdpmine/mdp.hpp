#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mdpmine/encoding.hpp"
#include "mdpmine/kmeans.hpp"

namespace mdpmine {

inline constexpr std::int32_t kStartCluster = -1;  ///< cluster sentinel of the empty prefix
inline constexpr std::int32_t kEndCluster = -2;
inline constexpr const char* kEndStateActivity = "__END__";
inline constexpr const char* kEndAction = "__end__";

/// An MDP state: the last performed activity paired with the cluster of the
/// preceding prefix. The start state (empty prefix) has an empty activity.
struct State {
  std::string last_activity;
  std::int32_t cluster = kStartCluster;

  static State start() { return State{}; }
  static State end() { return State{kEndStateActivity, kEndCluster}; }
  bool is_start() const { return last_activity.empty(); }
  bool is_end() const { return cluster == kEndCluster; }

  auto operator<=>(const State&) const = default;

  /// Stable textual key, used in exports and reports.
  std::string key() const;
};

struct Edge {
  State source;
  std::string action;
  State target;
  std::int64_t count = 0;       ///< replay traversals of this exact triple
  double probability = 0.0;     ///< count / n(source, action)
  double reward = 0.0;          ///< mean of the attributed prefix rewards
  std::int64_t reward_samples = 0;
  bool pseudo = false;          ///< END bookkeeping edge, not a log event
};

/// How complete-trace rewards are attached to edges.
///  - Arrival: every prefix deposits its reward on the edge its last event
///    traversed (proper prefixes deposit 0, final prefixes the trace KPI).
///  - LastAgent: a prefix deposits on the triple (state before the last
///    agent event strictly inside the prefix, that agent activity, prefix
///    state) and only if that triple is an actual edge.
enum class RewardAttribution { Arrival, LastAgent };

struct Mdp {
  std::vector<State> states;  ///< sorted, unique
  std::vector<Edge> edges;    ///< sorted by (source, action, target)
  std::map<std::pair<State, std::string>, std::int64_t> occurrence;  ///< n(s,a)
  std::set<State> terminals;
  std::set<std::string> agent_actions;
  double gamma = 0.99;
  std::uint64_t alphabet_hash = 0;
  RewardAttribution attribution = RewardAttribution::Arrival;

  bool has_state(const State& s) const;
  std::int64_t occurrences(const State& s, const std::string& action) const;
  bool is_agent_action(const std::string& action) const {
    return agent_actions.count(action) > 0;
  }
};

/// Per-state action groups, precomputed for training and simulation.
struct MdpIndex {
  struct ActionGroup {
    std::string action;
    bool agent = false;
    std::int64_t n = 0;                 ///< n(s, action)
    std::vector<const Edge*> targets;   ///< edges sorted by target
  };
  struct StateEntry {
    std::vector<ActionGroup> groups;  ///< sorted by action label
    std::int64_t n_agent = 0;
    std::int64_t n_env = 0;  ///< includes END pseudo moves
  };
  std::map<State, StateEntry> by_state;

  const StateEntry* find(const State& s) const;
};

MdpIndex make_index(const Mdp& mdp);

struct MdpBuildOptions {
  double gamma = 0.99;
  RewardAttribution attribution = RewardAttribution::Arrival;
};

/// Builds the MDP by replaying every trace of the enriched log through the
/// fitted k-means model.
Mdp build_mdp(const EventLog& log, const KMeansModel& kmeans,
              const NormalizationStats& stats, const MdpBuildOptions& opts = {});

/// State of the k-prefix of a trace (k == 0 gives the start state).
State state_of(const Trace& trace, std::size_t k, const KMeansModel& kmeans,
               const NormalizationStats& stats);

/// State of an ongoing execution given its activity labels only.
State state_of_ongoing(std::span<const std::string> activities,
                       const KMeansModel& kmeans, const NormalizationStats& stats);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks the structural invariants: probability normalization per (s,a),
/// count/occurrence consistency, edge endpoints present, terminals closed,
/// non-terminal states having outgoing edges.
ValidationReport validate(const Mdp& mdp);

/// GraphViz rendering for inspection.
std::string to_dot(const Mdp& mdp);

/// FNV-1a over the sorted alphabet; stored in models and artifacts to guard
/// against mixing incompatible encodings.
std::uint64_t alphabet_fingerprint(std::span<const std::string> alphabet);

}  // namespace mdpmine
