#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mdpmine/eventlog.hpp"
#include "mdpmine/recommender.hpp"

namespace mdpmine {

inline constexpr const char* kEndNode = "__end__";

/// One process activity: who performs it, how long it takes on average, and
/// where control goes afterwards (an activity, a gateway, or __end__).
struct ActivitySpec {
  std::string name;
  Owner owner = Owner::Environment;
  double duration_mean_h = 0.1;
  std::string next;
};

struct GatewayOutcome {
  /// Target node; empty on multiple gateways means "the environment does
  /// not act" and control falls through to the gateway's fallthrough node.
  std::string next;
  /// Chance/single gateways: fixed probability (must sum to 1 per gateway).
  double probability = 0.0;
  /// Multiple gateways: softmax weight exp(bias + amount_coef * amount_norm
  /// + sum count_coefs[a] * #a(trace so far)).
  double bias = 0.0;
  double amount_coef = 0.0;
  std::map<std::string, double> count_coefs;
  /// Weight forced to 0 until the trace contains at least these many
  /// occurrences of each named activity.
  std::map<std::string, std::int64_t> min_counts;
};

struct GatewaySpec {
  enum class Kind {
    Chance,   ///< neither actor decides (e.g. an assessment result)
    Single,   ///< agent decision point
    Multiple  ///< environment has priority; may act or fall through
  };
  std::string name;
  Kind kind = Kind::Chance;
  std::vector<GatewayOutcome> outcomes;
  std::string fallthrough;  ///< multiple only
  /// Single only: after this many visits in one case the walk takes
  /// forced_next (generation-side safety valve; 0 disables).
  std::int64_t force_after_visits = 0;
  std::string forced_next;
};

/// Configurable stochastic model of the loan process, loaded from a JSON
/// preset. Not a BPMN document; an equivalent internal format.
struct ProcessModel {
  std::string name;
  std::map<std::string, ActivitySpec> activities;
  std::map<std::string, GatewaySpec> gateways;
  std::string start;  ///< first activity of every case

  double amount_min = 5000.0;
  double amount_max = 30000.0;
  double interarrival_mean_h = 1.0;
  double gap_mean_h = 0.05;  ///< idle gap before each activity

  /// Probability of the pre-accept outcome; applied to the first outcome of
  /// `preaccept_gateway` (the second gets the complement).
  double preaccept_probability = 0.6;
  std::string preaccept_gateway = "g_preaccept";

  KpiSpec kpi;

  std::set<std::string> agent_activities() const;
  /// Throws InvalidModelError on broken references, bad probability sums or
  /// an unreachable end.
  void validate() const;

  static ProcessModel from_json_file(const std::filesystem::path& path);
  std::string to_json() const;
};

enum class SimEnd { Completed, Exception, Stalled };

struct SimTrace {
  Trace trace;
  double reward = 0.0;  ///< accumulated KPI
  SimEnd end = SimEnd::Completed;
};

/// Samples complete traces by walking the model's control flow. Trace
/// rewards and the payload attributes needed to recompute the KPI (amount,
/// per-event durations) are attached. Deterministic under the seed; cases
/// use independent per-case generators.
EventLog generate_log(const ProcessModel& model, std::size_t n_traces,
                      std::uint64_t seed);

struct SimulateOptions {
  std::size_t stall_limit = 50;   ///< consecutive agent actions without an environment response
  std::size_t max_events = 200;   ///< hard safety cap per simulated trace
  bool fallback_unknown_state = true;
};

struct PolicySimResult {
  std::string policy_name;
  std::vector<double> rewards;  ///< one entry per simulated trace
  std::size_t exceptions = 0;
  std::size_t stalls = 0;

  double mean() const;
  double stddev() const;
  double stderror() const;
};

/// Runs the modified model: the environment keeps the model's behaviour and
/// priority, the agent executes the policy's recommendation. A recommended
/// activity the model does not allow ends the trace with an exception and
/// the reward accumulated so far; a trace that stops getting environment
/// responses is stalled and ends the same way.
PolicySimResult simulate_with_policy(const ProcessModel& model,
                                     const PolicyArtifacts& artifacts,
                                     std::size_t n_traces, std::uint64_t seed,
                                     const SimulateOptions& opts = {});

/// Test hook: like simulate_with_policy but with an arbitrary agent chooser.
using AgentChooser =
    std::function<std::string(const Trace& prefix, const std::vector<std::string>& allowed)>;
PolicySimResult simulate_with_chooser(const ProcessModel& model, AgentChooser chooser,
                                      std::size_t n_traces, std::uint64_t seed,
                                      const SimulateOptions& opts = {});

/// Replays a trace against the model's control flow; returns violation
/// descriptions (empty = conformant).
std::vector<std::string> replay_violations(const ProcessModel& model, const Trace& trace);

/// Fraction of traces containing the model's accept activity.
double acceptance_rate(const EventLog& log, const std::string& accept_activity);

}  // namespace mdpmine
