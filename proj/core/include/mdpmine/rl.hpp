#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "mdpmine/mdp.hpp"

namespace mdpmine {

/// Occurrence-based scaling family h(n), monotonically nondecreasing with
/// values in [0,1]. The scaled value q~ = q * h(n(s,a)) discourages actions
/// that look good but were rarely observed.
struct ScalingFn {
  enum class Kind { H0, Linear, Step, Smooth };
  Kind kind = Kind::H0;
  std::int64_t n_t = 50;   ///< Step threshold
  double lambda = 50.0;    ///< Smooth parameter
  std::int64_t n_min = 0;  ///< Linear, fitted over the MDP's agent pairs
  std::int64_t n_max = 0;

  static ScalingFn h0() { return {}; }
  static ScalingFn step(std::int64_t n_t);
  static ScalingFn smooth(double lambda);
  /// Linear scaling with n_min/n_max taken over all agent state-action
  /// occurrence counts of the MDP, frozen at this call.
  static ScalingFn linear_fitted(const Mdp& mdp);

  std::string name() const;
};

double h_value(const ScalingFn& scaling, std::int64_t n);
double scaled_q(double q, const ScalingFn& scaling, std::int64_t n);

struct QTable {
  std::map<std::pair<State, std::string>, double> values;
  std::map<std::pair<State, std::string>, std::int64_t> visit_counts;
  double gamma = 0.99;

  double value(const State& s, const std::string& action) const;
  std::int64_t visits(const State& s, const std::string& action) const;
};

struct Policy {
  std::map<State, std::string> action_of;
  ScalingFn scaling;

  struct Provenance {
    std::string algorithm;  ///< "mc_policy_iteration" or "q_learning"
    std::size_t episodes = 0;
    std::uint64_t seed = 0;
    double gamma = 0.99;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
  } provenance;

  const std::string* action(const State& s) const {
    auto it = action_of.find(s);
    return it == action_of.end() ? nullptr : &it->second;
  }
};

struct TrainConfig {
  std::size_t episodes = 100'000;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  /// Per-episode decay factor; 0 derives one so epsilon_end is reached at
  /// 80% of the episodes.
  double epsilon_decay = 0.0;
  double alpha = 0.1;  ///< Q-learning step size
  std::uint64_t seed = 0;
  std::size_t max_episode_len = 200;
};

/// Monte Carlo policy iteration with every-visit incremental means.
/// Episodes start at the start state; environment moves are sampled with
/// their empirical probabilities and take priority at mixed states, agent
/// moves are epsilon-greedy over the scaled q-values.
std::pair<Policy, QTable> mc_policy_iteration(const Mdp& mdp, const ScalingFn& scaling,
                                              const TrainConfig& cfg);

/// Tabular Q-learning comparator on the same episodic simulation; rewards
/// collected between two agent decisions are discounted into the target.
std::pair<Policy, QTable> q_learning(const Mdp& mdp, const TrainConfig& cfg);

/// argmax over the state's agent actions of q~, ties broken by higher
/// occurrence count, then lexicographic action label.
std::string greedy_action(const QTable& qtable, const ScalingFn& scaling,
                          const Mdp& mdp, const State& state);

}  // namespace mdpmine
