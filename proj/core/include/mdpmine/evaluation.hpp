#pragma once

#include <map>
#include <string>
#include <vector>

#include "mdpmine/recommender.hpp"
#include "mdpmine/stats.hpp"

namespace mdpmine {

/// 1-based positions of agent-owned events in the trace.
std::vector<std::size_t> agent_decision_positions(const Trace& trace);

/// States s_0..s_len of a trace under the trained artifacts.
std::vector<State> replay_states(const Trace& trace, const PolicyArtifacts& artifacts);

/// The last agent position where the trace deviates from the policy (0 if it
/// never deviates). A decision at an unknown state or without a policy
/// action counts as a deviation.
std::size_t last_policy_violation(const Trace& trace, const PolicyArtifacts& artifacts);

/// Compliant iff every agent decision strictly after position k follows the
/// policy, i.e. last_policy_violation(trace) <= k.
bool is_compliant_from(const Trace& trace, std::size_t k,
                       const PolicyArtifacts& artifacts);

struct OptimalTraceSection {
  std::size_t compliant_count = 0;
  double compliant_mean = 0.0;  ///< meaningful only when compliant_count > 0
  bool no_data = false;
  double log_mean = 0.0;
  std::size_t log_size = 0;
  std::vector<std::string> compliant_case_ids;
};

/// Average KPI of the test traces that follow the policy at every agent
/// decision point, next to the whole-log average.
OptimalTraceSection optimal_trace_analysis(const EventLog& test_log,
                                           const PolicyArtifacts& artifacts);

struct PrefixGainSection {
  struct PerLength {
    std::size_t k = 0;
    std::size_t prefix_count = 0;     ///< test prefixes of this length
    std::size_t estimated_count = 0;  ///< prefixes with a compliant continuation pool
    double mean_estimate = 0.0;
    double mean_ground_truth = 0.0;
    double mean_gain = 0.0;  ///< mean(estimate - ground truth) over estimated prefixes
    bool no_estimate = false;
  };
  std::vector<PerLength> per_length;  ///< k = 1..max trace length
};

/// Per-prefix gain estimation: the KPI expected when following the policy
/// from each ongoing point, estimated from test traces sharing the prefix
/// that are policy-compliant from there on, against the traces' own outcome.
PrefixGainSection prefix_gain_analysis(const EventLog& test_log,
                                       const PolicyArtifacts& artifacts);

struct PairwiseComparison {
  std::string policy_a;
  std::string policy_b;
  double mean_diff = 0.0;
  double p_value = 1.0;
  bool significant = false;  ///< p <= 0.05
  bool degenerate = false;
};

/// Welch's t-test over every ordered pair of reward-sample sets.
std::vector<PairwiseComparison> compare_policies(
    const std::map<std::string, std::vector<double>>& samples_by_policy);

}  // namespace mdpmine
