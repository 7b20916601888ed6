#include "mdpmine/evaluation.hpp"

#include <algorithm>
#include <unordered_map>

namespace mdpmine {

std::vector<std::size_t> agent_decision_positions(const Trace& trace) {
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    if (trace.events[i].owner == Owner::Agent) positions.push_back(i + 1);
  }
  return positions;
}

std::vector<State> replay_states(const Trace& trace, const PolicyArtifacts& artifacts) {
  std::vector<State> states;
  states.reserve(trace.events.size() + 1);
  for (std::size_t k = 0; k <= trace.events.size(); ++k) {
    states.push_back(state_of(trace, k, *artifacts.kmeans, *artifacts.stats));
  }
  return states;
}

std::size_t last_policy_violation(const Trace& trace, const PolicyArtifacts& artifacts) {
  const auto states = replay_states(trace, artifacts);
  std::size_t last = 0;
  for (std::size_t k = 1; k <= trace.events.size(); ++k) {
    if (trace.events[k - 1].owner != Owner::Agent) continue;
    const State& before = states[k - 1];
    const std::string* action =
        artifacts.mdp->has_state(before) ? artifacts.policy->action(before) : nullptr;
    if (action == nullptr || *action != trace.events[k - 1].activity) {
      last = k;
    }
  }
  return last;
}

bool is_compliant_from(const Trace& trace, std::size_t k,
                       const PolicyArtifacts& artifacts) {
  return last_policy_violation(trace, artifacts) <= k;
}

OptimalTraceSection optimal_trace_analysis(const EventLog& test_log,
                                           const PolicyArtifacts& artifacts) {
  OptimalTraceSection section;
  section.log_size = test_log.traces.size();
  double log_sum = 0.0;
  double compliant_sum = 0.0;
  for (const auto& trace : test_log.traces) {
    if (!trace.reward.has_value()) {
      throw Error("optimal_trace_analysis: trace '" + trace.case_id +
                  "' has no reward; enrich the test log first");
    }
    log_sum += *trace.reward;
    if (last_policy_violation(trace, artifacts) == 0) {
      ++section.compliant_count;
      compliant_sum += *trace.reward;
      section.compliant_case_ids.push_back(trace.case_id);
    }
  }
  section.log_mean =
      section.log_size == 0 ? 0.0 : log_sum / static_cast<double>(section.log_size);
  if (section.compliant_count == 0) {
    section.no_data = true;
  } else {
    section.compliant_mean = compliant_sum / static_cast<double>(section.compliant_count);
  }
  return section;
}

PrefixGainSection prefix_gain_analysis(const EventLog& test_log,
                                       const PolicyArtifacts& artifacts) {
  const std::size_t n = test_log.traces.size();
  std::vector<std::size_t> last_violation(n);
  std::vector<double> reward(n);
  std::size_t max_len = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Trace& trace = test_log.traces[i];
    if (!trace.reward.has_value()) {
      throw Error("prefix_gain_analysis: trace '" + trace.case_id +
                  "' has no reward; enrich the test log first");
    }
    last_violation[i] = last_policy_violation(trace, artifacts);
    reward[i] = *trace.reward;
    max_len = std::max(max_len, trace.events.size());
  }

  PrefixGainSection section;
  for (std::size_t k = 1; k <= max_len; ++k) {
    // Group the k-prefixes by activity sequence.
    std::unordered_map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
      if (test_log.traces[i].events.size() < k) continue;
      std::string key;
      for (std::size_t j = 0; j < k; ++j) {
        key += test_log.traces[i].events[j].activity;
        key += '\x1f';
      }
      groups[key].push_back(i);
    }
    PrefixGainSection::PerLength row;
    row.k = k;
    double est_sum = 0.0, truth_sum = 0.0, gain_sum = 0.0;
    for (const auto& [key, members] : groups) {
      // Pool shared by the whole group: members compliant from position k on.
      double pool_sum = 0.0;
      std::size_t pool_n = 0;
      for (std::size_t i : members) {
        if (last_violation[i] <= k) {
          pool_sum += reward[i];
          ++pool_n;
        }
      }
      for (std::size_t i : members) {
        ++row.prefix_count;
        if (pool_n == 0) continue;
        const double estimate = pool_sum / static_cast<double>(pool_n);
        est_sum += estimate;
        truth_sum += reward[i];
        gain_sum += estimate - reward[i];
        ++row.estimated_count;
      }
    }
    if (row.estimated_count > 0) {
      row.mean_estimate = est_sum / static_cast<double>(row.estimated_count);
      row.mean_ground_truth = truth_sum / static_cast<double>(row.estimated_count);
      row.mean_gain = gain_sum / static_cast<double>(row.estimated_count);
    } else {
      row.no_estimate = true;
    }
    section.per_length.push_back(std::move(row));
  }
  return section;
}

std::vector<PairwiseComparison> compare_policies(
    const std::map<std::string, std::vector<double>>& samples_by_policy) {
  std::vector<PairwiseComparison> table;
  for (const auto& [name_a, samples_a] : samples_by_policy) {
    for (const auto& [name_b, samples_b] : samples_by_policy) {
      if (name_a == name_b) continue;
      const WelchResult w = welch_t_test(samples_a, samples_b);
      PairwiseComparison cmp;
      cmp.policy_a = name_a;
      cmp.policy_b = name_b;
      cmp.mean_diff = sample_mean(samples_a) - sample_mean(samples_b);
      cmp.p_value = w.p_value;
      cmp.significant = w.p_value <= 0.05;
      cmp.degenerate = w.degenerate;
      table.push_back(std::move(cmp));
    }
  }
  return table;
}

}  // namespace mdpmine
