#include "mdpmine/encoding.hpp"

#include <algorithm>
#include <unordered_map>

namespace mdpmine {

NormalizationStats fit_stats(const EventLog& log) {
  if (log.traces.empty()) {
    throw EmptyLogError("fit_stats: empty log");
  }
  NormalizationStats stats;
  stats.alphabet_order = log.alphabet;  // already sorted
  stats.f_max = 1;
  stats.p_max = 1;
  bool first = true;
  for (const auto& trace : log.traces) {
    if (!trace.reward.has_value()) {
      throw Error("fit_stats: trace '" + trace.case_id + "' has no reward; enrich first");
    }
    // Frequency is nondecreasing in the prefix length, so the maximum over
    // all prefixes is attained on the full trace.
    std::unordered_map<std::string, std::int64_t> counts;
    for (const auto& event : trace.events) {
      stats.f_max = std::max(stats.f_max, ++counts[event.activity]);
    }
    stats.p_max = std::max(stats.p_max, static_cast<std::int64_t>(trace.events.size()));
    const double r = *trace.reward;
    if (first) {
      stats.r_min = stats.r_max = r;
      first = false;
    } else {
      stats.r_min = std::min(stats.r_min, r);
      stats.r_max = std::max(stats.r_max, r);
    }
  }
  stats.constant_reward = stats.r_max == stats.r_min;
  return stats;
}

double normalized_reward(const Trace& trace, std::size_t k,
                         const NormalizationStats& stats) {
  if (k == 0 || k > trace.events.size()) {
    throw OutOfRangePrefixError("normalized_reward: k=" + std::to_string(k) +
                                " out of range for trace of length " +
                                std::to_string(trace.events.size()));
  }
  if (k < trace.events.size() || !trace.reward.has_value()) {
    return 0.0;
  }
  if (stats.constant_reward) {
    return 1.0;
  }
  return (*trace.reward - stats.r_min) / (stats.r_max - stats.r_min);
}

namespace {

PrefixVector encode_labels(std::span<const std::string> labels, double reward_component,
                           const NormalizationStats& stats) {
  const auto& order = stats.alphabet_order;
  for (const auto& label : labels) {
    if (!std::binary_search(order.begin(), order.end(), label)) {
      throw UnknownActivityError("encode: activity '" + label +
                                 "' not in the training alphabet");
    }
  }
  PrefixVector v;
  v.values.resize(2 * order.size() + 1, 0.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    v.values[i] = static_cast<double>(prefix_frequency(labels, order[i])) /
                  static_cast<double>(stats.f_max);
    v.values[order.size() + i] =
        static_cast<double>(prefix_last_position(labels, order[i])) /
        static_cast<double>(stats.p_max);
  }
  v.values.back() = reward_component;
  return v;
}

}  // namespace

PrefixVector encode(const Trace& trace, std::size_t k,
                    const NormalizationStats& stats) {
  if (k == 0 || k > trace.events.size()) {
    throw OutOfRangePrefixError("encode: k=" + std::to_string(k) +
                                " out of range for trace of length " +
                                std::to_string(trace.events.size()));
  }
  const auto labels = trace.prefix_labels(k);
  return encode_labels(labels, normalized_reward(trace, k, stats), stats);
}

PrefixVector encode_ongoing(std::span<const std::string> activities,
                            const NormalizationStats& stats) {
  return encode_labels(activities, 0.0, stats);
}

}  // namespace mdpmine
