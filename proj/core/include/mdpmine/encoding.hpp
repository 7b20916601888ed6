#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdpmine/eventlog.hpp"

namespace mdpmine {

/// Corpus constants fitted on the training log and frozen thereafter.
struct NormalizationStats {
  std::int64_t f_max = 1;
  std::int64_t p_max = 1;
  double r_min = 0.0;
  double r_max = 0.0;
  /// r_max == r_min in the training log; normalized reward of complete
  /// traces is then defined as 1.
  bool constant_reward = false;
  std::vector<std::string> alphabet_order;  ///< lexicographic, fixed at fit time

  std::size_t dimension() const { return 2 * alphabet_order.size() + 1; }
};

/// Fixed-length encoding of a prefix: per-activity normalized frequencies,
/// per-activity normalized last positions, and the normalized reward.
struct PrefixVector {
  std::vector<double> values;
};

/// Computes f_max/p_max over all prefixes of the log and the reward range
/// over complete traces. Requires an enriched, nonempty log.
NormalizationStats fit_stats(const EventLog& log);

/// 0 for proper prefixes; (r - r_min)/(r_max - r_min) for the complete trace.
double normalized_reward(const Trace& trace, std::size_t k,
                         const NormalizationStats& stats);

/// Encodes the k-prefix of a trace. The reward component is nonzero only
/// when k == len(trace) and the trace carries a reward.
PrefixVector encode(const Trace& trace, std::size_t k,
                    const NormalizationStats& stats);

/// Encodes an ongoing execution given only its activity labels; the reward
/// component is 0 by definition.
PrefixVector encode_ongoing(std::span<const std::string> activities,
                            const NormalizationStats& stats);

}  // namespace mdpmine
