#pragma once

#include <span>
#include <string>
#include <vector>

#include "mdpmine/rl.hpp"

namespace mdpmine {

struct Recommendation {
  std::string action;
  double q_value = 0.0;
  double scaled_q = 0.0;
  std::int64_t support = 0;  ///< n(state, action)
  State state;
  bool fallback_used = false;

  struct Alternative {
    std::string action;
    double q_value = 0.0;
    double scaled_q = 0.0;
    std::int64_t support = 0;
  };
  std::vector<Alternative> alternatives;  ///< ranked by scaled q, best first
};

/// Everything the runtime phase needs, bundled.
struct PolicyArtifacts {
  const Mdp* mdp = nullptr;
  const KMeansModel* kmeans = nullptr;
  const NormalizationStats* stats = nullptr;
  const Policy* policy = nullptr;
  const QTable* qtable = nullptr;
};

struct RecommendOptions {
  /// When the mapped state was never seen in the MDP (or offers no agent
  /// action), fall back to the nearest decision state with the same last
  /// activity instead of failing.
  bool fallback_unknown_state = false;
};

/// Maps an ongoing prefix to its state and returns the policy's next
/// activity with diagnostics. Throws UnknownStateError, UnknownActivityError
/// or NotADecisionPointError as applicable.
Recommendation recommend(std::span<const std::string> prefix,
                         const PolicyArtifacts& artifacts,
                         const RecommendOptions& opts = {});

}  // namespace mdpmine
