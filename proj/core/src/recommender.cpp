#include "mdpmine/recommender.hpp"

#include <algorithm>
#include <limits>

namespace mdpmine {

namespace {

std::vector<Recommendation::Alternative> ranked_alternatives(
    const PolicyArtifacts& a, const State& state) {
  std::vector<Recommendation::Alternative> alts;
  const auto& mdp = *a.mdp;
  for (auto it = mdp.occurrence.lower_bound({state, std::string{}});
       it != mdp.occurrence.end() && it->first.first == state; ++it) {
    if (!mdp.is_agent_action(it->first.second)) continue;
    Recommendation::Alternative alt;
    alt.action = it->first.second;
    alt.support = it->second;
    alt.q_value = a.qtable->value(state, alt.action);
    alt.scaled_q = scaled_q(alt.q_value, a.policy->scaling, alt.support);
    alts.push_back(std::move(alt));
  }
  std::sort(alts.begin(), alts.end(), [](const auto& x, const auto& y) {
    if (x.scaled_q != y.scaled_q) return x.scaled_q > y.scaled_q;
    if (x.support != y.support) return x.support > y.support;
    return x.action < y.action;
  });
  return alts;
}

bool has_agent_actions(const Mdp& mdp, const State& state) {
  for (auto it = mdp.occurrence.lower_bound({state, std::string{}});
       it != mdp.occurrence.end() && it->first.first == state; ++it) {
    if (mdp.is_agent_action(it->first.second)) return true;
  }
  return false;
}

// Nearest decision state sharing the prefix's last activity, measured
// between the prefix-minus-last encoding and the candidate cluster's
// centroid. The start-sentinel cluster stands for the empty prefix, whose
// encoding is the zero vector.
State nearest_fallback(std::span<const std::string> prefix, const PolicyArtifacts& a,
                       const std::string& last_activity) {
  const PrefixVector v =
      encode_ongoing(prefix.first(prefix.size() - 1), *a.stats);
  const std::vector<double> zero(v.values.size(), 0.0);
  const State* best = nullptr;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (const auto& state : a.mdp->states) {
    if (state.last_activity != last_activity || state.is_end()) continue;
    if (!has_agent_actions(*a.mdp, state)) continue;
    const auto& centroid =
        state.cluster == kStartCluster
            ? zero
            : a.kmeans->centroids[static_cast<std::size_t>(state.cluster)];
    double d2 = 0.0;
    for (std::size_t i = 0; i < centroid.size(); ++i) {
      const double d = v.values[i] - centroid[i];
      d2 += d * d;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = &state;
    }
  }
  if (best == nullptr) {
    throw UnknownStateError("no decision state with last activity '" + last_activity +
                            "' to fall back to");
  }
  return *best;
}

}  // namespace

Recommendation recommend(std::span<const std::string> prefix,
                         const PolicyArtifacts& artifacts,
                         const RecommendOptions& opts) {
  const auto& a = artifacts;
  State state = state_of_ongoing(prefix, *a.kmeans, *a.stats);
  bool fallback_used = false;

  const bool known = a.mdp->has_state(state);
  const bool decision = known && has_agent_actions(*a.mdp, state);
  if (!known || !decision) {
    if (opts.fallback_unknown_state && !prefix.empty()) {
      state = nearest_fallback(prefix, a, std::string(prefix.back()));
      fallback_used = true;
    } else if (!known) {
      throw UnknownStateError("state " + state.key() + " was never observed in training");
    } else {
      throw NotADecisionPointError("state " + state.key() +
                                   " has only environment moves; wait for environment");
    }
  }

  Recommendation rec;
  rec.state = state;
  rec.fallback_used = fallback_used;
  rec.alternatives = ranked_alternatives(a, state);
  if (rec.alternatives.empty()) {
    throw NotADecisionPointError("state " + state.key() +
                                 " has only environment moves; wait for environment");
  }
  if (const std::string* action = a.policy->action(state)) {
    rec.action = *action;
  } else {
    rec.action = greedy_action(*a.qtable, a.policy->scaling, *a.mdp, state);
  }
  for (const auto& alt : rec.alternatives) {
    if (alt.action == rec.action) {
      rec.q_value = alt.q_value;
      rec.scaled_q = alt.scaled_q;
      rec.support = alt.support;
      break;
    }
  }
  return rec;
}

}  // namespace mdpmine
