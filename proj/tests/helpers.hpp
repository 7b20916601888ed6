#pragma once

// Shared test utilities: small log/MDP builders and the independent oracles
// the suites check the implementation against.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mdpmine/encoding.hpp"
#include "mdpmine/eventlog.hpp"
#include "mdpmine/kmeans.hpp"
#include "mdpmine/mdp.hpp"
#include "mdpmine/recommender.hpp"
#include "mdpmine/rl.hpp"
#include "mdpmine/simgen.hpp"

namespace testutil {

using namespace mdpmine;

inline Trace make_trace(const std::string& case_id,
                        const std::vector<std::string>& labels,
                        std::optional<double> reward = std::nullopt) {
  Trace trace;
  trace.case_id = case_id;
  std::int64_t t = 1'700'000'000'000;
  for (const auto& label : labels) {
    Event event;
    event.activity = label;
    event.timestamp_ms = t;
    t += 60'000;
    trace.events.push_back(std::move(event));
  }
  trace.reward = reward;
  return trace;
}

inline EventLog make_log(const std::vector<std::pair<std::vector<std::string>, double>>& rows,
                         std::set<std::string> agent_activities) {
  std::vector<Trace> traces;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    traces.push_back(make_trace("case_" + std::to_string(i + 1), rows[i].first,
                                rows[i].second));
  }
  return EventLog::from_traces(std::move(traces), std::move(agent_activities));
}

// ---------------------------------------------------------------------------
// Brute-force MDP oracle: enumerates every prefix of every trace explicitly
// and derives states, counts, probabilities and rewards with naive maps.
// Shares only the encoding artifacts with the implementation under test.
// ---------------------------------------------------------------------------

struct FlatEdge {
  std::string source;
  std::string action;
  std::string target;
  std::int64_t count;
  double probability;
  double reward;
  std::int64_t reward_samples;
  bool pseudo;

  auto tie() const { return std::tie(source, action, target); }
  bool operator<(const FlatEdge& other) const { return tie() < other.tie(); }
};

struct FlatMdp {
  std::vector<FlatEdge> edges;
  std::set<std::string> terminals;
  std::map<std::pair<std::string, std::string>, std::int64_t> occurrence;
};

inline std::size_t oracle_nearest(const std::vector<std::vector<double>>& centroids,
                                  const std::vector<double>& v) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = centroids[j][i] - v[i];
      d2 += d * d;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = j;
    }
  }
  return best;
}

inline FlatMdp oracle_mdp(const EventLog& log, const KMeansModel& kmeans,
                          const NormalizationStats& stats,
                          RewardAttribution attribution = RewardAttribution::Arrival) {
  const std::string start_key = "<START>";
  const std::string end_key = "<END>";

  auto state_key = [&](const Trace& trace, std::size_t j) -> std::string {
    if (j == 0) return start_key;
    if (j == 1) return trace.events[0].activity + "#S";
    const PrefixVector v = encode(trace, j - 1, stats);
    return trace.events[j - 1].activity + "#" +
           std::to_string(oracle_nearest(kmeans.centroids, v.values));
  };

  struct Acc {
    std::int64_t count = 0;
    double reward_sum = 0.0;
    std::int64_t reward_n = 0;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Acc> acc;
  std::map<std::string, std::int64_t> ends;
  std::set<std::string> sources;

  for (const auto& trace : log.traces) {
    std::vector<std::string> keys;
    for (std::size_t j = 0; j <= trace.events.size(); ++j) {
      keys.push_back(state_key(trace, j));
    }
    for (std::size_t k = 1; k <= trace.events.size(); ++k) {
      const double r = (k == trace.events.size() && trace.reward) ? *trace.reward : 0.0;
      auto& entry = acc[{keys[k - 1], trace.events[k - 1].activity, keys[k]}];
      ++entry.count;
      if (attribution == RewardAttribution::Arrival) {
        entry.reward_sum += r;
        ++entry.reward_n;
      }
      sources.insert(keys[k - 1]);
    }
    ++ends[keys.back()];
  }

  if (attribution == RewardAttribution::LastAgent) {
    for (const auto& trace : log.traces) {
      std::vector<std::string> keys;
      for (std::size_t j = 0; j <= trace.events.size(); ++j) {
        keys.push_back(state_key(trace, j));
      }
      std::ptrdiff_t last_agent = -1;
      for (std::size_t k = 1; k <= trace.events.size(); ++k) {
        if (last_agent >= 1) {
          const double r =
              (k == trace.events.size() && trace.reward) ? *trace.reward : 0.0;
          auto it = acc.find({keys[last_agent - 1],
                              trace.events[last_agent - 1].activity, keys[k]});
          if (it != acc.end()) {
            it->second.reward_sum += r;
            ++it->second.reward_n;
          }
        }
        if (trace.events[k - 1].owner == Owner::Agent) {
          last_agent = static_cast<std::ptrdiff_t>(k);
        }
      }
    }
  }

  std::map<std::pair<std::string, std::string>, std::int64_t> totals;
  for (const auto& [triple, entry] : acc) {
    totals[{std::get<0>(triple), std::get<1>(triple)}] += entry.count;
  }

  FlatMdp flat;
  flat.occurrence = totals;
  for (const auto& [triple, entry] : acc) {
    FlatEdge edge;
    edge.source = std::get<0>(triple);
    edge.action = std::get<1>(triple);
    edge.target = std::get<2>(triple);
    edge.count = entry.count;
    edge.probability = static_cast<double>(entry.count) /
                       static_cast<double>(totals[{edge.source, edge.action}]);
    edge.reward = entry.reward_n == 0
                      ? 0.0
                      : entry.reward_sum / static_cast<double>(entry.reward_n);
    edge.reward_samples = entry.reward_n;
    edge.pseudo = false;
    flat.edges.push_back(std::move(edge));
  }
  bool any_mixed_end = false;
  for (const auto& [key, n] : ends) {
    if (sources.count(key) == 0) {
      flat.terminals.insert(key);
    } else {
      any_mixed_end = true;
      flat.edges.push_back(FlatEdge{key, kEndAction, end_key, n, 1.0, 0.0, 0, true});
      flat.occurrence[{key, kEndAction}] = n;
    }
  }
  if (any_mixed_end) flat.terminals.insert(end_key);
  std::sort(flat.edges.begin(), flat.edges.end());
  return flat;
}

inline FlatMdp flatten(const Mdp& mdp) {
  FlatMdp flat;
  for (const auto& edge : mdp.edges) {
    flat.edges.push_back(FlatEdge{edge.source.key(), edge.action, edge.target.key(),
                                  edge.count, edge.probability, edge.reward,
                                  edge.reward_samples, edge.pseudo});
  }
  for (const auto& s : mdp.terminals) flat.terminals.insert(s.key());
  for (const auto& [key, n] : mdp.occurrence) {
    flat.occurrence[{key.first.key(), key.second}] = n;
  }
  std::sort(flat.edges.begin(), flat.edges.end());
  return flat;
}

// ---------------------------------------------------------------------------
// Random mini-logs for the oracle comparison.
// ---------------------------------------------------------------------------

inline EventLog random_mini_log(std::mt19937_64& rng) {
  static const std::vector<std::string> labels = {"A", "B", "C", "D"};
  std::uniform_int_distribution<std::size_t> n_labels(2, labels.size());
  std::uniform_int_distribution<std::size_t> n_traces(1, 5);
  std::uniform_int_distribution<std::size_t> trace_len(1, 6);
  std::uniform_real_distribution<double> reward(-50.0, 50.0);

  const std::size_t la = n_labels(rng);
  std::uniform_int_distribution<std::size_t> pick_label(0, la - 1);
  std::set<std::string> agents;
  for (std::size_t i = 0; i < la; ++i) {
    if (std::bernoulli_distribution(0.5)(rng)) agents.insert(labels[i]);
  }
  std::vector<std::pair<std::vector<std::string>, double>> rows;
  const std::size_t nt = n_traces(rng);
  for (std::size_t t = 0; t < nt; ++t) {
    std::vector<std::string> seq;
    const std::size_t len = trace_len(rng);
    for (std::size_t i = 0; i < len; ++i) seq.push_back(labels[pick_label(rng)]);
    rows.emplace_back(std::move(seq), reward(rng));
  }
  return make_log(rows, agents);
}

inline std::vector<PrefixVector> all_prefix_vectors(const EventLog& log,
                                                    const NormalizationStats& stats) {
  std::vector<PrefixVector> vectors;
  for (const auto& trace : log.traces) {
    for (std::size_t k = 1; k <= trace.events.size(); ++k) {
      vectors.push_back(encode(trace, k, stats));
    }
  }
  return vectors;
}

// ---------------------------------------------------------------------------
// Exact value iteration oracle over an Mdp, with the same environment
// priority mixture the training simulation uses.
// ---------------------------------------------------------------------------

struct ViResult {
  std::map<State, double> value;
  std::map<State, std::vector<std::string>> optimal_actions;  ///< decision states
};

inline ViResult value_iteration(const Mdp& mdp, double tol = 1e-12,
                                std::size_t max_iter = 100'000) {
  const MdpIndex index = make_index(mdp);
  std::map<State, double> value;
  for (const auto& s : mdp.states) value[s] = 0.0;

  auto action_q = [&](const MdpIndex::ActionGroup& group) {
    double q = 0.0;
    for (const Edge* edge : group.targets) {
      q += edge->probability * (edge->reward + mdp.gamma * value[edge->target]);
    }
    return q;
  };

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double delta = 0.0;
    for (const auto& s : mdp.states) {
      if (mdp.terminals.count(s) > 0) continue;
      const auto* entry = index.find(s);
      if (entry == nullptr || entry->groups.empty()) continue;
      double env_val = 0.0;
      double agent_val = -std::numeric_limits<double>::infinity();
      for (const auto& group : entry->groups) {
        const double q = action_q(group);
        if (group.agent) {
          agent_val = std::max(agent_val, q);
        } else {
          env_val += q * static_cast<double>(group.n) / static_cast<double>(entry->n_env);
        }
      }
      double v;
      const double n_total = static_cast<double>(entry->n_agent + entry->n_env);
      if (entry->n_agent > 0 && entry->n_env > 0) {
        v = (static_cast<double>(entry->n_env) * env_val +
             static_cast<double>(entry->n_agent) * agent_val) /
            n_total;
      } else if (entry->n_agent > 0) {
        v = agent_val;
      } else {
        v = env_val;
      }
      delta = std::max(delta, std::abs(v - value[s]));
      value[s] = v;
    }
    if (delta < tol) break;
  }

  ViResult result;
  result.value = value;
  for (const auto& s : mdp.states) {
    const auto* entry = index.find(s);
    if (entry == nullptr || entry->n_agent == 0 || mdp.terminals.count(s) > 0) continue;
    double best = -std::numeric_limits<double>::infinity();
    std::map<std::string, double> qs;
    for (const auto& group : entry->groups) {
      if (!group.agent) continue;
      qs[group.action] = action_q(group);
      best = std::max(best, qs[group.action]);
    }
    std::vector<std::string> optimal;
    for (const auto& [action, q] : qs) {
      if (q >= best - 1e-9 * (1.0 + std::abs(best))) optimal.push_back(action);
    }
    result.optimal_actions[s] = std::move(optimal);
  }
  return result;
}

// Smallest gap between the best and the runner-up agent action over all
// decision states (infinity when no state has two actions).
inline double min_decision_gap(const Mdp& mdp, const ViResult& vi) {
  const MdpIndex index = make_index(mdp);
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& [s, _] : vi.optimal_actions) {
    const auto* entry = index.find(s);
    std::vector<double> qs;
    for (const auto& group : entry->groups) {
      if (!group.agent) continue;
      double q = 0.0;
      for (const Edge* edge : group.targets) {
        q += edge->probability * (edge->reward + mdp.gamma * vi.value.at(edge->target));
      }
      qs.push_back(q);
    }
    if (qs.size() < 2) continue;
    std::sort(qs.begin(), qs.end(), std::greater<>());
    min_gap = std::min(min_gap, qs[0] - qs[1]);
  }
  return min_gap;
}

// Expected visits per state (truncated) when the agent plays `policy` and
// the environment keeps its empirical mixture.
inline std::map<State, double> expected_visits(const Mdp& mdp,
                                               const std::map<State, std::string>& policy,
                                               std::size_t horizon = 200) {
  const MdpIndex index = make_index(mdp);
  std::map<State, double> dist;
  dist[State::start()] = 1.0;
  std::map<State, double> visits = dist;
  for (std::size_t t = 0; t < horizon; ++t) {
    std::map<State, double> next;
    for (const auto& [s, mass] : dist) {
      if (mass <= 0.0 || mdp.terminals.count(s) > 0) continue;
      const auto* entry = index.find(s);
      if (entry == nullptr || entry->groups.empty()) continue;
      const double n_total = static_cast<double>(entry->n_agent + entry->n_env);
      for (const auto& group : entry->groups) {
        double branch;
        if (group.agent) {
          auto it = policy.find(s);
          if (it == policy.end() || it->second != group.action) continue;
          branch = static_cast<double>(entry->n_agent) / n_total;
        } else {
          branch = static_cast<double>(group.n) / n_total;
        }
        for (const Edge* edge : group.targets) {
          next[edge->target] += mass * branch * edge->probability;
        }
      }
    }
    for (const auto& [s, mass] : next) visits[s] += mass;
    dist = std::move(next);
    double remaining = 0.0;
    for (const auto& [_, mass] : dist) remaining += mass;
    if (remaining < 1e-12) break;
  }
  return visits;
}

// ---------------------------------------------------------------------------
// Random small MDPs (DAG-shaped, guaranteed to terminate) for the RL
// optimality checks.
// ---------------------------------------------------------------------------

inline Mdp random_small_mdp(std::mt19937_64& rng, double gamma = 0.99) {
  static const std::vector<std::string> agent_labels = {"a", "b", "c", "d"};
  static const std::vector<std::string> env_labels = {"u", "v", "w", "x"};

  std::uniform_int_distribution<std::size_t> n_mid_dist(2, 16);
  const std::size_t n_mid = n_mid_dist(rng);  // states between start and terminals
  std::uniform_int_distribution<std::size_t> n_term_dist(1, 3);
  const std::size_t n_term = n_term_dist(rng);

  // Index layout: 0 = start, 1..n_mid = middle, then terminals.
  std::vector<State> states;
  states.push_back(State::start());
  for (std::size_t i = 0; i < n_mid; ++i) {
    states.push_back(State{"n", static_cast<std::int32_t>(i)});
  }
  for (std::size_t i = 0; i < n_term; ++i) {
    states.push_back(State{"t", static_cast<std::int32_t>(i)});
  }
  const std::size_t first_term = 1 + n_mid;
  const std::size_t total = states.size();

  Mdp mdp;
  mdp.gamma = gamma;
  mdp.agent_actions = {agent_labels.begin(), agent_labels.end()};

  std::uniform_real_distribution<double> reward_dist(-10.0, 10.0);
  std::uniform_int_distribution<std::int64_t> count_dist(1, 100);
  std::uniform_int_distribution<std::size_t> n_actions_dist(1, 4);
  std::uniform_int_distribution<std::size_t> n_targets_dist(1, 3);

  std::map<std::pair<State, std::string>, std::int64_t> occurrence;
  for (std::size_t i = 0; i < first_term; ++i) {
    const bool agent_state = i == 0 ? std::bernoulli_distribution(0.7)(rng)
                                    : std::bernoulli_distribution(0.5)(rng);
    const auto& labels = agent_state ? agent_labels : env_labels;
    const std::size_t n_actions = n_actions_dist(rng);
    for (std::size_t a = 0; a < n_actions; ++a) {
      const std::string& action = labels[a];
      const std::size_t n_targets = n_targets_dist(rng);
      std::set<std::size_t> targets;
      std::uniform_int_distribution<std::size_t> target_dist(i + 1, total - 1);
      for (std::size_t t = 0; t < n_targets; ++t) targets.insert(target_dist(rng));
      std::int64_t n_sa = 0;
      std::vector<Edge> edges;
      for (std::size_t target : targets) {
        Edge edge;
        edge.source = states[i];
        edge.action = action;
        edge.target = states[target];
        edge.count = count_dist(rng);
        edge.reward = std::round(reward_dist(rng) * 10.0) / 10.0;
        edge.reward_samples = edge.count;
        n_sa += edge.count;
        edges.push_back(std::move(edge));
      }
      for (auto& edge : edges) {
        edge.probability =
            static_cast<double>(edge.count) / static_cast<double>(n_sa);
        mdp.edges.push_back(std::move(edge));
      }
      occurrence[{states[i], action}] = n_sa;
    }
  }
  mdp.occurrence = std::move(occurrence);
  mdp.states = states;
  std::sort(mdp.states.begin(), mdp.states.end());
  for (std::size_t i = first_term; i < total; ++i) mdp.terminals.insert(states[i]);
  std::sort(mdp.edges.begin(), mdp.edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.source, a.action, a.target) <
           std::tie(b.source, b.action, b.target);
  });
  return mdp;
}

// Random MDP whose best-vs-runner-up value gap is at least `min_gap` at
// every decision state, so the stochastic learners have a resolvable target.
inline Mdp random_separated_mdp(std::mt19937_64& rng, double min_gap,
                                double gamma = 0.99) {
  for (;;) {
    Mdp mdp = random_small_mdp(rng, gamma);
    const ViResult vi = value_iteration(mdp);
    if (vi.optimal_actions.empty()) continue;
    if (min_decision_gap(mdp, vi) >= min_gap) return mdp;
  }
}

// ---------------------------------------------------------------------------
// A small but complete loan model for the simulation tests.
// ---------------------------------------------------------------------------

inline ProcessModel toy_loan_model() {
  ProcessModel model;
  model.name = "toy_loan";
  model.start = "submit_application";
  model.amount_min = 5000.0;
  model.amount_max = 30000.0;
  model.gap_mean_h = 0.05;
  model.interarrival_mean_h = 0.5;
  model.preaccept_probability = 0.6;
  model.preaccept_gateway = "g_preaccept";
  model.kpi.accept_activity = "accept_offer";

  auto act = [&model](const std::string& name, Owner owner, double dur,
                      const std::string& next) {
    model.activities[name] = ActivitySpec{name, owner, dur, next};
  };
  act("submit_application", Owner::Environment, 0.02, "g_preaccept");
  act("preaccept_application", Owner::Agent, 0.3, "g_work");
  act("decline_application", Owner::Agent, 0.1, kEndNode);
  act("create_offer", Owner::Agent, 1.0, "g_response");
  act("call_customer", Owner::Agent, 0.5, "g_response");
  act("cancel_application", Owner::Agent, 0.1, kEndNode);
  act("accept_offer", Owner::Environment, 0.02, "finalize_approval");
  act("decline_offer", Owner::Environment, 0.02, "g_work");
  act("withdraw_application", Owner::Environment, 0.02, kEndNode);
  act("finalize_approval", Owner::Agent, 0.3, kEndNode);

  GatewaySpec pre;
  pre.name = "g_preaccept";
  pre.kind = GatewaySpec::Kind::Chance;
  pre.outcomes = {GatewayOutcome{"preaccept_application", 0.6},
                  GatewayOutcome{"decline_application", 0.4}};
  model.gateways["g_preaccept"] = std::move(pre);

  GatewaySpec work;
  work.name = "g_work";
  work.kind = GatewaySpec::Kind::Single;
  work.outcomes = {GatewayOutcome{"create_offer", 0.45},
                   GatewayOutcome{"call_customer", 0.45},
                   GatewayOutcome{"cancel_application", 0.10}};
  work.force_after_visits = 30;
  work.forced_next = "cancel_application";
  model.gateways["g_work"] = std::move(work);

  GatewaySpec response;
  response.name = "g_response";
  response.kind = GatewaySpec::Kind::Multiple;
  response.fallthrough = "g_work";
  GatewayOutcome accept;
  accept.next = "accept_offer";
  accept.bias = -2.6;
  accept.amount_coef = -0.4;
  accept.count_coefs = {{"create_offer", 0.9}, {"call_customer", 0.5}};
  accept.min_counts = {{"create_offer", 1}};
  GatewayOutcome decline;
  decline.next = "decline_offer";
  decline.bias = -1.6;
  decline.min_counts = {{"create_offer", 1}};
  GatewayOutcome withdraw;
  withdraw.next = "withdraw_application";
  withdraw.bias = -2.2;
  withdraw.count_coefs = {{"call_customer", -0.6}};
  GatewayOutcome none;
  none.bias = 0.8;
  response.outcomes = {accept, decline, withdraw, none};
  model.gateways["g_response"] = std::move(response);
  return model;
}

// ---------------------------------------------------------------------------
// A fully trained artifact bundle over an in-memory log, for recommender and
// evaluation tests.
// ---------------------------------------------------------------------------

struct Bundle {
  NormalizationStats stats;
  KMeansModel kmeans;
  Mdp mdp;
  Policy policy;
  QTable qtable;

  PolicyArtifacts view() const {
    PolicyArtifacts artifacts;
    artifacts.stats = &stats;
    artifacts.kmeans = &kmeans;
    artifacts.mdp = &mdp;
    artifacts.policy = &policy;
    artifacts.qtable = &qtable;
    return artifacts;
  }
};

inline Bundle train_bundle(const EventLog& log, std::size_t k,
                           ScalingFn scaling = ScalingFn::h0(),
                           std::size_t episodes = 4000, std::uint64_t seed = 1) {
  Bundle bundle;
  bundle.stats = fit_stats(log);
  const auto vectors = all_prefix_vectors(log, bundle.stats);
  std::set<std::vector<double>> distinct;
  for (const auto& v : vectors) distinct.insert(v.values);
  KMeansOptions kopts;
  kopts.k = std::min(k, distinct.size());
  kopts.seed = seed;
  bundle.kmeans = kmeans_fit(vectors, kopts);
  bundle.mdp = build_mdp(log, bundle.kmeans, bundle.stats);
  TrainConfig cfg;
  cfg.episodes = episodes;
  cfg.seed = seed;
  auto [policy, qtable] = mc_policy_iteration(bundle.mdp, scaling, cfg);
  bundle.policy = std::move(policy);
  bundle.qtable = std::move(qtable);
  return bundle;
}

}  // namespace testutil
