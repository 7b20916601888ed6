#include "mdpmine/rl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mdpmine {

ScalingFn ScalingFn::step(std::int64_t n_t) {
  ScalingFn s;
  s.kind = Kind::Step;
  s.n_t = n_t;
  return s;
}

ScalingFn ScalingFn::smooth(double lambda) {
  ScalingFn s;
  s.kind = Kind::Smooth;
  s.lambda = lambda;
  return s;
}

ScalingFn ScalingFn::linear_fitted(const Mdp& mdp) {
  ScalingFn s;
  s.kind = Kind::Linear;
  bool first = true;
  for (const auto& [key, n] : mdp.occurrence) {
    if (!mdp.is_agent_action(key.second)) continue;
    if (first) {
      s.n_min = s.n_max = n;
      first = false;
    } else {
      s.n_min = std::min(s.n_min, n);
      s.n_max = std::max(s.n_max, n);
    }
  }
  if (first) {
    throw NoAgentDecisionsError("linear_fitted: the MDP has no agent state-action pairs");
  }
  return s;
}

std::string ScalingFn::name() const {
  switch (kind) {
    case Kind::H0: return "h0";
    case Kind::Linear: return "linear";
    case Kind::Step: return "step";
    case Kind::Smooth: return "smooth";
  }
  return "?";
}

double h_value(const ScalingFn& scaling, std::int64_t n) {
  switch (scaling.kind) {
    case ScalingFn::Kind::H0:
      return 1.0;
    case ScalingFn::Kind::Linear: {
      if (scaling.n_max == scaling.n_min) return 1.0;  // degenerate range
      const double h = static_cast<double>(n - scaling.n_min) /
                       static_cast<double>(scaling.n_max - scaling.n_min);
      return std::clamp(h, 0.0, 1.0);
    }
    case ScalingFn::Kind::Step:
      return n <= scaling.n_t ? 0.0 : 1.0;
    case ScalingFn::Kind::Smooth: {
      const double e = std::exp(-static_cast<double>(n) / scaling.lambda);
      return 1.0 - 2.0 * e / (1.0 + e);
    }
  }
  return 1.0;
}

double scaled_q(double q, const ScalingFn& scaling, std::int64_t n) {
  return q * h_value(scaling, n);
}

double QTable::value(const State& s, const std::string& action) const {
  auto it = values.find({s, action});
  return it == values.end() ? 0.0 : it->second;
}

std::int64_t QTable::visits(const State& s, const std::string& action) const {
  auto it = visit_counts.find({s, action});
  return it == visit_counts.end() ? 0 : it->second;
}

namespace {

// Flat, index-based view of the MDP for the episode loops.
struct Compact {
  struct Action {
    std::string label;
    bool agent = false;
    std::int64_t n = 0;
    std::vector<std::int32_t> target_state;
    std::vector<std::int64_t> cum_count;  ///< cumulative counts for sampling
    std::vector<double> reward;
  };
  struct Node {
    std::vector<Action> actions;  ///< sorted by label
    std::vector<std::size_t> agent_actions;
    std::vector<std::size_t> env_actions;
    std::int64_t n_agent = 0;
    std::int64_t n_env = 0;
    bool terminal = false;
  };
  std::vector<State> states;
  std::vector<Node> nodes;
  std::int32_t start = -1;

  std::int32_t id_of(const State& s) const {
    auto it = std::lower_bound(states.begin(), states.end(), s);
    if (it == states.end() || *it != s) return -1;
    return static_cast<std::int32_t>(it - states.begin());
  }
};

Compact compact_of(const Mdp& mdp) {
  Compact c;
  c.states = mdp.states;  // sorted by construction
  c.nodes.resize(c.states.size());
  const MdpIndex index = make_index(mdp);
  for (std::size_t i = 0; i < c.states.size(); ++i) {
    const State& s = c.states[i];
    Compact::Node& node = c.nodes[i];
    node.terminal = mdp.terminals.count(s) > 0;
    const auto* entry = index.find(s);
    if (entry == nullptr) continue;
    node.n_agent = entry->n_agent;
    node.n_env = entry->n_env;
    for (const auto& group : entry->groups) {
      Compact::Action action;
      action.label = group.action;
      action.agent = group.agent;
      action.n = group.n;
      std::int64_t cum = 0;
      for (const Edge* edge : group.targets) {
        cum += edge->count;
        action.cum_count.push_back(cum);
        action.target_state.push_back(c.id_of(edge->target));
        action.reward.push_back(edge->reward);
      }
      (action.agent ? node.agent_actions : node.env_actions).push_back(node.actions.size());
      node.actions.push_back(std::move(action));
    }
  }
  c.start = c.id_of(State::start());
  return c;
}

struct Step {
  std::int32_t state;
  std::size_t action;  ///< index into nodes[state].actions
  std::int32_t next_state;
  double reward;
  bool agent;
};

std::size_t sample_by_count(const std::vector<std::int64_t>& cum, std::int64_t total,
                            std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> pick(0, total - 1);
  const std::int64_t r = pick(rng);
  return static_cast<std::size_t>(
      std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
}

// q values per (state, agent action slot), aligned with Compact.
struct QStore {
  std::vector<std::vector<double>> q;
  std::vector<std::vector<std::int64_t>> visits;

  explicit QStore(const Compact& c) {
    q.resize(c.nodes.size());
    visits.resize(c.nodes.size());
    for (std::size_t i = 0; i < c.nodes.size(); ++i) {
      q[i].assign(c.nodes[i].actions.size(), 0.0);
      visits[i].assign(c.nodes[i].actions.size(), 0);
    }
  }
};

// argmax of q~ among the agent actions; ties by higher n, then label order
// (actions are sorted by label, so the first winner stays).
std::size_t greedy_slot(const Compact& c, const QStore& store, std::int32_t state,
                        const ScalingFn& scaling) {
  const auto& node = c.nodes[state];
  std::size_t best = node.agent_actions.front();
  double best_q = -std::numeric_limits<double>::infinity();
  std::int64_t best_n = -1;
  for (std::size_t slot : node.agent_actions) {
    const auto& action = node.actions[slot];
    const double qs = scaled_q(store.q[state][slot], scaling, action.n);
    if (qs > best_q || (qs == best_q && action.n > best_n)) {
      best = slot;
      best_q = qs;
      best_n = action.n;
    }
  }
  return best;
}

double epsilon_at(const TrainConfig& cfg, std::size_t episode) {
  if (cfg.epsilon_start <= cfg.epsilon_end) return cfg.epsilon_end;
  double decay = cfg.epsilon_decay;
  if (decay <= 0.0) {
    const double horizon = 0.8 * static_cast<double>(cfg.episodes);
    decay = std::pow(cfg.epsilon_end / cfg.epsilon_start, 1.0 / std::max(1.0, horizon));
  }
  return std::max(cfg.epsilon_end,
                  cfg.epsilon_start * std::pow(decay, static_cast<double>(episode)));
}

// One episode from the start state. Environment priority at mixed states is
// the empirical marginal n_env / (n_env + n_agent).
std::vector<Step> run_episode(const Compact& c, const QStore& store,
                              const ScalingFn& scaling, const TrainConfig& cfg,
                              double epsilon, std::mt19937_64& rng) {
  std::vector<Step> steps;
  std::int32_t state = c.start;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  while (steps.size() < cfg.max_episode_len) {
    const auto& node = c.nodes[state];
    if (node.terminal || node.actions.empty()) break;
    bool env_turn = node.n_env > 0;
    if (node.n_env > 0 && node.n_agent > 0) {
      std::uniform_int_distribution<std::int64_t> pick(0, node.n_env + node.n_agent - 1);
      env_turn = pick(rng) < node.n_env;
    }
    std::size_t slot;
    if (env_turn) {
      if (node.env_actions.size() == 1) {
        slot = node.env_actions.front();
      } else {
        std::uniform_int_distribution<std::int64_t> pick(0, node.n_env - 1);
        std::int64_t r = pick(rng);
        slot = node.env_actions.front();
        for (std::size_t s : node.env_actions) {
          if (r < node.actions[s].n) {
            slot = s;
            break;
          }
          r -= node.actions[s].n;
        }
      }
    } else {
      if (coin(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, node.agent_actions.size() - 1);
        slot = node.agent_actions[pick(rng)];
      } else {
        slot = greedy_slot(c, store, state, scaling);
      }
    }
    const auto& action = node.actions[slot];
    const std::size_t t = sample_by_count(action.cum_count, action.n, rng);
    steps.push_back(Step{state, slot, action.target_state[t], action.reward[t], !env_turn});
    state = action.target_state[t];
  }
  return steps;
}

void require_agent_decisions(const Compact& c) {
  for (const auto& node : c.nodes) {
    if (!node.agent_actions.empty()) return;
  }
  throw NoAgentDecisionsError("training: the MDP has no agent decision state");
}

std::pair<Policy, QTable> extract(const Compact& c, const QStore& store,
                                  const ScalingFn& scaling, const TrainConfig& cfg,
                                  const std::string& algorithm) {
  Policy policy;
  policy.scaling = scaling;
  policy.provenance = {algorithm, cfg.episodes, cfg.seed, cfg.gamma,
                       cfg.epsilon_start, cfg.epsilon_end};
  QTable table;
  table.gamma = cfg.gamma;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    const auto& node = c.nodes[i];
    for (std::size_t slot = 0; slot < node.actions.size(); ++slot) {
      if (!node.actions[slot].agent) continue;
      table.values[{c.states[i], node.actions[slot].label}] = store.q[i][slot];
      table.visit_counts[{c.states[i], node.actions[slot].label}] =
          store.visits[i][slot];
    }
    if (!node.agent_actions.empty()) {
      const std::size_t slot =
          greedy_slot(c, store, static_cast<std::int32_t>(i), scaling);
      policy.action_of[c.states[i]] = node.actions[slot].label;
    }
  }
  return {std::move(policy), std::move(table)};
}

}  // namespace

std::pair<Policy, QTable> mc_policy_iteration(const Mdp& mdp, const ScalingFn& scaling,
                                              const TrainConfig& cfg) {
  const Compact c = compact_of(mdp);
  require_agent_decisions(c);
  QStore store(c);
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t episode = 0; episode < cfg.episodes; ++episode) {
    const double eps = epsilon_at(cfg, episode);
    const auto steps = run_episode(c, store, scaling, cfg, eps, rng);
    double g = 0.0;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
      g = it->reward + cfg.gamma * g;
      if (!it->agent) continue;
      auto& n = store.visits[it->state][it->action];
      auto& q = store.q[it->state][it->action];
      ++n;
      q += (g - q) / static_cast<double>(n);
    }
  }
  return extract(c, store, scaling, cfg, "mc_policy_iteration");
}

std::pair<Policy, QTable> q_learning(const Mdp& mdp, const TrainConfig& cfg) {
  const Compact c = compact_of(mdp);
  require_agent_decisions(c);
  QStore store(c);
  const ScalingFn h0 = ScalingFn::h0();
  std::mt19937_64 rng(cfg.seed);

  auto max_q = [&](std::int32_t state) {
    const auto& node = c.nodes[state];
    if (node.agent_actions.empty()) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t slot : node.agent_actions) {
      best = std::max(best, store.q[state][slot]);
    }
    return best;
  };

  struct Pending {
    std::int32_t state;
    std::size_t slot;
    double acc;
    double disc;
  };

  for (std::size_t episode = 0; episode < cfg.episodes; ++episode) {
    const double eps = epsilon_at(cfg, episode);
    const auto steps = run_episode(c, store, h0, cfg, eps, rng);
    std::optional<Pending> pending;
    auto close = [&](double bootstrap) {
      auto& q = store.q[pending->state][pending->slot];
      q += cfg.alpha * (pending->acc + pending->disc * bootstrap - q);
      ++store.visits[pending->state][pending->slot];
    };
    for (const auto& step : steps) {
      if (step.agent) {
        if (pending) close(max_q(step.state));
        pending = Pending{step.state, step.action, step.reward, cfg.gamma};
      } else if (pending) {
        pending->acc += pending->disc * step.reward;
        pending->disc *= cfg.gamma;
      }
    }
    if (pending) {
      // Terminal endings close with return only; a length-cap cut bootstraps
      // with the cut state's value.
      double bootstrap = 0.0;
      if (steps.size() >= cfg.max_episode_len) bootstrap = max_q(steps.back().next_state);
      close(bootstrap);
    }
  }
  return extract(c, store, h0, cfg, "q_learning");
}

std::string greedy_action(const QTable& qtable, const ScalingFn& scaling,
                          const Mdp& mdp, const State& state) {
  const std::string* best = nullptr;
  double best_q = -std::numeric_limits<double>::infinity();
  std::int64_t best_n = -1;
  for (auto it = mdp.occurrence.lower_bound({state, std::string{}});
       it != mdp.occurrence.end() && it->first.first == state; ++it) {
    const std::string& action = it->first.second;
    if (!mdp.is_agent_action(action)) continue;
    const double qs = scaled_q(qtable.value(state, action), scaling, it->second);
    if (qs > best_q || (qs == best_q && it->second > best_n)) {
      best = &action;
      best_q = qs;
      best_n = it->second;
    }
  }
  if (best == nullptr) {
    throw NoActionsAvailableError("greedy_action: no agent action at state " +
                                  state.key());
  }
  return *best;
}

}  // namespace mdpmine
