#include "mdpmine/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace mdpmine {

namespace {

using nlohmann::json;

constexpr std::int64_t kBaseEpochMs = 1735689600000;  // 2025-01-01T00:00:00Z

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t case_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 1));
}

}  // namespace

std::set<std::string> ProcessModel::agent_activities() const {
  std::set<std::string> out;
  for (const auto& [name, spec] : activities) {
    if (spec.owner == Owner::Agent) out.insert(name);
  }
  return out;
}

void ProcessModel::validate() const {
  auto fail = [this](const std::string& what) {
    throw InvalidModelError("model '" + name + "': " + what);
  };
  if (activities.empty()) fail("no activities");
  if (activities.find(start) == activities.end()) {
    fail("start activity '" + start + "' does not exist");
  }
  if (!(amount_max >= amount_min)) fail("amount range is inverted");
  if (!(preaccept_probability >= 0.0 && preaccept_probability <= 1.0)) {
    fail("preaccept_probability out of [0,1]");
  }
  auto node_exists = [&](const std::string& node) {
    return node == kEndNode || activities.count(node) > 0 || gateways.count(node) > 0;
  };
  for (const auto& [name_, spec] : activities) {
    if (spec.duration_mean_h < 0) fail("activity '" + name_ + "' has negative duration");
    if (!node_exists(spec.next)) {
      fail("activity '" + name_ + "' points to unknown node '" + spec.next + "'");
    }
  }
  if (!preaccept_gateway.empty()) {
    auto it = gateways.find(preaccept_gateway);
    if (it == gateways.end()) fail("preaccept gateway '" + preaccept_gateway + "' missing");
    if (it->second.outcomes.size() != 2) {
      fail("preaccept gateway must have exactly two outcomes");
    }
  }
  for (const auto& [gname, gw] : gateways) {
    if (gw.outcomes.empty()) fail("gateway '" + gname + "' has no outcomes");
    double prob_sum = 0.0;
    for (const auto& outcome : gw.outcomes) {
      if (outcome.next.empty()) {
        if (gw.kind != GatewaySpec::Kind::Multiple) {
          fail("gateway '" + gname + "': only multiple gateways may have a no-act outcome");
        }
      } else if (!node_exists(outcome.next)) {
        fail("gateway '" + gname + "' points to unknown node '" + outcome.next + "'");
      }
      if (gw.kind != GatewaySpec::Kind::Multiple) {
        if (outcome.probability < 0.0 || outcome.probability > 1.0) {
          fail("gateway '" + gname + "': outcome probability out of [0,1]");
        }
        prob_sum += outcome.probability;
      }
      for (const auto& [act, _] : outcome.count_coefs) {
        if (activities.count(act) == 0) {
          fail("gateway '" + gname + "': count coefficient on unknown activity '" + act + "'");
        }
      }
      for (const auto& [act, _] : outcome.min_counts) {
        if (activities.count(act) == 0) {
          fail("gateway '" + gname + "': min count on unknown activity '" + act + "'");
        }
      }
    }
    if (gw.kind != GatewaySpec::Kind::Multiple &&
        gname != preaccept_gateway &&  // rewritten from preaccept_probability
        std::abs(prob_sum - 1.0) > 1e-9) {
      fail("gateway '" + gname + "': outcome probabilities sum to " +
           std::to_string(prob_sum));
    }
    if (gw.kind == GatewaySpec::Kind::Multiple) {
      if (gw.fallthrough.empty() || !node_exists(gw.fallthrough)) {
        fail("gateway '" + gname + "': multiple gateway needs a valid fallthrough");
      }
    }
    if (gw.kind == GatewaySpec::Kind::Single) {
      for (const auto& outcome : gw.outcomes) {
        if (activities.count(outcome.next) == 0) {
          fail("gateway '" + gname + "': single-gateway outcomes must be activities");
        }
      }
      if (gw.force_after_visits > 0 && activities.count(gw.forced_next) == 0) {
        fail("gateway '" + gname + "': forced_next must be an activity");
      }
    }
  }

  // Gateway-only cycles would hang the walk; the end must be reachable.
  for (const auto& [gname, gw] : gateways) {
    std::set<std::string> seen;
    std::deque<std::string> frontier{gname};
    while (!frontier.empty()) {
      const std::string node = frontier.front();
      frontier.pop_front();
      auto it = gateways.find(node);
      if (it == gateways.end()) continue;
      if (!seen.insert(node).second) {
        if (node == gname) fail("gateway '" + gname + "' reaches itself without an activity");
        continue;
      }
      for (const auto& outcome : it->second.outcomes) {
        frontier.push_back(outcome.next.empty() ? it->second.fallthrough : outcome.next);
      }
    }
  }
  {
    std::set<std::string> seen;
    std::deque<std::string> frontier{start};
    bool end_reachable = false;
    while (!frontier.empty()) {
      const std::string node = frontier.front();
      frontier.pop_front();
      if (node == kEndNode) {
        end_reachable = true;
        continue;
      }
      if (!seen.insert(node).second) continue;
      if (auto it = activities.find(node); it != activities.end()) {
        frontier.push_back(it->second.next);
      } else if (auto git = gateways.find(node); git != gateways.end()) {
        for (const auto& outcome : git->second.outcomes) {
          frontier.push_back(outcome.next.empty() ? git->second.fallthrough
                                                  : outcome.next);
        }
        if (git->second.force_after_visits > 0) frontier.push_back(git->second.forced_next);
      }
    }
    if (!end_reachable) fail("the end is unreachable from '" + start + "'");
  }
}

namespace {

struct WalkContext {
  const ProcessModel& model;
  std::mt19937_64 rng;
  const AgentChooser* chooser = nullptr;
  const SimulateOptions* opts = nullptr;

  SimTrace out;
  double amount = 0.0;
  bool accepted = false;
  std::int64_t t_ms = 0;
  std::map<std::string, std::int64_t> activity_counts;
  std::map<std::string, std::int64_t> gateway_visits;
  std::size_t consecutive_agent = 0;
};

double exp_draw(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  std::exponential_distribution<double> d(1.0 / mean);
  return d(rng);
}

void emit_event(WalkContext& ctx, const ActivitySpec& spec) {
  const double gap_h = exp_draw(ctx.rng, ctx.model.gap_mean_h);
  const double duration_h = exp_draw(ctx.rng, spec.duration_mean_h);
  ctx.t_ms += static_cast<std::int64_t>(std::llround(gap_h * 3'600'000.0));

  Event event;
  event.activity = spec.name;
  event.timestamp_ms = ctx.t_ms;
  event.owner = spec.owner;
  event.payload.emplace(ctx.model.kpi.duration_attribute, AttrValue{duration_h});
  if (ctx.out.trace.events.empty()) {
    event.payload.emplace(ctx.model.kpi.amount_attribute, AttrValue{ctx.amount});
  }
  ctx.out.trace.events.push_back(std::move(event));
  ctx.t_ms += static_cast<std::int64_t>(std::llround(duration_h * 3'600'000.0));

  ++ctx.activity_counts[spec.name];
  const bool counts_work =
      !ctx.model.kpi.count_agent_work_only || spec.owner == Owner::Agent;
  if (counts_work) {
    ctx.out.reward -= ctx.model.kpi.labor_cost_per_hour * duration_h;
  }
  if (spec.owner == Owner::Agent) {
    ++ctx.consecutive_agent;
  } else {
    ctx.consecutive_agent = 0;
  }
  if (spec.name == ctx.model.kpi.accept_activity && !ctx.accepted) {
    ctx.accepted = true;
    ctx.out.reward += ctx.model.kpi.interest_rate * ctx.amount;
  }
}

double outcome_weight(const WalkContext& ctx, const GatewayOutcome& outcome) {
  for (const auto& [act, min_n] : outcome.min_counts) {
    auto it = ctx.activity_counts.find(act);
    if ((it == ctx.activity_counts.end() ? 0 : it->second) < min_n) return 0.0;
  }
  const double amount_norm =
      ctx.model.amount_max > ctx.model.amount_min
          ? (ctx.amount - ctx.model.amount_min) /
                (ctx.model.amount_max - ctx.model.amount_min)
          : 0.0;
  double z = outcome.bias + outcome.amount_coef * amount_norm;
  for (const auto& [act, coef] : outcome.count_coefs) {
    auto it = ctx.activity_counts.find(act);
    z += coef * static_cast<double>(it == ctx.activity_counts.end() ? 0 : it->second);
  }
  return std::exp(z);
}

// Fixed probabilities of a chance/single gateway, with the preaccept
// probability patched in where configured.
std::vector<double> fixed_probs(const WalkContext& ctx, const GatewaySpec& gw) {
  std::vector<double> probs;
  probs.reserve(gw.outcomes.size());
  for (const auto& outcome : gw.outcomes) probs.push_back(outcome.probability);
  if (gw.name == ctx.model.preaccept_gateway) {
    probs[0] = ctx.model.preaccept_probability;
    probs[1] = 1.0 - ctx.model.preaccept_probability;
  }
  return probs;
}

std::size_t sample_index(std::mt19937_64& rng, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::uniform_real_distribution<double> pick(0.0, total);
  double r = pick(rng);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    r -= weights[i];
    if (r <= 0.0) return i;
  }
  return weights.size() - 1;
}

SimTrace walk(const ProcessModel& model, const std::string& case_id,
              std::int64_t arrival_ms, std::uint64_t seed, const AgentChooser* chooser,
              const SimulateOptions& opts) {
  WalkContext ctx{model, std::mt19937_64(seed)};
  ctx.chooser = chooser;
  ctx.opts = &opts;
  ctx.out.trace.case_id = case_id;
  ctx.t_ms = arrival_ms;
  std::uniform_real_distribution<double> amount_dist(model.amount_min, model.amount_max);
  ctx.amount = amount_dist(ctx.rng);

  std::string node = model.start;
  while (node != kEndNode) {
    if (ctx.out.trace.events.size() >= opts.max_events) {
      ctx.out.end = SimEnd::Stalled;
      break;
    }
    if (auto it = model.activities.find(node); it != model.activities.end()) {
      emit_event(ctx, it->second);
      if (chooser != nullptr && ctx.consecutive_agent >= opts.stall_limit) {
        ctx.out.end = SimEnd::Stalled;
        break;
      }
      node = it->second.next;
      continue;
    }
    const GatewaySpec& gw = model.gateways.at(node);
    switch (gw.kind) {
      case GatewaySpec::Kind::Chance: {
        node = gw.outcomes[sample_index(ctx.rng, fixed_probs(ctx, gw))].next;
        break;
      }
      case GatewaySpec::Kind::Single: {
        const std::int64_t visit = ++ctx.gateway_visits[gw.name];
        if (chooser != nullptr) {
          std::vector<std::string> allowed;
          allowed.reserve(gw.outcomes.size());
          for (const auto& outcome : gw.outcomes) allowed.push_back(outcome.next);
          std::string action;
          try {
            action = (*chooser)(ctx.out.trace, allowed);
          } catch (const UnknownStateError&) {
            ctx.out.end = SimEnd::Exception;
          } catch (const NotADecisionPointError&) {
            ctx.out.end = SimEnd::Exception;
          } catch (const UnknownActivityError&) {
            ctx.out.end = SimEnd::Exception;
          }
          if (ctx.out.end == SimEnd::Exception) break;
          if (std::find(allowed.begin(), allowed.end(), action) == allowed.end()) {
            ctx.out.end = SimEnd::Exception;
            break;
          }
          node = action;
        } else if (gw.force_after_visits > 0 && visit > gw.force_after_visits) {
          node = gw.forced_next;
        } else {
          node = gw.outcomes[sample_index(ctx.rng, fixed_probs(ctx, gw))].next;
        }
        break;
      }
      case GatewaySpec::Kind::Multiple: {
        std::vector<double> weights;
        weights.reserve(gw.outcomes.size());
        double total = 0.0;
        for (const auto& outcome : gw.outcomes) {
          weights.push_back(outcome_weight(ctx, outcome));
          total += weights.back();
        }
        if (total <= 0.0) {
          node = gw.fallthrough;
          break;
        }
        const auto& outcome = gw.outcomes[sample_index(ctx.rng, weights)];
        node = outcome.next.empty() ? gw.fallthrough : outcome.next;
        break;
      }
    }
    if (ctx.out.end != SimEnd::Completed) break;
  }
  ctx.out.trace.reward = ctx.out.reward;
  return ctx.out;
}

std::string case_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%06zu", index + 1);
  return buf;
}

}  // namespace

EventLog generate_log(const ProcessModel& model, std::size_t n_traces,
                      std::uint64_t seed) {
  model.validate();
  if (n_traces < 1) throw InvalidModelError("generate_log: n_traces must be >= 1");
  SimulateOptions gen_opts;
  gen_opts.max_events = 1000;  // generation relies on the model's own valves
  gen_opts.stall_limit = 1000;

  EventLog log;
  for (const auto& [name, _] : model.activities) log.alphabet.push_back(name);
  std::sort(log.alphabet.begin(), log.alphabet.end());
  log.agent_activities = model.agent_activities();

  const auto interarrival_ms =
      static_cast<std::int64_t>(model.interarrival_mean_h * 3'600'000.0);
  log.traces.reserve(n_traces);
  for (std::size_t i = 0; i < n_traces; ++i) {
    SimTrace sim = walk(model, case_name(i), kBaseEpochMs + interarrival_ms * i,
                        case_seed(seed, i), nullptr, gen_opts);
    if (sim.end != SimEnd::Completed) {
      throw InvalidModelError("generate_log: case " + sim.trace.case_id +
                              " did not reach the end within " +
                              std::to_string(gen_opts.max_events) +
                              " events; the model needs a termination valve "
                              "(e.g. force_after_visits on its work gateway)");
    }
    sim.trace.reward = sim.reward;
    log.traces.push_back(std::move(sim.trace));
  }
  return log;
}

double PolicySimResult::mean() const {
  if (rewards.empty()) return 0.0;
  double sum = 0.0;
  for (double r : rewards) sum += r;
  return sum / static_cast<double>(rewards.size());
}

double PolicySimResult::stddev() const {
  if (rewards.size() < 2) return 0.0;
  const double m = mean();
  double acc = 0.0;
  for (double r : rewards) acc += (r - m) * (r - m);
  return std::sqrt(acc / static_cast<double>(rewards.size() - 1));
}

double PolicySimResult::stderror() const {
  return rewards.size() < 2 ? 0.0 : stddev() / std::sqrt(static_cast<double>(rewards.size()));
}

PolicySimResult simulate_with_chooser(const ProcessModel& model, AgentChooser chooser,
                                      std::size_t n_traces, std::uint64_t seed,
                                      const SimulateOptions& opts) {
  model.validate();
  PolicySimResult result;
  result.rewards.reserve(n_traces);
  const auto interarrival_ms =
      static_cast<std::int64_t>(model.interarrival_mean_h * 3'600'000.0);
  for (std::size_t i = 0; i < n_traces; ++i) {
    const SimTrace sim = walk(model, case_name(i), kBaseEpochMs + interarrival_ms * i,
                              case_seed(seed, i), &chooser, opts);
    result.rewards.push_back(sim.reward);
    if (sim.end == SimEnd::Exception) ++result.exceptions;
    if (sim.end == SimEnd::Stalled) ++result.stalls;
  }
  return result;
}

PolicySimResult simulate_with_policy(const ProcessModel& model,
                                     const PolicyArtifacts& artifacts,
                                     std::size_t n_traces, std::uint64_t seed,
                                     const SimulateOptions& opts) {
  for (const auto& [name, _] : model.activities) {
    if (!std::binary_search(artifacts.stats->alphabet_order.begin(),
                            artifacts.stats->alphabet_order.end(), name)) {
      throw IncompatibleAlphabetError("model activity '" + name +
                                      "' is unknown to the trained policy");
    }
  }
  RecommendOptions rec_opts;
  rec_opts.fallback_unknown_state = opts.fallback_unknown_state;
  AgentChooser chooser = [&artifacts, rec_opts](const Trace& prefix,
                                                const std::vector<std::string>&) {
    std::vector<std::string> labels;
    labels.reserve(prefix.events.size());
    for (const auto& event : prefix.events) labels.push_back(event.activity);
    return recommend(labels, artifacts, rec_opts).action;
  };
  return simulate_with_chooser(model, std::move(chooser), n_traces, seed, opts);
}

std::vector<std::string> replay_violations(const ProcessModel& model,
                                           const Trace& trace) {
  std::vector<std::string> issues;
  // Activities structurally reachable from `node` before executing another
  // activity; kEndNode marks that the case may finish here.
  auto closure = [&model](const std::string& node) {
    std::set<std::string> result;
    std::set<std::string> seen;
    std::deque<std::string> frontier{node};
    while (!frontier.empty()) {
      const std::string current = frontier.front();
      frontier.pop_front();
      if (!seen.insert(current).second) continue;
      if (current == kEndNode || model.activities.count(current) > 0) {
        result.insert(current);
        continue;
      }
      auto it = model.gateways.find(current);
      if (it == model.gateways.end()) continue;
      for (const auto& outcome : it->second.outcomes) {
        frontier.push_back(outcome.next.empty() ? it->second.fallthrough : outcome.next);
      }
      if (it->second.force_after_visits > 0) frontier.push_back(it->second.forced_next);
    }
    return result;
  };

  std::set<std::string> possible{model.start};
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const std::string& activity = trace.events[i].activity;
    if (possible.count(activity) == 0) {
      issues.push_back("event " + std::to_string(i + 1) + ": '" + activity +
                       "' is not allowed here");
      // continue from the claimed activity to surface further issues
    }
    auto it = model.activities.find(activity);
    if (it == model.activities.end()) {
      issues.push_back("event " + std::to_string(i + 1) + ": unknown activity '" +
                       activity + "'");
      return issues;
    }
    possible = closure(it->second.next);
  }
  if (possible.count(kEndNode) == 0) {
    issues.push_back("trace ends where the model cannot finish");
  }
  return issues;
}

double acceptance_rate(const EventLog& log, const std::string& accept_activity) {
  if (log.traces.empty()) return 0.0;
  std::size_t accepted = 0;
  for (const auto& trace : log.traces) {
    for (const auto& event : trace.events) {
      if (event.activity == accept_activity) {
        ++accepted;
        break;
      }
    }
  }
  return static_cast<double>(accepted) / static_cast<double>(log.traces.size());
}

namespace {

Owner owner_from(const std::string& raw) {
  if (raw == "agent") return Owner::Agent;
  if (raw == "environment") return Owner::Environment;
  throw InvalidModelError("owner must be 'agent' or 'environment', got '" + raw + "'");
}

GatewaySpec::Kind kind_from(const std::string& raw) {
  if (raw == "chance") return GatewaySpec::Kind::Chance;
  if (raw == "single") return GatewaySpec::Kind::Single;
  if (raw == "multiple") return GatewaySpec::Kind::Multiple;
  throw InvalidModelError("gateway kind must be chance|single|multiple, got '" + raw + "'");
}

}  // namespace

ProcessModel ProcessModel::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidModelError("cannot open model preset: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidModelError("bad JSON in " + path.string() + ": " + e.what());
  }
  ProcessModel model;
  try {
    model.name = j.value("name", path.stem().string());
    model.start = j.at("start").get<std::string>();
    model.amount_min = j.at("amount").at("min").get<double>();
    model.amount_max = j.at("amount").at("max").get<double>();
    model.interarrival_mean_h = j.value("interarrival_mean_h", 1.0);
    model.gap_mean_h = j.value("gap_mean_h", 0.05);
    model.preaccept_probability = j.value("preaccept_probability", 0.6);
    model.preaccept_gateway = j.value("preaccept_gateway", std::string{"g_preaccept"});
    if (j.contains("kpi")) {
      const auto& k = j["kpi"];
      model.kpi.interest_rate = k.value("interest_rate", 0.15);
      model.kpi.labor_cost_per_hour = k.value("labor_cost_per_hour", 36.0);
      model.kpi.accept_activity = k.value("accept_activity", std::string{"accept_offer"});
      model.kpi.amount_attribute = k.value("amount_attribute", std::string{"amount"});
      model.kpi.duration_attribute =
          k.value("duration_attribute", std::string{"duration_h"});
    }
    for (const auto& [name, a] : j.at("activities").items()) {
      ActivitySpec spec;
      spec.name = name;
      spec.owner = owner_from(a.at("owner").get<std::string>());
      spec.duration_mean_h = a.at("duration_mean_h").get<double>();
      spec.next = a.at("next").get<std::string>();
      model.activities.emplace(name, std::move(spec));
    }
    const json gateways = j.value("gateways", json::object());
    for (const auto& [name, g] : gateways.items()) {
      GatewaySpec gw;
      gw.name = name;
      gw.kind = kind_from(g.at("kind").get<std::string>());
      gw.fallthrough = g.value("fallthrough", std::string{});
      gw.force_after_visits = g.value("force_after_visits", std::int64_t{0});
      gw.forced_next = g.value("forced_next", std::string{});
      for (const auto& o : g.at("outcomes")) {
        GatewayOutcome outcome;
        outcome.next = o.value("next", std::string{});
        outcome.probability = o.value("probability", 0.0);
        outcome.bias = o.value("bias", 0.0);
        outcome.amount_coef = o.value("amount_coef", 0.0);
        const json coefs = o.value("count_coefs", json::object());
        for (const auto& [act, coef] : coefs.items()) {
          outcome.count_coefs.emplace(act, coef.get<double>());
        }
        const json mins = o.value("min_counts", json::object());
        for (const auto& [act, n] : mins.items()) {
          outcome.min_counts.emplace(act, n.get<std::int64_t>());
        }
        gw.outcomes.push_back(std::move(outcome));
      }
      model.gateways.emplace(name, std::move(gw));
    }
  } catch (const json::exception& e) {
    throw InvalidModelError("bad model preset " + path.string() + ": " + e.what());
  }
  model.validate();
  return model;
}

std::string ProcessModel::to_json() const {
  json j;
  j["name"] = name;
  j["start"] = start;
  j["amount"] = {{"min", amount_min}, {"max", amount_max}};
  j["interarrival_mean_h"] = interarrival_mean_h;
  j["gap_mean_h"] = gap_mean_h;
  j["preaccept_probability"] = preaccept_probability;
  j["preaccept_gateway"] = preaccept_gateway;
  j["kpi"] = {{"interest_rate", kpi.interest_rate},
              {"labor_cost_per_hour", kpi.labor_cost_per_hour},
              {"accept_activity", kpi.accept_activity},
              {"amount_attribute", kpi.amount_attribute},
              {"duration_attribute", kpi.duration_attribute}};
  json acts = json::object();
  for (const auto& [name_, a] : activities) {
    acts[name_] = {{"owner", a.owner == Owner::Agent ? "agent" : "environment"},
                   {"duration_mean_h", a.duration_mean_h},
                   {"next", a.next}};
  }
  j["activities"] = std::move(acts);
  json gws = json::object();
  for (const auto& [name_, g] : gateways) {
    json outcomes = json::array();
    for (const auto& o : g.outcomes) {
      json oj;
      if (!o.next.empty()) oj["next"] = o.next;
      if (g.kind != GatewaySpec::Kind::Multiple) oj["probability"] = o.probability;
      if (o.bias != 0.0) oj["bias"] = o.bias;
      if (o.amount_coef != 0.0) oj["amount_coef"] = o.amount_coef;
      if (!o.count_coefs.empty()) oj["count_coefs"] = o.count_coefs;
      if (!o.min_counts.empty()) oj["min_counts"] = o.min_counts;
      outcomes.push_back(std::move(oj));
    }
    json gj;
    gj["kind"] = g.kind == GatewaySpec::Kind::Chance
                     ? "chance"
                     : (g.kind == GatewaySpec::Kind::Single ? "single" : "multiple");
    gj["outcomes"] = std::move(outcomes);
    if (!g.fallthrough.empty()) gj["fallthrough"] = g.fallthrough;
    if (g.force_after_visits > 0) {
      gj["force_after_visits"] = g.force_after_visits;
      gj["forced_next"] = g.forced_next;
    }
    gws[name_] = std::move(gj);
  }
  j["gateways"] = std::move(gws);
  return j.dump(2);
}

}  // namespace mdpmine
