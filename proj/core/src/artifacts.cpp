#include "mdpmine/artifacts.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>

#include "json.hpp"

namespace mdpmine {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("missing artifact: " + path.string());
  return in;
}

json attr_to_json(const AttrValue& value) {
  if (const double* d = std::get_if<double>(&value)) return *d;
  if (const bool* b = std::get_if<bool>(&value)) return *b;
  return std::get<std::string>(value);
}

AttrValue attr_from_json(const json& j) {
  if (j.is_boolean()) return AttrValue{j.get<bool>()};
  if (j.is_number()) return AttrValue{j.get<double>()};
  return AttrValue{j.get<std::string>()};
}

json state_to_json(const State& s) {
  return json{{"a", s.last_activity}, {"c", s.cluster}};
}

State state_from_json(const json& j) {
  State s;
  s.last_activity = j.at("a").get<std::string>();
  s.cluster = j.at("c").get<std::int32_t>();
  return s;
}

void read_meta(const json& j, ArtifactMeta* meta) {
  if (meta == nullptr) return;
  meta->config_hash = j.value("config_hash", std::string{});
  meta->alphabet_hash = j.value("alphabet_hash", std::uint64_t{0});
}

}  // namespace

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void write_log_jsonl(const EventLog& log, const std::filesystem::path& path,
                     std::string_view config_hash) {
  auto out = open_out(path);
  json meta{{"meta", true},
            {"alphabet", log.alphabet},
            {"agent_activities", log.agent_activities},
            {"config_hash", std::string(config_hash)},
            {"alphabet_hash", alphabet_fingerprint(log.alphabet)}};
  out << meta.dump() << '\n';
  for (const auto& trace : log.traces) {
    json events = json::array();
    for (const auto& event : trace.events) {
      json payload = json::object();
      for (const auto& [key, value] : event.payload) payload[key] = attr_to_json(value);
      events.push_back(json{{"activity", event.activity},
                            {"t", event.timestamp_ms},
                            {"payload", std::move(payload)}});
    }
    json line{{"case_id", trace.case_id}, {"events", std::move(events)}};
    if (trace.reward.has_value()) line["reward"] = *trace.reward;
    out << line.dump() << '\n';
  }
}

EventLog read_log_jsonl(const std::filesystem::path& path, ArtifactMeta* meta) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw EmptyLogError("empty checkpoint: " + path.string());
  const json meta_json = json::parse(line);
  EventLog log;
  log.alphabet = meta_json.at("alphabet").get<std::vector<std::string>>();
  log.agent_activities = meta_json.at("agent_activities").get<std::set<std::string>>();
  read_meta(meta_json, meta);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    Trace trace;
    trace.case_id = j.at("case_id").get<std::string>();
    if (j.contains("reward")) trace.reward = j["reward"].get<double>();
    for (const auto& e : j.at("events")) {
      Event event;
      event.activity = e.at("activity").get<std::string>();
      event.timestamp_ms = e.at("t").get<std::int64_t>();
      event.owner = log.agent_activities.count(event.activity) > 0 ? Owner::Agent
                                                                   : Owner::Environment;
      for (const auto& [key, value] : e.at("payload").items()) {
        event.payload.emplace(key, attr_from_json(value));
      }
      trace.events.push_back(std::move(event));
    }
    log.traces.push_back(std::move(trace));
  }
  if (log.traces.empty()) throw EmptyLogError("checkpoint has no traces: " + path.string());
  return log;
}

namespace {

std::string iso_utc(std::int64_t timestamp_ms) {
  const std::time_t secs = timestamp_ms / 1000;
  const int ms = static_cast<int>(timestamp_ms % 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min,
                tm.tm_sec, ms);
  return buf;
}

std::string csv_quote(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string number_repr(double x) { return json(x).dump(); }

}  // namespace

void write_log_csv(const EventLog& log, const std::filesystem::path& path,
                   const CsvSchema& schema) {
  std::set<std::string> payload_columns;
  for (const auto& trace : log.traces) {
    for (const auto& event : trace.events) {
      for (const auto& [key, _] : event.payload) payload_columns.insert(key);
    }
  }
  auto out = open_out(path);
  out << schema.case_column << ',' << schema.activity_column << ','
      << schema.timestamp_column;
  for (const auto& column : payload_columns) out << ',' << csv_quote(column);
  out << '\n';
  for (const auto& trace : log.traces) {
    for (const auto& event : trace.events) {
      out << csv_quote(trace.case_id) << ',' << csv_quote(event.activity) << ','
          << iso_utc(event.timestamp_ms);
      for (const auto& column : payload_columns) {
        out << ',';
        auto it = event.payload.find(column);
        if (it == event.payload.end()) continue;
        if (const double* d = std::get_if<double>(&it->second)) {
          out << number_repr(*d);
        } else if (const bool* b = std::get_if<bool>(&it->second)) {
          out << (*b ? "true" : "false");
        } else {
          out << csv_quote(std::get<std::string>(it->second));
        }
      }
      out << '\n';
    }
  }
}

void write_stats(const NormalizationStats& stats, const std::filesystem::path& path,
                 std::string_view config_hash) {
  json j{{"f_max", stats.f_max},
         {"p_max", stats.p_max},
         {"r_min", stats.r_min},
         {"r_max", stats.r_max},
         {"constant_reward", stats.constant_reward},
         {"alphabet", stats.alphabet_order},
         {"alphabet_hash", alphabet_fingerprint(stats.alphabet_order)},
         {"config_hash", std::string(config_hash)}};
  open_out(path) << j.dump(2) << '\n';
}

NormalizationStats read_stats(const std::filesystem::path& path, ArtifactMeta* meta) {
  const json j = json::parse(open_in(path));
  NormalizationStats stats;
  stats.f_max = j.at("f_max").get<std::int64_t>();
  stats.p_max = j.at("p_max").get<std::int64_t>();
  stats.r_min = j.at("r_min").get<double>();
  stats.r_max = j.at("r_max").get<double>();
  stats.constant_reward = j.at("constant_reward").get<bool>();
  stats.alphabet_order = j.at("alphabet").get<std::vector<std::string>>();
  read_meta(j, meta);
  return stats;
}

void write_kmeans(const KMeansModel& model, std::uint64_t alphabet_hash,
                  const std::filesystem::path& path, std::string_view config_hash,
                  double silhouette_score) {
  json j{{"k", model.k},
         {"seed", model.seed},
         {"inertia", model.inertia},
         {"iterations", model.iterations},
         {"centroids", model.centroids},
         {"alphabet_hash", alphabet_hash},
         {"config_hash", std::string(config_hash)}};
  if (!std::isnan(silhouette_score)) j["silhouette"] = silhouette_score;
  open_out(path) << j.dump() << '\n';
}

KMeansModel read_kmeans(const std::filesystem::path& path, ArtifactMeta* meta) {
  const json j = json::parse(open_in(path));
  KMeansModel model;
  model.k = j.at("k").get<std::size_t>();
  model.seed = j.at("seed").get<std::uint64_t>();
  model.inertia = j.at("inertia").get<double>();
  model.iterations = j.value("iterations", std::size_t{0});
  model.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
  read_meta(j, meta);
  return model;
}

void write_mdp(const Mdp& mdp, const std::filesystem::path& path,
               std::string_view config_hash, std::size_t kmeans_k,
               std::uint64_t kmeans_seed) {
  json edges = json::array();
  for (const auto& edge : mdp.edges) {
    json e{{"source", state_to_json(edge.source)},
           {"action", edge.action},
           {"target", state_to_json(edge.target)},
           {"count", edge.count},
           {"p", edge.probability},
           {"r", edge.reward},
           {"samples", edge.reward_samples}};
    if (edge.pseudo) e["pseudo"] = true;
    edges.push_back(std::move(e));
  }
  json states = json::array();
  for (const auto& s : mdp.states) states.push_back(state_to_json(s));
  json terminals = json::array();
  for (const auto& s : mdp.terminals) terminals.push_back(state_to_json(s));
  json j{{"gamma", mdp.gamma},
         {"alphabet_hash", mdp.alphabet_hash},
         {"kmeans", {{"k", kmeans_k}, {"seed", kmeans_seed}}},
         {"attribution",
          mdp.attribution == RewardAttribution::Arrival ? "arrival" : "last_agent"},
         {"agent_actions", mdp.agent_actions},
         {"states", std::move(states)},
         {"terminals", std::move(terminals)},
         {"edges", std::move(edges)},
         {"config_hash", std::string(config_hash)}};
  open_out(path) << j.dump() << '\n';
}

Mdp read_mdp(const std::filesystem::path& path, ArtifactMeta* meta) {
  const json j = json::parse(open_in(path));
  Mdp mdp;
  mdp.gamma = j.at("gamma").get<double>();
  mdp.alphabet_hash = j.at("alphabet_hash").get<std::uint64_t>();
  mdp.attribution = j.at("attribution").get<std::string>() == "last_agent"
                        ? RewardAttribution::LastAgent
                        : RewardAttribution::Arrival;
  mdp.agent_actions = j.at("agent_actions").get<std::set<std::string>>();
  for (const auto& s : j.at("states")) mdp.states.push_back(state_from_json(s));
  for (const auto& s : j.at("terminals")) mdp.terminals.insert(state_from_json(s));
  for (const auto& e : j.at("edges")) {
    Edge edge;
    edge.source = state_from_json(e.at("source"));
    edge.action = e.at("action").get<std::string>();
    edge.target = state_from_json(e.at("target"));
    edge.count = e.at("count").get<std::int64_t>();
    edge.probability = e.at("p").get<double>();
    edge.reward = e.at("r").get<double>();
    edge.reward_samples = e.at("samples").get<std::int64_t>();
    edge.pseudo = e.value("pseudo", false);
    mdp.occurrence[{edge.source, edge.action}] += edge.count;
    mdp.edges.push_back(std::move(edge));
  }
  std::sort(mdp.states.begin(), mdp.states.end());
  read_meta(j, meta);
  return mdp;
}

void write_policy(const Policy& policy, const QTable& qtable, const Mdp& mdp,
                  const std::filesystem::path& path, std::string_view config_hash) {
  json actions = json::array();
  for (const auto& [state, action] : policy.action_of) {
    const std::int64_t n = mdp.occurrences(state, action);
    const double q = qtable.value(state, action);
    actions.push_back(json{{"state", state_to_json(state)},
                           {"state_key", state.key()},
                           {"action", action},
                           {"q", q},
                           {"q_scaled", scaled_q(q, policy.scaling, n)},
                           {"n", n}});
  }
  json qvalues = json::array();
  for (const auto& [key, value] : qtable.values) {
    qvalues.push_back(json{{"state", state_to_json(key.first)},
                           {"action", key.second},
                           {"q", value},
                           {"visits", qtable.visits(key.first, key.second)}});
  }
  json j{{"scaling",
          {{"kind", policy.scaling.name()},
           {"n_t", policy.scaling.n_t},
           {"lambda", policy.scaling.lambda},
           {"n_min", policy.scaling.n_min},
           {"n_max", policy.scaling.n_max}}},
         {"provenance",
          {{"algorithm", policy.provenance.algorithm},
           {"episodes", policy.provenance.episodes},
           {"seed", policy.provenance.seed},
           {"gamma", policy.provenance.gamma},
           {"epsilon_start", policy.provenance.epsilon_start},
           {"epsilon_end", policy.provenance.epsilon_end}}},
         {"actions", std::move(actions)},
         {"q_table", std::move(qvalues)},
         {"gamma", qtable.gamma},
         {"alphabet_hash", mdp.alphabet_hash},
         {"config_hash", std::string(config_hash)}};
  open_out(path) << j.dump() << '\n';
}

std::pair<Policy, QTable> read_policy(const std::filesystem::path& path,
                                      ArtifactMeta* meta) {
  const json j = json::parse(open_in(path));
  Policy policy;
  const auto& s = j.at("scaling");
  const std::string kind = s.at("kind").get<std::string>();
  if (kind == "h0") {
    policy.scaling.kind = ScalingFn::Kind::H0;
  } else if (kind == "linear") {
    policy.scaling.kind = ScalingFn::Kind::Linear;
  } else if (kind == "step") {
    policy.scaling.kind = ScalingFn::Kind::Step;
  } else if (kind == "smooth") {
    policy.scaling.kind = ScalingFn::Kind::Smooth;
  } else {
    throw Error("unknown scaling kind '" + kind + "' in " + path.string());
  }
  policy.scaling.n_t = s.at("n_t").get<std::int64_t>();
  policy.scaling.lambda = s.at("lambda").get<double>();
  policy.scaling.n_min = s.at("n_min").get<std::int64_t>();
  policy.scaling.n_max = s.at("n_max").get<std::int64_t>();
  const auto& p = j.at("provenance");
  policy.provenance.algorithm = p.at("algorithm").get<std::string>();
  policy.provenance.episodes = p.at("episodes").get<std::size_t>();
  policy.provenance.seed = p.at("seed").get<std::uint64_t>();
  policy.provenance.gamma = p.at("gamma").get<double>();
  policy.provenance.epsilon_start = p.at("epsilon_start").get<double>();
  policy.provenance.epsilon_end = p.at("epsilon_end").get<double>();
  for (const auto& a : j.at("actions")) {
    policy.action_of[state_from_json(a.at("state"))] = a.at("action").get<std::string>();
  }
  QTable qtable;
  qtable.gamma = j.at("gamma").get<double>();
  for (const auto& q : j.at("q_table")) {
    const State state = state_from_json(q.at("state"));
    const std::string action = q.at("action").get<std::string>();
    qtable.values[{state, action}] = q.at("q").get<double>();
    qtable.visit_counts[{state, action}] = q.at("visits").get<std::int64_t>();
  }
  read_meta(j, meta);
  return {std::move(policy), std::move(qtable)};
}

}  // namespace mdpmine
