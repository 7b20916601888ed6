#include "mdpmine/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mdpmine {

namespace {

using nlohmann::json;

constexpr const char* kEnrichedLog = "enriched_log.jsonl";
constexpr const char* kTrainLog = "train_log.jsonl";
constexpr const char* kTestLog = "test_log.jsonl";
constexpr const char* kStats = "stats.json";
constexpr const char* kKmeans = "kmeans.json";
constexpr const char* kMdp = "mdp.json";
constexpr const char* kMdpDot = "mdp.dot";

std::string policy_file(const std::string& name) { return "policy_" + name + ".json"; }

json parse_config_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL + salt * 0xbf58476d1ce4e5b9ULL);
  x ^= x >> 30;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 27;
  return x;
}

PipelineConfig config_from_json(const json& j,
                                std::optional<std::uint64_t> seed_override) {
  PipelineConfig config;
  try {
    const auto& paths = j.at("paths");
    config.log_path = paths.at("log").get<std::string>();
    config.artifacts_dir = paths.value("artifacts", std::string{"artifacts"});
    config.reports_dir = paths.value("reports", std::string{"reports"});

    if (j.contains("csv")) {
      const auto& c = j["csv"];
      config.csv.case_column = c.value("case_column", config.csv.case_column);
      config.csv.activity_column = c.value("activity_column", config.csv.activity_column);
      config.csv.timestamp_column =
          c.value("timestamp_column", config.csv.timestamp_column);
      config.csv.timestamp_format =
          c.value("timestamp_format", config.csv.timestamp_format);
    }
    if (j.contains("kpi")) {
      const auto& k = j["kpi"];
      const std::string kind = k.value("kind", std::string{"loan_profit"});
      if (kind == "loan_profit") {
        config.kpi.kind = KpiSpec::Kind::LoanProfit;
      } else if (kind == "custom") {
        config.kpi.kind = KpiSpec::Kind::Custom;
        config.kpi.custom_attribute = k.at("custom_attribute").get<std::string>();
      } else {
        throw ConfigError("kpi.kind must be loan_profit or custom, got '" + kind + "'");
      }
      config.kpi.interest_rate = k.value("interest_rate", config.kpi.interest_rate);
      config.kpi.labor_cost_per_hour =
          k.value("labor_cost_per_hour", config.kpi.labor_cost_per_hour);
      config.kpi.accept_activity = k.value("accept_activity", config.kpi.accept_activity);
      config.kpi.amount_attribute =
          k.value("amount_attribute", config.kpi.amount_attribute);
      config.kpi.duration_attribute =
          k.value("duration_attribute", config.kpi.duration_attribute);
      config.kpi.idle_cap_hours = k.value("idle_cap_hours", config.kpi.idle_cap_hours);
      config.kpi.count_agent_work_only =
          k.value("count_agent_work_only", config.kpi.count_agent_work_only);
      if (config.kpi.interest_rate < 0 || config.kpi.labor_cost_per_hour < 0) {
        throw ConfigError("kpi rates must be nonnegative");
      }
    }
    config.agent_activities =
        j.at("agent_activities").get<std::vector<std::string>>();
    if (config.agent_activities.empty()) {
      throw ConfigError("agent_activities must not be empty");
    }

    config.clusters = j.value("clusters", config.clusters);
    config.cluster_seed = j.value("cluster_seed", config.cluster_seed);
    config.cluster_max_iter = j.value("cluster_max_iter", config.cluster_max_iter);
    config.cluster_tol = j.value("cluster_tol", config.cluster_tol);
    config.cluster_dedup = j.value("cluster_dedup", config.cluster_dedup);

    if (j.contains("scalings")) {
      for (const auto& s : j["scalings"]) {
        ScalingSpec spec;
        spec.kind = s.at("kind").get<std::string>();
        if (spec.kind != "h0" && spec.kind != "linear" && spec.kind != "step" &&
            spec.kind != "smooth") {
          throw ConfigError("scalings[].kind must be h0|linear|step|smooth, got '" +
                            spec.kind + "'");
        }
        spec.n_t = s.value("n_t", spec.n_t);
        spec.lambda = s.value("lambda", spec.lambda);
        config.scalings.push_back(std::move(spec));
      }
    }
    if (config.scalings.empty()) {
      config.scalings = {{"h0"}, {"linear"}, {"step", 50, 50.0}, {"smooth", 50, 50.0}};
    }

    if (j.contains("train")) {
      const auto& t = j["train"];
      config.train.episodes = t.value("episodes", config.train.episodes);
      config.train.gamma = t.value("gamma", config.train.gamma);
      config.train.epsilon_start = t.value("epsilon_start", config.train.epsilon_start);
      config.train.epsilon_end = t.value("epsilon_end", config.train.epsilon_end);
      config.train.epsilon_decay = t.value("epsilon_decay", config.train.epsilon_decay);
      config.train.alpha = t.value("alpha", config.train.alpha);
      config.train.seed = t.value("seed", config.train.seed);
      config.train.max_episode_len =
          t.value("max_episode_len", config.train.max_episode_len);
      if (config.train.gamma < 0.0 || config.train.gamma > 1.0) {
        throw ConfigError("train.gamma must be in [0,1]");
      }
      if (config.train.alpha <= 0.0 || config.train.alpha > 1.0) {
        throw ConfigError("train.alpha must be in (0,1]");
      }
    }
    config.gamma = config.train.gamma;
    config.attribution = j.value("reward_attribution", std::string{"arrival"}) ==
                                 std::string{"last_agent"}
                             ? RewardAttribution::LastAgent
                             : RewardAttribution::Arrival;

    if (j.contains("split")) {
      const auto& s = j["split"];
      config.split.train_fraction = s.value("train_fraction", config.split.train_fraction);
      config.split.seed = s.value("seed", config.split.seed);
      config.split.exclude_no_decision_test_traces =
          s.value("exclude_no_decision_test_traces",
                  config.split.exclude_no_decision_test_traces);
      if (config.split.train_fraction <= 0.0 || config.split.train_fraction >= 1.0) {
        throw ConfigError("split.train_fraction must be in (0,1)");
      }
    }
    if (j.contains("sim")) {
      const auto& s = j["sim"];
      if (s.contains("preset")) config.sim_preset = s["preset"].get<std::string>();
      config.sim_traces = s.value("n_traces", config.sim_traces);
      config.sim_seed = s.value("seed", config.sim_seed);
      config.sim_options.stall_limit =
          s.value("stall_limit", config.sim_options.stall_limit);
      config.sim_options.max_events = s.value("max_events", config.sim_options.max_events);
      config.sim_options.fallback_unknown_state = s.value(
          "fallback_unknown_state", config.sim_options.fallback_unknown_state);
    }
    if (j.contains("generate")) {
      const auto& g = j["generate"];
      config.generate_traces = g.value("n_traces", config.generate_traces);
      config.generate_seed = g.value("seed", config.generate_seed);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }

  if (seed_override.has_value()) {
    config.cluster_seed = mix_seed(*seed_override, 1);
    config.train.seed = mix_seed(*seed_override, 2);
    config.split.seed = mix_seed(*seed_override, 3);
    config.sim_seed = mix_seed(*seed_override, 4);
    config.generate_seed = mix_seed(*seed_override, 5);
  }

  json canonical = j;
  if (seed_override.has_value()) canonical["seed_override"] = *seed_override;
  config.config_hash = hash_hex(fnv1a(canonical.dump()));
  return config;
}

void check_meta(const ArtifactMeta& meta, const PipelineConfig& config,
                const std::filesystem::path& path) {
  if (meta.config_hash != config.config_hash) {
    throw MissingArtifactError("artifact " + path.string() +
                               " was produced by a different config (hash " +
                               meta.config_hash + ", expected " + config.config_hash +
                               "); re-run train");
  }
}

ScalingFn resolve_scaling(const ScalingSpec& spec, const Mdp& mdp) {
  if (spec.kind == "h0") return ScalingFn::h0();
  if (spec.kind == "linear") return ScalingFn::linear_fitted(mdp);
  if (spec.kind == "step") return ScalingFn::step(spec.n_t);
  if (spec.kind == "smooth") return ScalingFn::smooth(spec.lambda);
  throw ConfigError("unknown scaling kind '" + spec.kind + "'");
}

std::vector<PrefixVector> training_vectors(const EventLog& train_log,
                                           const NormalizationStats& stats) {
  std::vector<PrefixVector> vectors;
  for (const auto& trace : train_log.traces) {
    for (std::size_t k = 1; k <= trace.events.size(); ++k) {
      vectors.push_back(encode(trace, k, stats));
    }
  }
  return vectors;
}

json state_json(const State& s) {
  return json{{"a", s.last_activity}, {"c", s.cluster}, {"key", s.key()}};
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text,
                                              std::optional<std::uint64_t> seed_override) {
  return config_from_json(parse_config_json(text), seed_override);
}

PipelineConfig PipelineConfig::from_json_file(const std::filesystem::path& path,
                                              std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), seed_override);
}

PolicyArtifacts LoadedArtifacts::view(std::size_t policy_index) const {
  PolicyArtifacts view;
  view.stats = &stats;
  view.kmeans = &kmeans;
  view.mdp = &mdp;
  view.policy = &policies.at(policy_index);
  view.qtable = &qtables.at(policy_index);
  return view;
}

std::filesystem::path cmd_generate(const PipelineConfig& config) {
  if (config.sim_preset.empty()) {
    throw ConfigError("generate: sim.preset is not set");
  }
  const ProcessModel model = ProcessModel::from_json_file(config.sim_preset);
  const EventLog log = generate_log(model, config.generate_traces, config.generate_seed);
  write_log_csv(log, config.log_path, config.csv);
  return config.log_path;
}

void cmd_train(const PipelineConfig& config) {
  std::set<std::string> agents(config.agent_activities.begin(),
                               config.agent_activities.end());
  EventLog log = parse_csv(config.log_path, config.csv, agents);
  log = enrich(log, config.kpi);
  write_log_jsonl(log, config.artifact(kEnrichedLog), config.config_hash);

  auto [train_log, test_log] = split(log, config.split);
  write_log_jsonl(train_log, config.artifact(kTrainLog), config.config_hash);
  write_log_jsonl(test_log, config.artifact(kTestLog), config.config_hash);

  const NormalizationStats stats = fit_stats(train_log);
  write_stats(stats, config.artifact(kStats), config.config_hash);

  KMeansOptions kopts;
  kopts.k = config.clusters;
  kopts.seed = config.cluster_seed;
  kopts.max_iter = config.cluster_max_iter;
  kopts.tol = config.cluster_tol;
  kopts.dedup = config.cluster_dedup;
  const auto vectors = training_vectors(train_log, stats);
  const KMeansModel kmeans = kmeans_fit(vectors, kopts);
  double silhouette_score = std::numeric_limits<double>::quiet_NaN();
  if (config.clusters >= 2) {
    silhouette_score = silhouette(vectors, kmeans, 2000, config.cluster_seed);
  }
  write_kmeans(kmeans, alphabet_fingerprint(stats.alphabet_order),
               config.artifact(kKmeans), config.config_hash, silhouette_score);

  MdpBuildOptions mopts;
  mopts.gamma = config.gamma;
  mopts.attribution = config.attribution;
  const Mdp mdp = build_mdp(train_log, kmeans, stats, mopts);
  const ValidationReport report = validate(mdp);
  if (!report.ok()) {
    std::string what = "train: built MDP failed validation:";
    for (const auto& violation : report.violations) what += "\n  " + violation;
    throw Error(what);
  }
  write_mdp(mdp, config.artifact(kMdp), config.config_hash, kmeans.k, kmeans.seed);
  {
    std::ofstream dot(config.artifact(kMdpDot));
    dot << to_dot(mdp);
  }

  for (const auto& spec : config.scalings) {
    const ScalingFn scaling = resolve_scaling(spec, mdp);
    auto [policy, qtable] = mc_policy_iteration(mdp, scaling, config.train);
    write_policy(policy, qtable, mdp, config.artifact(policy_file(spec.kind)),
                 config.config_hash);
  }
}

LoadedArtifacts load_artifacts(const PipelineConfig& config) {
  LoadedArtifacts loaded;
  ArtifactMeta meta;
  loaded.stats = read_stats(config.artifact(kStats), &meta);
  check_meta(meta, config, config.artifact(kStats));
  const std::uint64_t expected_hash = meta.alphabet_hash;

  loaded.kmeans = read_kmeans(config.artifact(kKmeans), &meta);
  check_meta(meta, config, config.artifact(kKmeans));
  if (meta.alphabet_hash != expected_hash) {
    throw AlphabetMismatchError("kmeans.json alphabet differs from stats.json");
  }
  loaded.mdp = read_mdp(config.artifact(kMdp), &meta);
  check_meta(meta, config, config.artifact(kMdp));
  if (meta.alphabet_hash != expected_hash) {
    throw AlphabetMismatchError("mdp.json alphabet differs from stats.json");
  }
  for (const auto& spec : config.scalings) {
    ArtifactMeta pmeta;
    auto [policy, qtable] =
        read_policy(config.artifact(policy_file(spec.kind)), &pmeta);
    check_meta(pmeta, config, config.artifact(policy_file(spec.kind)));
    if (pmeta.alphabet_hash != expected_hash) {
      throw AlphabetMismatchError(policy_file(spec.kind) +
                                  " alphabet differs from stats.json");
    }
    loaded.policy_names.push_back(spec.kind);
    loaded.policies.push_back(std::move(policy));
    loaded.qtables.push_back(std::move(qtable));
  }
  return loaded;
}

std::string cmd_recommend(const PipelineConfig& config,
                          const std::filesystem::path& prefix_file,
                          const std::string& policy_name,
                          bool fallback_unknown_state) {
  const LoadedArtifacts loaded = load_artifacts(config);
  auto it = std::find(loaded.policy_names.begin(), loaded.policy_names.end(), policy_name);
  if (it == loaded.policy_names.end()) {
    throw ConfigError("recommend: policy '" + policy_name + "' is not configured");
  }
  const std::size_t policy_index =
      static_cast<std::size_t>(it - loaded.policy_names.begin());
  const PolicyArtifacts artifacts = loaded.view(policy_index);

  std::ifstream in(prefix_file);
  if (!in) throw MissingArtifactError("cannot open prefix file: " + prefix_file.string());
  json input;
  try {
    in >> input;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("prefix file is not valid JSON: ") + e.what());
  }
  std::vector<std::vector<std::string>> prefixes;
  if (input.contains("activities")) {
    prefixes.push_back(input["activities"].get<std::vector<std::string>>());
  } else if (input.contains("prefixes")) {
    prefixes = input["prefixes"].get<std::vector<std::vector<std::string>>>();
  } else {
    throw ConfigError("prefix file needs an 'activities' or 'prefixes' field");
  }

  RecommendOptions opts;
  opts.fallback_unknown_state = fallback_unknown_state;
  json results = json::array();
  for (const auto& prefix : prefixes) {
    json entry;
    entry["prefix"] = prefix;
    try {
      const Recommendation rec = recommend(prefix, artifacts, opts);
      entry["status"] = "ok";
      entry["action"] = rec.action;
      entry["q"] = rec.q_value;
      entry["q_scaled"] = rec.scaled_q;
      entry["support"] = rec.support;
      entry["state"] = state_json(rec.state);
      entry["fallback_used"] = rec.fallback_used;
      json alts = json::array();
      for (const auto& alt : rec.alternatives) {
        alts.push_back(json{{"action", alt.action},
                            {"q", alt.q_value},
                            {"q_scaled", alt.scaled_q},
                            {"support", alt.support}});
      }
      entry["alternatives"] = std::move(alts);
    } catch (const UnknownStateError& e) {
      entry["status"] = "unknown_state";
      entry["detail"] = e.what();
    } catch (const NotADecisionPointError& e) {
      entry["status"] = "wait_for_environment";
      entry["detail"] = e.what();
    } catch (const UnknownActivityError& e) {
      entry["status"] = "unknown_activity";
      entry["detail"] = e.what();
    }
    results.push_back(std::move(entry));
  }
  json out{{"policy", policy_name}, {"recommendations", std::move(results)}};
  return out.dump(2) + "\n";
}

std::filesystem::path cmd_eval_sim(const PipelineConfig& config) {
  if (config.sim_preset.empty()) {
    throw ConfigError("eval-sim: sim.preset is not set");
  }
  const LoadedArtifacts loaded = load_artifacts(config);
  const ProcessModel model = ProcessModel::from_json_file(config.sim_preset);

  ArtifactMeta meta;
  const EventLog baseline_log = read_log_jsonl(config.artifact(kEnrichedLog), &meta);
  check_meta(meta, config, config.artifact(kEnrichedLog));
  std::vector<double> baseline;
  baseline.reserve(baseline_log.traces.size());
  for (const auto& trace : baseline_log.traces) baseline.push_back(*trace.reward);

  std::map<std::string, std::vector<double>> samples;
  json per_policy = json::array();
  for (std::size_t i = 0; i < loaded.policies.size(); ++i) {
    PolicySimResult result =
        simulate_with_policy(model, loaded.view(i), config.sim_traces,
                             mix_seed(config.sim_seed, i), config.sim_options);
    result.policy_name = loaded.policy_names[i];
    per_policy.push_back(json{{"policy", result.policy_name},
                              {"avg_reward", result.mean()},
                              {"stddev", result.stddev()},
                              {"stderr", result.stderror()},
                              {"n_traces", result.rewards.size()},
                              {"exceptions", result.exceptions},
                              {"stalls", result.stalls}});
    samples.emplace(result.policy_name, std::move(result.rewards));
  }

  const auto pairwise = compare_policies(samples);
  json pairwise_json = json::array();
  for (const auto& cmp : pairwise) {
    pairwise_json.push_back(json{{"policy_a", cmp.policy_a},
                                 {"policy_b", cmp.policy_b},
                                 {"mean_diff", cmp.mean_diff},
                                 {"p_value", cmp.p_value},
                                 {"significant", cmp.significant},
                                 {"degenerate", cmp.degenerate}});
  }

  json report{{"config_hash", config.config_hash},
              {"model", model.name},
              {"n_traces", config.sim_traces},
              {"log_baseline",
               {{"avg_reward", sample_mean(baseline)},
                {"stddev", std::sqrt(sample_variance(baseline))},
                {"stderr", std::sqrt(sample_variance(baseline) /
                                     static_cast<double>(baseline.size()))},
                {"n_traces", baseline.size()}}},
              {"policies", std::move(per_policy)},
              {"pairwise", std::move(pairwise_json)}};

  const auto report_path = config.report("sim_report.json");
  std::filesystem::create_directories(config.reports_dir);
  std::ofstream(report_path) << report.dump(2) << '\n';

  std::ofstream csv(config.report("sim_pairwise.csv"));
  csv << "policy_a,policy_b,mean_diff,p_value,significant\n";
  for (const auto& cmp : pairwise) {
    if (cmp.policy_a >= cmp.policy_b) continue;  // upper triangle, table layout
    csv << cmp.policy_a << ',' << cmp.policy_b << ',' << json(cmp.mean_diff).dump()
        << ',' << json(cmp.p_value).dump() << ',' << (cmp.significant ? 1 : 0) << '\n';
  }
  return report_path;
}

std::filesystem::path cmd_eval_log(const PipelineConfig& config) {
  const LoadedArtifacts loaded = load_artifacts(config);
  ArtifactMeta meta;
  const EventLog test_log = read_log_jsonl(config.artifact(kTestLog), &meta);
  check_meta(meta, config, config.artifact(kTestLog));

  json policies = json::array();
  std::filesystem::create_directories(config.reports_dir);
  std::ofstream optimal_csv(config.report("optimal_traces.csv"));
  optimal_csv << "policy,compliant_count,compliant_mean,log_mean,log_size\n";
  std::ofstream gain_csv(config.report("prefix_gain.csv"));
  gain_csv << "policy,prefix_length,mean_gain,mean_estimate,mean_ground_truth,"
              "estimated_count,prefix_count\n";

  for (std::size_t i = 0; i < loaded.policies.size(); ++i) {
    const PolicyArtifacts artifacts = loaded.view(i);
    const OptimalTraceSection optimal = optimal_trace_analysis(test_log, artifacts);
    const PrefixGainSection gain = prefix_gain_analysis(test_log, artifacts);

    json gain_rows = json::array();
    for (const auto& row : gain.per_length) {
      gain_rows.push_back(json{{"k", row.k},
                               {"prefix_count", row.prefix_count},
                               {"estimated_count", row.estimated_count},
                               {"mean_estimate", row.mean_estimate},
                               {"mean_ground_truth", row.mean_ground_truth},
                               {"mean_gain", row.mean_gain},
                               {"no_estimate", row.no_estimate}});
      gain_csv << loaded.policy_names[i] << ',' << row.k << ','
               << json(row.mean_gain).dump() << ',' << json(row.mean_estimate).dump()
               << ',' << json(row.mean_ground_truth).dump() << ','
               << row.estimated_count << ',' << row.prefix_count << '\n';
    }
    policies.push_back(json{{"policy", loaded.policy_names[i]},
                            {"optimal_traces",
                             {{"compliant_count", optimal.compliant_count},
                              {"compliant_mean", optimal.compliant_mean},
                              {"no_data", optimal.no_data},
                              {"log_mean", optimal.log_mean},
                              {"log_size", optimal.log_size}}},
                            {"prefix_gain", std::move(gain_rows)}});
    optimal_csv << loaded.policy_names[i] << ',' << optimal.compliant_count << ','
                << json(optimal.compliant_mean).dump() << ','
                << json(optimal.log_mean).dump() << ',' << optimal.log_size << '\n';
  }

  json report{{"config_hash", config.config_hash},
              {"test_log_size", test_log.traces.size()},
              {"policies", std::move(policies)}};
  const auto report_path = config.report("eval_log_report.json");
  std::ofstream(report_path) << report.dump(2) << '\n';
  return report_path;
}

}  // namespace mdpmine
