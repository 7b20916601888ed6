#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdpmine/artifacts.hpp"
#include "mdpmine/evaluation.hpp"
#include "mdpmine/simgen.hpp"

namespace mdpmine {

/// One scaling variant to train; resolved against the MDP at train time.
struct ScalingSpec {
  std::string kind = "h0";  ///< h0 | linear | step | smooth
  std::int64_t n_t = 50;
  double lambda = 50.0;
};

struct PipelineConfig {
  std::filesystem::path log_path;
  std::filesystem::path artifacts_dir = "artifacts";
  std::filesystem::path reports_dir = "reports";

  CsvSchema csv;
  KpiSpec kpi;
  std::vector<std::string> agent_activities;

  std::size_t clusters = 100;
  std::uint64_t cluster_seed = 17;
  std::size_t cluster_max_iter = 300;
  double cluster_tol = 1e-4;
  bool cluster_dedup = false;

  std::vector<ScalingSpec> scalings;  ///< defaults to all four variants
  TrainConfig train;
  SplitOptions split{0.8, 13, true};

  double gamma = 0.99;
  RewardAttribution attribution = RewardAttribution::Arrival;

  std::filesystem::path sim_preset;
  std::size_t sim_traces = 5000;
  std::uint64_t sim_seed = 99;
  SimulateOptions sim_options;

  std::size_t generate_traces = 2000;
  std::uint64_t generate_seed = 7;

  std::string config_hash;  ///< canonical-JSON hash, stamped into artifacts

  /// Loads and validates a config JSON; ConfigError names the offending
  /// field. seed_override, when set, replaces every seed in the run.
  static PipelineConfig from_json_file(const std::filesystem::path& path,
                                       std::optional<std::uint64_t> seed_override = {});
  static PipelineConfig from_json_text(const std::string& text,
                                       std::optional<std::uint64_t> seed_override = {});

  std::filesystem::path artifact(const std::string& name) const {
    return artifacts_dir / name;
  }
  std::filesystem::path report(const std::string& name) const {
    return reports_dir / name;
  }
};

/// Loaded train-time artifacts plus the borrowed-pointer view the
/// recommender consumes.
struct LoadedArtifacts {
  NormalizationStats stats;
  KMeansModel kmeans;
  Mdp mdp;
  std::vector<std::string> policy_names;
  std::vector<Policy> policies;
  std::vector<QTable> qtables;

  PolicyArtifacts view(std::size_t policy_index) const;
};

/// generate: sample a synthetic log from the configured preset and write it
/// as CSV to log_path. Returns the written path.
std::filesystem::path cmd_generate(const PipelineConfig& config);

/// train: parse -> enrich -> split -> fit stats -> fit k-means -> build MDP
/// -> train one policy per scaling spec. Writes all artifacts.
void cmd_train(const PipelineConfig& config);

/// recommend: JSON in ({"activities": [...]} or {"prefixes": [[...], ...]}),
/// JSON out (serialized recommendation per prefix).
std::string cmd_recommend(const PipelineConfig& config,
                          const std::filesystem::path& prefix_file,
                          const std::string& policy_name = "smooth",
                          bool fallback_unknown_state = false);

/// eval-sim: run the policy-in-the-loop simulation for every trained policy
/// and the pairwise significance table. Returns the report path.
std::filesystem::path cmd_eval_sim(const PipelineConfig& config);

/// eval-log: optimal-trace and prefix-gain analyses on the held-out test
/// log. Returns the report path.
std::filesystem::path cmd_eval_log(const PipelineConfig& config);

/// Loads artifacts written by cmd_train, checking config and alphabet
/// hashes.
LoadedArtifacts load_artifacts(const PipelineConfig& config);

}  // namespace mdpmine
