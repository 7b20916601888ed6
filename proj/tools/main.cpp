#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mdpmine/pipeline.hpp"

namespace {

// Exit codes, also documented in the README:
//   0 ok, 2 config, 3 missing artifact, 4 alphabet/encoding mismatch,
//   5 input data, 6 simulation model, 7 recommendation query, 1 anything else.
int exit_code_for(const std::exception& e) {
  using namespace mdpmine;
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const MissingArtifactError*>(&e)) return 3;
  if (dynamic_cast<const AlphabetMismatchError*>(&e)) return 4;
  if (dynamic_cast<const EncodingMismatchError*>(&e)) return 4;
  if (dynamic_cast<const MissingColumnError*>(&e)) return 5;
  if (dynamic_cast<const UnparseableTimestampError*>(&e)) return 5;
  if (dynamic_cast<const EmptyLogError*>(&e)) return 5;
  if (dynamic_cast<const MissingAttributeError*>(&e)) return 5;
  if (dynamic_cast<const DegeneratePartitionError*>(&e)) return 5;
  if (dynamic_cast<const InvalidModelError*>(&e)) return 6;
  if (dynamic_cast<const IncompatibleAlphabetError*>(&e)) return 6;
  if (dynamic_cast<const UnknownStateError*>(&e)) return 7;
  if (dynamic_cast<const UnknownActivityError*>(&e)) return 7;
  if (dynamic_cast<const NotADecisionPointError*>(&e)) return 7;
  return 1;
}

mdpmine::PipelineConfig load_config(const std::string& config_path,
                                    std::optional<std::uint64_t> seed_override) {
  std::string path = config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("MDPMINE_CONFIG")) path = env;
  }
  if (path.empty()) {
    throw mdpmine::ConfigError("no config given (use --config or MDPMINE_CONFIG)");
  }
  auto config = mdpmine::PipelineConfig::from_json_file(path, seed_override);
  if (const char* root = std::getenv("MDPMINE_ARTIFACTS")) {
    config.artifacts_dir = std::filesystem::path(root) / config.artifacts_dir;
    config.reports_dir = std::filesystem::path(root) / config.reports_dir;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Next-activity policy mining: learn an MDP from an event log, "
               "train occurrence-scaled policies and evaluate them"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  app.add_option("--config", config_path, "pipeline config JSON")
      ->envname("MDPMINE_CONFIG");
  app.add_option("--seed-override", seed_override,
                 "replace every seed in the config for this run");

  auto* generate = app.add_subcommand("generate", "sample a synthetic log from the preset");
  auto* train = app.add_subcommand("train", "run the full training pipeline");
  auto* recommend_cmd =
      app.add_subcommand("recommend", "next-activity recommendation for prefixes");
  auto* eval_sim = app.add_subcommand("eval-sim", "policy-in-the-loop simulation evaluation");
  auto* eval_log = app.add_subcommand("eval-log", "test-log analyses");
  for (auto* sub : {generate, train, recommend_cmd, eval_sim, eval_log}) {
    sub->fallthrough();  // --config and --seed-override may follow the subcommand
  }

  std::string prefix_file;
  std::string policy_name = "smooth";
  std::string out_path;
  bool fallback = false;
  recommend_cmd->add_option("prefixes", prefix_file, "JSON file with the ongoing prefix(es)")
      ->required();
  recommend_cmd->add_option("--policy", policy_name, "trained policy to query");
  recommend_cmd->add_flag("--fallback", fallback,
                          "fall back to the nearest known state on unseen prefixes");
  recommend_cmd->add_option("--out", out_path, "write the JSON response here");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = load_config(config_path, seed_override);
    if (generate->parsed()) {
      const auto path = mdpmine::cmd_generate(config);
      std::cout << "wrote " << path.string() << "\n";
    } else if (train->parsed()) {
      mdpmine::cmd_train(config);
      std::cout << "artifacts in " << config.artifacts_dir.string() << "\n";
    } else if (recommend_cmd->parsed()) {
      const std::string response =
          mdpmine::cmd_recommend(config, prefix_file, policy_name, fallback);
      if (out_path.empty()) {
        std::cout << response;
      } else {
        std::ofstream(out_path) << response;
        std::cout << "wrote " << out_path << "\n";
      }
    } else if (eval_sim->parsed()) {
      const auto path = mdpmine::cmd_eval_sim(config);
      std::cout << "wrote " << path.string() << "\n";
    } else if (eval_log->parsed()) {
      const auto path = mdpmine::cmd_eval_log(config);
      std::cout << "wrote " << path.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
