#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <utility>

#include "mdpmine/eventlog.hpp"
#include "mdpmine/kmeans.hpp"
#include "mdpmine/mdp.hpp"
#include "mdpmine/rl.hpp"

namespace mdpmine {

std::uint64_t fnv1a(std::string_view text);
std::string hash_hex(std::uint64_t h);

/// Metadata every artifact file carries to guard cross-run mixing.
struct ArtifactMeta {
  std::string config_hash;
  std::uint64_t alphabet_hash = 0;
};

/// Line-delimited JSON checkpoint: a meta line followed by one trace per
/// line.
void write_log_jsonl(const EventLog& log, const std::filesystem::path& path,
                     std::string_view config_hash);
EventLog read_log_jsonl(const std::filesystem::path& path, ArtifactMeta* meta = nullptr);

/// CSV in the schema parse_csv() consumes; payload attributes become extra
/// columns. Timestamps are ISO-8601 UTC with milliseconds.
void write_log_csv(const EventLog& log, const std::filesystem::path& path,
                   const CsvSchema& schema = {});

void write_stats(const NormalizationStats& stats, const std::filesystem::path& path,
                 std::string_view config_hash);
NormalizationStats read_stats(const std::filesystem::path& path,
                              ArtifactMeta* meta = nullptr);

/// `silhouette` is optional diagnostic metadata (NaN omits it) kept in the
/// artifact to support re-selecting the cluster count.
void write_kmeans(const KMeansModel& model, std::uint64_t alphabet_hash,
                  const std::filesystem::path& path, std::string_view config_hash,
                  double silhouette_score = std::numeric_limits<double>::quiet_NaN());
KMeansModel read_kmeans(const std::filesystem::path& path, ArtifactMeta* meta = nullptr);

/// kmeans_k/kmeans_seed record which clustering produced the states.
void write_mdp(const Mdp& mdp, const std::filesystem::path& path,
               std::string_view config_hash, std::size_t kmeans_k = 0,
               std::uint64_t kmeans_seed = 0);
Mdp read_mdp(const std::filesystem::path& path, ArtifactMeta* meta = nullptr);

void write_policy(const Policy& policy, const QTable& qtable, const Mdp& mdp,
                  const std::filesystem::path& path, std::string_view config_hash);
std::pair<Policy, QTable> read_policy(const std::filesystem::path& path,
                                      ArtifactMeta* meta = nullptr);

}  // namespace mdpmine
