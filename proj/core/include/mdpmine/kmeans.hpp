#pragma once

#include <cstdint>
#include <vector>

#include "mdpmine/encoding.hpp"

namespace mdpmine {

struct KMeansModel {
  std::vector<std::vector<double>> centroids;  ///< k rows of dimension d
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double inertia = 0.0;  ///< final within-cluster sum of squared distances
  std::size_t iterations = 0;
  std::vector<double> inertia_history;  ///< per iteration, when tracked

  std::size_t dimension() const { return centroids.empty() ? 0 : centroids[0].size(); }
};

struct KMeansOptions {
  std::size_t k = 100;
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  double tol = 1e-4;  ///< stop when the max centroid shift falls below this
  /// Fit on deduplicated vectors instead of letting duplicates weight the
  /// centroids.
  bool dedup = false;
  /// Record the within-cluster sum of squares after every iteration.
  bool track_inertia = false;
};

/// Lloyd's algorithm with k-means++ seeding. Deterministic under the seed;
/// empty clusters are reseeded at the point farthest from its centroid.
KMeansModel kmeans_fit(const std::vector<PrefixVector>& vectors,
                       const KMeansOptions& opts);

/// Index of the nearest centroid (Euclidean); ties go to the lowest index.
std::size_t kmeans_assign(const KMeansModel& model, const PrefixVector& vector);

/// Mean silhouette coefficient over a seeded subsample of at most sample_cap
/// points. Requires at least two populated clusters.
double silhouette(const std::vector<PrefixVector>& vectors, const KMeansModel& model,
                  std::size_t sample_cap, std::uint64_t seed = 0);

}  // namespace mdpmine
