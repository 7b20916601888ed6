#include "mdpmine/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace mdpmine {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::size_t nearest(const std::vector<std::vector<double>>& centroids,
                    const std::vector<double>& point, double* out_d2 = nullptr) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d2 = sq_dist(centroids[j], point);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = j;
    }
  }
  if (out_d2) *out_d2 = best_d2;
  return best;
}

}  // namespace

KMeansModel kmeans_fit(const std::vector<PrefixVector>& vectors,
                       const KMeansOptions& opts) {
  if (vectors.empty()) {
    throw Error("kmeans_fit: no vectors");
  }
  if (opts.k < 1) {
    throw Error("kmeans_fit: k must be >= 1");
  }
  std::vector<std::vector<double>> points;
  points.reserve(vectors.size());
  for (const auto& v : vectors) points.push_back(v.values);
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) {
      throw DimensionMismatchError("kmeans_fit: vectors of mixed dimension");
    }
  }
  if (opts.dedup) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
  }
  {
    std::set<std::vector<double>> distinct(points.begin(), points.end());
    if (opts.k > distinct.size()) {
      throw KTooLargeError("kmeans_fit: k=" + std::to_string(opts.k) + " exceeds " +
                           std::to_string(distinct.size()) + " distinct vectors");
    }
  }

  std::mt19937_64 rng(opts.seed);

  // k-means++ seeding.
  std::vector<std::vector<double>> centroids;
  centroids.reserve(opts.k);
  {
    std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
    centroids.push_back(points[first(rng)]);
    std::vector<double> d2(points.size(), std::numeric_limits<double>::infinity());
    while (centroids.size() < opts.k) {
      double total = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        d2[i] = std::min(d2[i], sq_dist(centroids.back(), points[i]));
        total += d2[i];
      }
      std::uniform_real_distribution<double> pick(0.0, total);
      double r = pick(rng);
      std::size_t chosen = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        r -= d2[i];
        if (r <= 0.0) {
          chosen = i;
          break;
        }
      }
      // r can stay positive on ties/rounding; fall back to the last point
      // with nonzero weight.
      if (d2[chosen] == 0.0) {
        for (std::size_t i = points.size(); i > 0; --i) {
          if (d2[i - 1] > 0.0) {
            chosen = i - 1;
            break;
          }
        }
      }
      centroids.push_back(points[chosen]);
    }
  }

  std::vector<std::size_t> assignment(points.size(), 0);
  KMeansModel model;
  model.k = opts.k;
  model.seed = opts.seed;

  for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
    model.iterations = iter + 1;
    // Assignment step.
    for (std::size_t i = 0; i < points.size(); ++i) {
      assignment[i] = nearest(centroids, points[i]);
    }
    // Update step.
    std::vector<std::vector<double>> sums(opts.k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> sizes(opts.k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++sizes[assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += points[i][d];
    }
    double max_shift2 = 0.0;
    for (std::size_t j = 0; j < opts.k; ++j) {
      if (sizes[j] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) sums[j][d] /= static_cast<double>(sizes[j]);
      max_shift2 = std::max(max_shift2, sq_dist(sums[j], centroids[j]));
      centroids[j] = std::move(sums[j]);
    }
    // Reseed empty clusters at the point farthest from its own centroid.
    for (std::size_t j = 0; j < opts.k; ++j) {
      if (sizes[j] != 0) continue;
      std::size_t far_i = 0;
      double far_d2 = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (sizes[assignment[i]] <= 1) continue;  // do not orphan another cluster
        const double d2 = sq_dist(points[i], centroids[assignment[i]]);
        if (d2 > far_d2) {
          far_d2 = d2;
          far_i = i;
        }
      }
      --sizes[assignment[far_i]];
      centroids[j] = points[far_i];
      assignment[far_i] = j;
      sizes[j] = 1;
      max_shift2 = std::numeric_limits<double>::infinity();  // keep iterating
    }
    if (opts.track_inertia) {
      double wcss = 0.0;
      for (const auto& p : points) {
        double d2 = 0.0;
        nearest(centroids, p, &d2);
        wcss += d2;
      }
      model.inertia_history.push_back(wcss);
    }
    if (max_shift2 < opts.tol * opts.tol) break;
  }

  // Final assignment and inertia against the converged centroids.
  model.inertia = 0.0;
  for (const auto& p : points) {
    double d2 = 0.0;
    nearest(centroids, p, &d2);
    model.inertia += d2;
  }
  model.centroids = std::move(centroids);
  return model;
}

std::size_t kmeans_assign(const KMeansModel& model, const PrefixVector& vector) {
  if (vector.values.size() != model.dimension()) {
    throw DimensionMismatchError("kmeans_assign: vector dimension " +
                                 std::to_string(vector.values.size()) +
                                 " != model dimension " +
                                 std::to_string(model.dimension()));
  }
  return nearest(model.centroids, vector.values);
}

double silhouette(const std::vector<PrefixVector>& vectors, const KMeansModel& model,
                  std::size_t sample_cap, std::uint64_t seed) {
  std::vector<std::size_t> labels(vectors.size());
  std::set<std::size_t> populated;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    labels[i] = kmeans_assign(model, vectors[i]);
    populated.insert(labels[i]);
  }
  if (populated.size() < 2) {
    throw SingleClusterError("silhouette: fewer than two populated clusters");
  }

  std::vector<std::size_t> idx(vectors.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (idx.size() > sample_cap) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(sample_cap);
    std::sort(idx.begin(), idx.end());
  }

  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t a_i : idx) {
    // Mean distance to own cluster vs the nearest other cluster, within the
    // sample.
    std::vector<double> dist_sum(model.k, 0.0);
    std::vector<std::size_t> dist_n(model.k, 0);
    for (std::size_t b_i : idx) {
      if (b_i == a_i) continue;
      const double d = std::sqrt(sq_dist(vectors[a_i].values, vectors[b_i].values));
      dist_sum[labels[b_i]] += d;
      ++dist_n[labels[b_i]];
    }
    const std::size_t own = labels[a_i];
    if (dist_n[own] == 0) {
      // Singleton in the sample: conventionally 0.
      ++counted;
      continue;
    }
    const double a = dist_sum[own] / static_cast<double>(dist_n[own]);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.k; ++c) {
      if (c == own || dist_n[c] == 0) continue;
      b = std::min(b, dist_sum[c] / static_cast<double>(dist_n[c]));
    }
    if (!std::isfinite(b)) {
      ++counted;
      continue;
    }
    total += (b - a) / std::max(a, b);
    ++counted;
  }
  return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

}  // namespace mdpmine
