#include <benchmark/benchmark.h>

#include <random>

#include "mdpmine/kmeans.hpp"

namespace {

std::vector<mdpmine::PrefixVector> synthetic_vectors(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<mdpmine::PrefixVector> vectors(n);
  for (auto& v : vectors) {
    v.values.resize(dim);
    for (auto& x : v.values) x = u(rng);
  }
  return vectors;
}

void BM_KMeansFit(benchmark::State& state) {
  const auto vectors =
      synthetic_vectors(static_cast<std::size_t>(state.range(0)), 21);
  mdpmine::KMeansOptions opts;
  opts.k = static_cast<std::size_t>(state.range(1));
  opts.seed = 3;
  opts.max_iter = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdpmine::kmeans_fit(vectors, opts));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_KMeansAssign(benchmark::State& state) {
  const auto vectors = synthetic_vectors(4096, 21);
  mdpmine::KMeansOptions opts;
  opts.k = 100;
  opts.seed = 3;
  const auto model = mdpmine::kmeans_fit(vectors, opts);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdpmine::kmeans_assign(model, vectors[i++ % vectors.size()]));
  }
  state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK(BM_KMeansFit)->Args({2000, 20})->Args({10000, 100})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KMeansAssign);
