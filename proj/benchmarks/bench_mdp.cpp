#include <benchmark/benchmark.h>

#include "helpers.hpp"
#include "mdpmine/mdp.hpp"

namespace {

struct Fixture {
  mdpmine::EventLog log;
  mdpmine::NormalizationStats stats;
  mdpmine::KMeansModel kmeans;

  explicit Fixture(std::size_t n_traces) {
    log = mdpmine::generate_log(testutil::toy_loan_model(), n_traces, 5);
    log = mdpmine::enrich(log, testutil::toy_loan_model().kpi);
    stats = mdpmine::fit_stats(log);
    const auto vectors = testutil::all_prefix_vectors(log, stats);
    mdpmine::KMeansOptions opts;
    opts.k = 50;
    opts.seed = 2;
    kmeans = mdpmine::kmeans_fit(vectors, opts);
  }
};

void BM_MdpBuild(benchmark::State& state) {
  const Fixture fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mdpmine::build_mdp(fixture.log, fixture.kmeans, fixture.stats));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MdpValidate(benchmark::State& state) {
  const Fixture fixture(1000);
  const auto mdp = mdpmine::build_mdp(fixture.log, fixture.kmeans, fixture.stats);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdpmine::validate(mdp));
  }
}

}  // namespace

BENCHMARK(BM_MdpBuild)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MdpValidate)->Unit(benchmark::kMicrosecond);
