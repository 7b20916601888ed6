#include <benchmark/benchmark.h>

#include "helpers.hpp"
#include "mdpmine/rl.hpp"

namespace {

mdpmine::Mdp mined_mdp() {
  auto model = testutil::toy_loan_model();
  auto log = mdpmine::generate_log(model, 1000, 5);
  log = mdpmine::enrich(log, model.kpi);
  const auto stats = mdpmine::fit_stats(log);
  const auto vectors = testutil::all_prefix_vectors(log, stats);
  mdpmine::KMeansOptions opts;
  opts.k = 50;
  opts.seed = 2;
  const auto kmeans = mdpmine::kmeans_fit(vectors, opts);
  return mdpmine::build_mdp(log, kmeans, stats);
}

void BM_McPolicyIteration(benchmark::State& state) {
  const auto mdp = mined_mdp();
  mdpmine::TrainConfig cfg;
  cfg.episodes = static_cast<std::size_t>(state.range(0));
  cfg.seed = 11;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mdpmine::mc_policy_iteration(mdp, mdpmine::ScalingFn::smooth(50.0), cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_QLearning(benchmark::State& state) {
  const auto mdp = mined_mdp();
  mdpmine::TrainConfig cfg;
  cfg.episodes = static_cast<std::size_t>(state.range(0));
  cfg.seed = 11;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdpmine::q_learning(mdp, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_McPolicyIteration)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QLearning)->Arg(10000)->Unit(benchmark::kMillisecond);
