#include <benchmark/benchmark.h>

#include "helpers.hpp"
#include "mdpmine/simgen.hpp"

namespace {

void BM_GenerateLog(benchmark::State& state) {
  const auto model = testutil::toy_loan_model();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mdpmine::generate_log(model, static_cast<std::size_t>(state.range(0)), 7));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Enrich(benchmark::State& state) {
  const auto model = testutil::toy_loan_model();
  const auto log = mdpmine::generate_log(model, 2000, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdpmine::enrich(log, model.kpi));
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}

}  // namespace

BENCHMARK(BM_GenerateLog)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Enrich)->Unit(benchmark::kMillisecond);
