#include <benchmark/benchmark.h>

#include <vector>

#include "swingest/config.hpp"

using namespace swingest;

namespace {

const Scenario& case1() {
  static const Scenario s = load_config(resolve_config("ieee39_case1")).scenario();
  return s;
}

void run(benchmark::State& state, Execution execution) {
  const std::vector<Eigen::Index> grid{static_cast<Eigen::Index>(state.range(0))};
  const int trials = static_cast<int>(state.range(1));
  for (auto _ : state) {
    MonteCarloReport r = run_monte_carlo(case1(), grid, trials, 1, execution);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * trials);
}

void BM_MonteCarloSerial(benchmark::State& state) { run(state, Execution::Serial); }
void BM_MonteCarloParallel(benchmark::State& state) { run(state, Execution::Parallel); }

}  // namespace

BENCHMARK(BM_MonteCarloSerial)->Args({200, 32})->Args({1000, 32})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MonteCarloParallel)->Args({200, 32})->Args({1000, 32})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
