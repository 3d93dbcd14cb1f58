#include <benchmark/benchmark.h>

#include "joap/optimizer.hpp"
#include "joap/simulator.hpp"
#include "joap/special_functions.hpp"

namespace {

joap::ProblemParams table1() {
  joap::StationParams st;
  st.lambda = 0.3;
  return {st, joap::EconomicParams(0.05, 100.0, 100.0, 0.06, 0.4)};
}

void BM_ErlangRecursion(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(joap::erlang_b(n, 0.8 * n));
}
BENCHMARK(BM_ErlangRecursion)->Arg(4)->Arg(64)->Arg(1024);

void BM_ErlangGamma(benchmark::State& state) {
  const double n = static_cast<double>(state.range(0)) + 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(joap::erlang_b_gamma(n, 0.8 * n));
}
BENCHMARK(BM_ErlangGamma)->Arg(4)->Arg(64)->Arg(1024);

void BM_OptimizeJoap(benchmark::State& state) {
  const auto params = table1();
  for (auto _ : state) benchmark::DoNotOptimize(joap::optimize_joap(params));
}
BENCHMARK(BM_OptimizeJoap)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
  const auto params = table1();
  for (auto _ : state) benchmark::DoNotOptimize(joap::brute_force_oracle(params));
}
BENCHMARK(BM_BruteForce)->Unit(benchmark::kMillisecond);

void BM_RunSimulation(benchmark::State& state) {
  const auto params = table1();
  const joap::Scenario scenario{"bench", params.station, params.econ, 240.0};
  const auto policy = joap::Policy::joap(joap::optimize_joap(params));
  std::uint64_t k = 0;
  for (auto _ : state) {
    const auto run = joap::run_simulation(scenario, policy, 60000.0, {1, k++}, false);
    benchmark::DoNotOptimize(run.totals.total_profit);
  }
}
BENCHMARK(BM_RunSimulation)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
