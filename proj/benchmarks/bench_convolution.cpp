#include <benchmark/benchmark.h>

#include "rwslow/convolution.hpp"
#include "rwslow/descriptors.hpp"

using namespace rwslow;

static void direct_series_heisenberg(benchmark::State& state) {
  const Measure mu = lazy_uniform(Group::heisenberg());
  const int cap = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(return_series_direct(mu, 2 * cap, cap).entries.size());
}
BENCHMARK(direct_series_heisenberg)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void direct_series_square_lattice(benchmark::State& state) {
  const Measure mu = parse_measure(Group::lattice(2), "lazify(stable(1,8))");
  for (auto _ : state) benchmark::DoNotOptimize(return_series_direct(mu, 64, 200).entries.size());
}
BENCHMARK(direct_series_square_lattice)->Unit(benchmark::kMillisecond);

static void convolve_heavy_tail(benchmark::State& state) {
  const Measure mu = parse_measure(Group::lattice(1), "stable(0.5,2000)");
  for (auto _ : state) benchmark::DoNotOptimize(convolve(mu, mu, 4000, true).support_size());
}
BENCHMARK(convolve_heavy_tail)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
