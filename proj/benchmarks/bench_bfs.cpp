#include <benchmark/benchmark.h>

#include "rwslow/group.hpp"

using namespace rwslow;

static void heisenberg_ball(benchmark::State& state) {
  const Group h = Group::heisenberg();
  const int r = static_cast<int>(state.range(0));
  std::size_t size = 0;
  for (auto _ : state) {
    const Ball b = ball(h, r);
    size = b.size();
    benchmark::DoNotOptimize(size);
  }
  state.counters["elements"] = static_cast<double>(size);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(size));
}
BENCHMARK(heisenberg_ball)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

static void cubic_ball(benchmark::State& state) {
  const Group z3 = Group::lattice(3);
  const int r = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ball(z3, r).size());
}
BENCHMARK(cubic_ball)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void heisenberg_word_length(benchmark::State& state) {
  const Group h = Group::heisenberg();
  const Ball b = ball(h, 16);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(b.word_length(b.elements()[i]));
    i = (i + 7919) % b.size();
  }
}
BENCHMARK(heisenberg_word_length);

BENCHMARK_MAIN();
