#include <benchmark/benchmark.h>

#include "rwslow/descriptors.hpp"
#include "rwslow/fourier.hpp"

using namespace rwslow;

static void fourier_point(benchmark::State& state, const char* group, const char* desc) {
  const Measure mu = parse_measure(Group::from_token(group), desc);
  const std::int64_t ns[] = {state.range(0)};
  for (auto _ : state) benchmark::DoNotOptimize(return_series_fourier(mu, ns).entries[0].log_p_lower);
}
BENCHMARK_CAPTURE(fourier_point, lazy_z, "zd:1", "lazy")->Arg(1 << 10)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(fourier_point, lazy_z2, "zd:2", "lazy")->Arg(1 << 10)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(fourier_point, genpow_logpow, "zd:1", "lazify(genpow(logpow:1,100))")
    ->Arg(20000)
    ->Arg(2000000)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(fourier_point, genpow_iterlog, "zd:1", "lazify(genpow(iterlog:2:1,100))")
    ->Arg(2000000)
    ->Unit(benchmark::kMillisecond);

static void char_fn_direct(benchmark::State& state) {
  const Measure mu = parse_measure(Group::lattice(1), "stable(1,10000)");
  double t = 0.1;
  for (auto _ : state) {
    const double th[] = {t};
    benchmark::DoNotOptimize(char_fn(mu, th));
    t += 1e-6;
  }
}
BENCHMARK(char_fn_direct);

BENCHMARK_MAIN();
