#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <string>

#include "rwslow/asymptotics.hpp"
#include "rwslow/descriptors.hpp"
#include "rwslow/error.hpp"
#include "rwslow/fourier.hpp"
#include "rwslow/lattice_law.hpp"
#include "rwslow/subordination.hpp"

using namespace rwslow;

namespace {

std::vector<std::int64_t> geometric_steps(double a, double b, int count) {
  std::vector<std::int64_t> ns;
  for (int i = 0; i < count; ++i) {
    const double x = a * std::pow(b / a, static_cast<double>(i) / (count - 1));
    ns.push_back(2 * std::llround(x / 2.0));
  }
  return ns;
}

ReturnSeries synthetic(double (*log_p)(double)) {
  ReturnSeries s;
  for (int i = 1; i <= 24; ++i) {
    const std::int64_t n = std::int64_t{1} << i;
    const double v = log_p(static_cast<double>(n / 2));
    s.entries.push_back({n, v, v, 0.0});
  }
  return s;
}

const ReturnSeries& genpow_series(const char* ell) {
  static std::map<std::string, ReturnSeries> cache;
  auto it = cache.find(ell);
  if (it == cache.end()) {
    const Measure m = lazify(generator_power(Group::lattice(1), SlowVaryFn::parse(ell), 100));
    it = cache.emplace(ell, return_series_fourier(m, geometric_steps(2e3, 2e6, 31))).first;
  }
  return it->second;
}

}  // namespace

TEST(PowerLaw, SyntheticExact) {
  const auto f = fit_powerlaw(synthetic([](double n) { return -0.5 * std::log(n); }));
  EXPECT_NEAR(f.exponent, -0.5, 1e-12);
  EXPECT_NEAR(f.residual, 0.0, 1e-12);
}

TEST(PowerLaw, SquareLattice) {
  std::vector<std::int64_t> ns;
  for (std::int64_t n = 128; n <= 16384; n *= 2) ns.push_back(n);
  const auto s = return_series_fourier(lazy_uniform(Group::lattice(2)), ns);
  const auto f = fit_powerlaw(s, {64, 8192});
  EXPECT_GE(f.exponent, -1.1);
  EXPECT_LE(f.exponent, -0.9);
}

TEST(PowerLaw, HalfStable) {
  const Measure m = lazify(stable_like(Group::lattice(1), 0.5, 100));
  const auto s = return_series_fourier(m, geometric_steps(512, 131072, 12));
  const auto f = fit_powerlaw(s, {256, 65536});
  EXPECT_GE(f.exponent, -2.3);
  EXPECT_LE(f.exponent, -1.7);
}

TEST(PowerLaw, NeedsEightPoints) {
  ReturnSeries s;
  for (std::int64_t n = 2; n <= 8; n += 2) s.entries.push_back({n, -1.0 * n, -1.0 * n, 0});
  EXPECT_THROW(fit_powerlaw(s), DataError);
}

TEST(PowerLaw, RejectsWideBounds) {
  auto s = synthetic([](double n) { return -0.5 * std::log(n); });
  s.entries[5].log_p_upper += 1.0;
  EXPECT_THROW(fit_powerlaw(s), DataError);
}

TEST(Stretched, SyntheticExact) {
  const auto f = fit_stretched(synthetic([](double n) { return -std::sqrt(n); }));
  EXPECT_NEAR(f.exponent, 0.5, 1e-12);
}

TEST(Stretched, GenPowLogPower) {
  const auto f = fit_stretched(genpow_series("logpow:1"), {10000, 1000000});
  EXPECT_GE(f.exponent, 0.4);
  EXPECT_LE(f.exponent, 0.6);
  EXPECT_NEAR(f.exponent, 0.5017, 0.01);
}

TEST(Stretched, SubordinatedModel) {
  const Measure m = subordinate(lazy_uniform(Group::lattice(1)), coeffs_direct(SlowVaryFn::log_power(1.0), 1000), 50);
  const auto s = return_series_fourier(m, geometric_steps(2e4, 2e6, 16));
  const auto f = fit_stretched(s, {10000, 1000000});
  EXPECT_GE(f.exponent, 0.4);
  EXPECT_LE(f.exponent, 0.6);
}

TEST(Stretched, WarnsWhenPreAsymptotic) {
  const auto f = fit_stretched(synthetic([](double n) { return -std::pow(n, 0.1); }));
  EXPECT_FALSE(f.warnings.empty());
}

TEST(SlowCorrection, SyntheticConstantQ) {
  const auto f = fit_slowcorrection(synthetic([](double n) { return -n / std::log(n); }), 2, 1.0, {4, 1 << 23});
  EXPECT_NEAR(f.q_ratio, 1.0, 1e-12);
  EXPECT_NEAR(f.exponent, 1.0, 1e-9);
}

TEST(SlowCorrection, IterLogBounded) {
  const auto f = fit_slowcorrection(genpow_series("iterlog:2:1"), 2, 1.0, {10000, 1000000});
  EXPECT_LE(f.q_ratio, 3.0);
}

TEST(SlowCorrection, MismatchIsDetected) {
  const auto f = fit_slowcorrection(genpow_series("logpow:1"), 2, 1.0, default_window(Prediction::Regime::SlowCorrection));
  EXPECT_GT(f.q_ratio, 10.0);
}

TEST(SlowCorrection, NeedsKAtLeastTwo) {
  EXPECT_THROW(fit_slowcorrection(genpow_series("logpow:1"), 1, 1.0, {}), DomainError);
}

TEST(Gjp, LazySqrtScale) {
  const GjpScale g = gjp_scale(lazy_uniform(Group::lattice(1)));
  EXPECT_EQ(g.G(1), 0.0);
  EXPECT_DOUBLE_EQ(g.K(10), 0.5 / 100.0);
  EXPECT_NEAR(g.a(2), 1.0, 1e-12);
  for (std::int64_t n : {4, 8, 100, 1000, 100000}) EXPECT_NEAR(g.a(n), std::sqrt(n / 2.0), 0.01 * std::sqrt(n / 2.0));
}

TEST(Gjp, StableOneIsBalanced) {
  const GjpScale g(LineLaw::kernel(stable_weight(1.0)));
  for (std::int64_t x = 10; x <= 1000; x += 7) {
    const double r = g.G(x) / g.K(x);
    EXPECT_GE(r, 0.125);
    EXPECT_LE(r, 8.0);
  }
}

TEST(Gjp, LogPowerTailDominates) {
  const GjpScale g(LineLaw::kernel(genpow_weight(SlowVaryFn::log_power(1.0))));
  EXPECT_GT(g.G(10000) / g.K(10000), 5.0);
}

TEST(Gjp, SequenceIncreasing) {
  const GjpScale g(LineLaw::kernel(stable_weight(1.0)));
  const std::int64_t ns[] = {10, 100, 1000};
  const auto a = g.a_sequence(ns);
  EXPECT_LT(a[0], a[1]);
  EXPECT_LT(a[1], a[2]);
}

TEST(Verdict, LazyPolynomialPasses) {
  std::vector<std::int64_t> ns;
  for (std::int64_t n = 32; n <= 65536; n *= 2) ns.push_back(n);
  const auto s = return_series_fourier(lazy_uniform(Group::lattice(1)), ns);
  const auto r = verdict(s, Prediction{Prediction::Regime::Polynomial, -0.5, 0.0, 0, {}});
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.margin, 0.0);
}

TEST(Verdict, GenPowStretchedPasses) {
  const auto r = verdict(genpow_series("logpow:1"), predicted_decay(SlowVaryFn::log_power(1.0)));
  EXPECT_TRUE(r.pass);
}

TEST(Verdict, GenPowPolynomialFails) {
  const auto r = verdict(genpow_series("logpow:1"), Prediction{Prediction::Regime::Polynomial, -1.0, 0.0, 0, {}});
  EXPECT_TRUE(r.has_verdict);
  EXPECT_FALSE(r.pass);
  EXPECT_LT(r.margin, 0.0);
}

TEST(Verdict, ModelMismatchIsDomainError) {
  const auto f = fit_powerlaw(genpow_series("logpow:1"), {1000, 1000000});
  EXPECT_THROW(verdict(f, predicted_decay(SlowVaryFn::log_power(1.0))), DomainError);
}
