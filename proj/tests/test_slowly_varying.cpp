#include <gtest/gtest.h>

#include <cmath>

#include "rwslow/error.hpp"
#include "rwslow/slowly_varying.hpp"

using namespace rwslow;

TEST(Ell, LogPowerAtZeroIsOne) { EXPECT_DOUBLE_EQ(SlowVaryFn::log_power(1.0)(0.0), 1.0); }

TEST(Ell, IterLogDirectSubstitution) {
  const double t = 1e6;
  const double l1 = std::log1p(t);
  const double expected = (1.0 + l1) * std::pow(1.0 + std::log1p(l1), 2.0);
  EXPECT_NEAR(SlowVaryFn::iter_log(2, 1.0)(t), expected, 1e-9 * expected);
  // log(1+t) against log t moves the value by about 1e-7 relative
  const double unshifted = (1.0 + std::log(t)) * std::pow(1.0 + std::log1p(std::log(t)), 2.0);
  EXPECT_NEAR(SlowVaryFn::iter_log(2, 1.0)(t), unshifted, 1e-6 * unshifted);
}

TEST(Ell, LogAtLogMatchesDirectEvaluation) {
  const auto ell = SlowVaryFn::iter_log(3, 0.5);
  for (double x : {0.0, 1.0, 5.0, 30.0}) EXPECT_NEAR(ell.log_at_log(x), std::log(ell(std::exp(x))), 1e-12);
  EXPECT_TRUE(std::isfinite(ell.log_at_log(1e6)));
}

TEST(Ell, TokensRoundTrip) {
  for (const char* tok : {"logpow:1", "logpow:0.25", "iterlog:2:1", "iterlog:3:0.5"}) {
    EXPECT_EQ(SlowVaryFn::parse(tok).token(), tok);
  }
  EXPECT_THROW(SlowVaryFn::parse("logpow:x"), ParseError);
  EXPECT_THROW(SlowVaryFn::parse("poly:1"), ParseError);
}

TEST(Ell, KernelTailInverseRoundTrip) {
  const auto ell = SlowVaryFn::log_power(1.0);
  for (double x : {1.0, 10.0, 100.0}) EXPECT_NEAR(ell.kernel_tail_inverse_log(ell.kernel_tail_at_log(x)), x, 1e-9 * x);
}

TEST(Rho, LogEpsSubstitution) { EXPECT_NEAR(MomentFn::log_eps(2.0)(std::exp(1.0) - 1.0), 4.0, 1e-12); }

TEST(Rho, PowerAndAnchors) {
  EXPECT_DOUBLE_EQ(MomentFn::power(2.0)(1.0), 4.0);
  for (const auto& rho : {MomentFn::power(0.5), MomentFn::log_eps(3.0), MomentFn::iter_log_eps(2, 1.0),
                          MomentFn::theta_two(SlowVaryFn::log_power(1.0))}) {
    EXPECT_DOUBLE_EQ(rho(0.0), 1.0) << rho.token();
    EXPECT_GE(rho(7.0), 1.0) << rho.token();
  }
}

TEST(Rho, LogInverseIsThreshold) {
  const auto rho = MomentFn::power(1.0);
  EXPECT_NEAR(std::exp(rho.log_inverse(2.0)), 1.0, 1e-12);
  EXPECT_EQ(rho.log_inverse(0.5), -HUGE_VAL);
}

TEST(Theta, LogPowerCloseToClosedForm) {
  const ThetaFn th(SlowVaryFn::log_power(1.0));
  EXPECT_NEAR(th.at_log(10.0), 11.0, 0.05 * 11.0);
}

TEST(Theta, ThetaTwoIsHalfOfThetaAtSquare) {
  const ThetaFn th(SlowVaryFn::iter_log(2, 1.0));
  for (double s : {1.0, 3.0, 100.0, 1e5}) EXPECT_DOUBLE_EQ(th.theta2(s), th(s * s) / 2.0);
}

TEST(Theta, Monotone) {
  const ThetaFn th(SlowVaryFn::log_power(1.0));
  EXPECT_LT(th(10.0), th(100.0));
  EXPECT_LT(th(100.0), th(1000.0));
}

TEST(Theta, InverseRoundTrip) {
  const ThetaFn th(SlowVaryFn::log_power(1.0));
  for (double s : {10.0, 1e3, 1e6}) EXPECT_NEAR(th.inverse(th(s)), s, 1e-4 * s);
}

TEST(Theta, InverseGrowsLinearlyInLog) {
  const ThetaFn th(SlowVaryFn::log_power(1.0));
  for (double u = 5.0; u <= 20.0; u += 1.0) {
    const double r = th.inverse_log(2.0 * u) / th.inverse_log(u);
    EXPECT_GE(r, 1.8) << u;
    EXPECT_LE(r, 2.2) << u;
  }
}

TEST(Theta, InverseBeyondGridUsesClosedForm) {
  const ThetaFn th(SlowVaryFn::log_power(1.0));
  const double u = 4.0 * th.at_log(th.max_log());
  const double x = th.inverse_log(u);
  EXPECT_GT(x, th.max_log());
  EXPECT_NEAR(th.at_log(x), u, 1e-9 * u);
}

TEST(Theta, InverseBelowRangeThrows) {
  const ThetaFn th(SlowVaryFn::log_power(1.0));
  EXPECT_THROW(th.inverse_log(0.5 * th(1.0)), DomainError);
}

TEST(Prediction, LogPowerIsStretchedHalf) {
  const Prediction p = predicted_decay(SlowVaryFn::log_power(1.0));
  EXPECT_EQ(p.regime, Prediction::Regime::Stretched);
  EXPECT_DOUBLE_EQ(p.exponent, 0.5);
}

TEST(Prediction, IterLogIsSlowCorrection) {
  const Prediction p = predicted_decay(SlowVaryFn::iter_log(2, 1.0));
  EXPECT_EQ(p.regime, Prediction::Regime::SlowCorrection);
  EXPECT_EQ(p.k, 2);
  EXPECT_DOUBLE_EQ(p.exponent, 1.0);
}

TEST(Prediction, PowerMomentIsPolynomial) {
  const Prediction p = predicted_decay(MomentFn::power(1.0), 1);
  EXPECT_EQ(p.regime, Prediction::Regime::Polynomial);
  EXPECT_DOUBLE_EQ(p.exponent, -1.0);
}

TEST(Numbers, FormatAndParse) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_DOUBLE_EQ(parse_number("1e-3"), 1e-3);
  EXPECT_THROW(parse_number("1.0x"), ParseError);
  EXPECT_THROW(parse_number(""), ParseError);
}
