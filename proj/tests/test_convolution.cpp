#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rwslow/asymptotics.hpp"
#include "rwslow/convolution.hpp"
#include "rwslow/descriptors.hpp"
#include "rwslow/error.hpp"

using namespace rwslow;

namespace {

Element el(std::int64_t a, std::int64_t b = 0, std::int64_t c = 0) { return Element{{a, b, c}}; }

}  // namespace

TEST(Convolve, DeltaIsIdentity) {
  const Group z2 = Group::lattice(2);
  const Measure mu = stable_like(z2, 1.0, 6);
  const Measure out = convolve(delta_measure(z2), mu, 10);
  ASSERT_EQ(out.support_size(), mu.support_size());
  for (const Atom& a : mu.atoms()) EXPECT_EQ(out.mass(a.g), a.mass);
  EXPECT_NEAR(out.deficit(), mu.deficit(), 1e-15);
}

TEST(Convolve, LazySquaredAtOrigin) {
  const Measure mu = lazy_uniform(Group::lattice(1));
  const Measure sq = convolve(mu, mu, 4);
  EXPECT_DOUBLE_EQ(sq.mass(el(0)), 0.375);
  EXPECT_DOUBLE_EQ(sq.mass(el(1)), 0.25);
  EXPECT_DOUBLE_EQ(sq.mass(el(2)), 0.0625);
  EXPECT_EQ(sq.deficit(), 0.0);
}

TEST(Convolve, PreservesSymmetry) {
  const Group h = Group::heisenberg();
  const Measure mu = generator_power(h, SlowVaryFn::log_power(1.0), 4);
  const Measure sq = convolve(mu, mu, 10, true);
  for (const Atom& a : sq.atoms()) EXPECT_EQ(sq.mass(h.invert(a.g)), a.mass);
}

TEST(Convolve, CapPushesMassToDeficit) {
  const Measure mu = lazy_uniform(Group::lattice(1));
  const Measure sq = convolve(mu, mu, 1);
  EXPECT_DOUBLE_EQ(sq.deficit(), 0.125);
  EXPECT_NEAR(sq.total_mass() + sq.deficit(), 1.0, 1e-15);
}

TEST(DirectSeries, LazyTwoSteps) {
  const auto s = return_series_direct(lazy_uniform(Group::lattice(1)), 4, 8);
  ASSERT_NE(s.find(2), nullptr);
  EXPECT_NEAR(s.find(2)->log_p_lower, std::log(0.375), 1e-15);
  EXPECT_NEAR(s.find(1)->log_p_lower, std::log(0.5), 1e-15);
  EXPECT_EQ(s.engine, "direct");
}

TEST(DirectSeries, DeltaStaysAtOne) {
  const auto s = return_series_direct(delta_measure(Group::heisenberg()), 10, 2);
  for (const auto& e : s.entries) {
    EXPECT_EQ(e.log_p_lower, 0.0);
    EXPECT_EQ(e.log_p_upper, 0.0);
  }
}

TEST(DirectSeries, LazyPowerLawSlope) {
  const auto s = return_series_direct(lazy_uniform(Group::lattice(1)), 512, 520);
  const FitResult f = fit_powerlaw(s, {2, 256});
  EXPECT_NEAR(f.exponent, -0.5, 0.05);
}

TEST(DirectSeries, UpperBoundCoversDeficit) {
  const auto s = return_series_direct(stable_like(Group::lattice(1), 1.0, 30), 40, 60);
  for (const auto& e : s.entries) {
    EXPECT_LE(e.log_p_lower, e.log_p_upper);
    EXPECT_GE(e.deficit, 0.0);
  }
}

TEST(DirectSeries, HeisenbergStructure) {
  const auto s = return_series_direct(lazy_uniform(Group::heisenberg()), 60, 30);
  const StructureReport r = check_structure(s);
  EXPECT_TRUE(r.monotone);
  EXPECT_TRUE(r.log_convex);
}

TEST(Series, CsvRoundTrip) {
  const auto s = return_series_direct(lazy_uniform(Group::lattice(2)), 12, 12);
  std::stringstream ss;
  s.write_csv(ss);
  const auto back = ReturnSeries::read_csv(ss);
  ASSERT_EQ(back.entries.size(), s.entries.size());
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].n, s.entries[i].n);
    EXPECT_EQ(back.entries[i].log_p_lower, s.entries[i].log_p_lower);
    EXPECT_EQ(back.entries[i].log_p_upper, s.entries[i].log_p_upper);
    EXPECT_EQ(back.entries[i].deficit, s.entries[i].deficit);
  }
  EXPECT_EQ(back.engine, "direct");
}

TEST(Series, CsvRejectsGarbage) {
  std::stringstream ss("n,log_p_lower\n1,abc\n");
  EXPECT_THROW(ReturnSeries::read_csv(ss), ParseError);
}

TEST(Structure, DetectsViolations) {
  ReturnSeries s;
  s.entries = {{2, -1.0, -1.0, 0}, {4, -0.5, -0.5, 0}, {6, -2.0, -2.0, 0}, {8, -2.1, -2.1, 0}};
  const StructureReport r = check_structure(s);
  EXPECT_FALSE(r.monotone);
  EXPECT_GT(r.worst_monotone, 0.4);
  ReturnSeries t;
  t.entries = {{2, -1.0, -1.0, 0}, {4, -1.1, -1.1, 0}, {6, -1.5, -1.5, 0}};
  EXPECT_FALSE(check_structure(t).log_convex);
}
