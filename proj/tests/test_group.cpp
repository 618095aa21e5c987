#include <gtest/gtest.h>

#include <array>

#include "rwslow/error.hpp"
#include "rwslow/group.hpp"

using namespace rwslow;

namespace {

Element el(std::int64_t a, std::int64_t b = 0, std::int64_t c = 0) { return Element{{a, b, c}}; }

using Mat = std::array<std::array<std::int64_t, 3>, 3>;

Mat unitriangular(const Element& g) { return Mat{{{1, g.c[0], g.c[2]}, {0, 1, g.c[1]}, {0, 0, 1}}}; }

Mat mul(const Mat& x, const Mat& y) {
  Mat r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += x[i][k] * y[k][j];
  return r;
}

}  // namespace

TEST(Compose, LatticeIsComponentwise) {
  const Group z2 = Group::lattice(2);
  EXPECT_EQ(z2.compose(el(1, 2), el(3, -1)), el(4, 1));
}

TEST(Compose, HeisenbergCommutatorIsCentral) {
  const Group h = Group::heisenberg();
  const Element x = el(1), y = el(0, 1);
  const Element c = h.compose(h.compose(x, y), h.compose(h.invert(x), h.invert(y)));
  EXPECT_EQ(c, el(0, 0, 1));
}

TEST(Compose, HeisenbergMatchesUnitriangularMatrices) {
  const Group h = Group::heisenberg();
  const std::vector<Element> sample{el(1, 2, 3), el(-4, 5, -1), el(0, -3, 7), el(2, 2, 2)};
  for (const auto& g : sample)
    for (const auto& k : sample) {
      const Element p = h.compose(g, k);
      EXPECT_EQ(unitriangular(p), mul(unitriangular(g), unitriangular(k)));
    }
}

TEST(Compose, InverseGivesIdentity) {
  for (const Group& g : {Group::lattice(1), Group::lattice(3), Group::heisenberg()}) {
    const Element x = el(3, -2, 5);
    const Element y = g.is_lattice() && g.rank() == 1 ? el(3) : x;
    EXPECT_EQ(g.compose(y, g.invert(y)), g.identity());
    EXPECT_EQ(g.compose(g.invert(y), y), g.identity());
  }
}

TEST(Compose, PowerMatchesRepeatedProduct) {
  const Group h = Group::heisenberg();
  const Element g = el(1, 1, 0);
  Element acc = h.identity();
  for (int n = 1; n <= 6; ++n) {
    acc = h.compose(acc, g);
    EXPECT_EQ(h.power(g, n), acc);
  }
  EXPECT_EQ(h.power(g, -3), h.invert(h.power(g, 3)));
}

TEST(Ball, IntegerVolumes) {
  const Ball b = ball(Group::lattice(1), 3);
  EXPECT_EQ(b.volumes(), (std::vector<std::int64_t>{1, 3, 5, 7}));
}

TEST(Ball, SquareLatticeRadiusOne) {
  const Ball b = ball(Group::lattice(2), 1);
  EXPECT_EQ(b.volumes(), (std::vector<std::int64_t>{1, 5}));
}

TEST(Ball, LatticeVolumesMatchClosedForm) {
  const Group z3 = Group::lattice(3);
  const Ball b = ball(z3, 10);
  for (int k = 0; k <= 10; ++k) EXPECT_DOUBLE_EQ(static_cast<double>(b.volumes()[k]), *z3.lattice_volume(k));
}

TEST(Ball, HeisenbergCentralElementHasLengthFour) {
  const Ball b = ball(Group::heisenberg(), 4);
  ASSERT_TRUE(b.word_length(el(0, 0, 1)).has_value());
  EXPECT_EQ(*b.word_length(el(0, 0, 1)), 4);
}

TEST(Ball, HeisenbergGeodesicWordsEvaluateToTheirElement) {
  const Group h = Group::heisenberg();
  const Ball b = ball(h, 6);
  for (std::size_t i = 0; i < b.size(); i += 97) {
    const Element g = b.elements()[i];
    const auto w = b.geodesic_word(g);
    ASSERT_TRUE(w.has_value());
    EXPECT_EQ(static_cast<int>(w->size()), b.lengths()[i]);
    Element acc = h.identity();
    for (int label : *w) {
      const Element s = h.generators()[std::abs(label) - 1];
      acc = h.compose(acc, label > 0 ? s : h.invert(s));
    }
    EXPECT_EQ(acc, g);
  }
}

TEST(Ball, ElementCapRaisesBudgetError) {
  EXPECT_THROW(ball(Group::heisenberg(), 40, 1000), BudgetError);
}

TEST(GrowthDegree, Integers) {
  const double d = growth_degree(ball(Group::lattice(1), 64)).degree;
  EXPECT_GE(d, 0.9);
  EXPECT_LE(d, 1.1);
}

TEST(GrowthDegree, CubicLattice) {
  const double d = growth_degree(ball(Group::lattice(3), 20)).degree;
  EXPECT_GE(d, 2.7);
  EXPECT_LE(d, 3.3);
}

TEST(GrowthDegree, Heisenberg) {
  const double d = growth_degree(ball(Group::heisenberg(), 20)).degree;
  EXPECT_GE(d, 3.5);
  EXPECT_LE(d, 4.5);
}

TEST(GrowthDegree, NeedsRadiusEight) { EXPECT_THROW(growth_degree(ball(Group::lattice(1), 4)), DomainError); }

TEST(Catalog, FiveDimensionalLatticeIsUnsupported) {
  EXPECT_THROW(Group::lattice(5), UnsupportedError);
  EXPECT_THROW(Group::from_token("zd:5"), UnsupportedError);
  EXPECT_THROW(Group::from_token("free2"), ParseError);
}

TEST(WordMetric, LatticeUsesL1Norm) {
  const WordMetric m(Group::lattice(3));
  EXPECT_EQ(*m.length(el(3, -4, 2)), 9);
}

TEST(WordMetric, HeisenbergAgreesWithBall) {
  const Group h = Group::heisenberg();
  const WordMetric m(h, 6);
  const Ball b = ball(h, 6);
  for (std::size_t i = 0; i < b.size(); i += 31) EXPECT_EQ(*m.length(b.elements()[i]), b.lengths()[i]);
}
