#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "rwslow/group.hpp"
#include "rwslow/lattice_law.hpp"
#include "rwslow/measures.hpp"
#include "rwslow/slowly_varying.hpp"

namespace rwslow {

/// Finitely supported function on a group, zero outside the ball of
/// radius `radius` around the identity.
struct TestFunction {
  std::string name;
  int radius = 0;
  std::unordered_map<Element, double, ElementHash> values;

  double operator()(const Element& g) const;
  double norm2() const;
};

/// 1 on the ball of radius r.
TestFunction ball_indicator(const Group& group, int r);
/// max(0, width - |x|).
TestFunction tent(const Group& group, int width);
/// Independent uniform +-1 values on the ball of radius r.
TestFunction random_signs(const Group& group, int r, std::uint64_t seed, std::string name = "rand");

/// Ball indicators and tents of radii {2, 4, 8, 16} not exceeding `radius`
/// (and `radius` itself), followed by `random_count` seeded +-1 functions on
/// the ball of radius `radius`.
std::vector<TestFunction> standard_suite(const Group& group, int radius = 16, int random_count = 50,
                                         std::uint64_t seed = 1);

struct DirichletValue {
  double value = 0.0;        ///< over the represented masses
  double uncertainty = 0.0;  ///< upper allowance for the deficit, <= ||f||^2 deficit
};

/// E_mu(f, f) = 1/2 sum_{x,y} |f(xy) - f(x)|^2 mu(y).
DirichletValue dirichlet_form(const Measure& mu, const TestFunction& f);
/// Same for a whole suite; one pass over the support of mu.
std::vector<DirichletValue> dirichlet_forms(const Measure& mu, std::span<const TestFunction> suite);

/// sum_x |f(xg) - f(x)|^2 for every member of the suite.
std::vector<double> translation_energy(const Group& group, const Element& g, std::span<const TestFunction> suite);

struct TailMoment {
  double H_lower = 0.0;  ///< represented mass of {|n| > r}
  double H_upper = 0.0;  ///< plus the deficit
  double G = 0.0;        ///< sum_{|n| <= r} n^2 phi(n)
};

TailMoment tail_and_moment(const LineLaw& phi, std::int64_t r);
TailMoment tail_and_moment(const Measure& phi, std::int64_t r);

/// sup over represented |k| <= |m| of phi(m) / phi(k).
double monotonicity_constant(const LineLaw& phi, std::int64_t range);

/// Powers s^n of the generator `generator`, n = 1..n_max; phi is a law on Z.
struct PowerMode {
  int generator = 0;
  std::int64_t n_max = 50;
};

/// Listed elements. With `phi1` the bound is min{1/H(|g|), |g|^2/G(|g|)} of
/// that line law, with `ell` it is theta(1 + |g|^2).
struct ElementMode {
  std::vector<Element> elements;
  std::optional<LineLaw> phi1;
  std::optional<SlowVaryFn> ell;
};

using PoincareMode = std::variant<PowerMode, ElementMode>;

struct PoincareRecord {
  std::string case_id;
  std::int64_t n_or_wordlen = 0;
  double lhs = 0.0;
  double branch_H = 0.0;  ///< 1/H, or theta(1 + |g|^2) for the theta bound
  double branch_G = 0.0;  ///< n^2/G, or theta(1 + |g|^2) for the theta bound
  double dirichlet = 0.0;
  double ratio = 0.0;
  /// Power mode: lhs H_upper(|n|) <= 16 C_mono E_{s,phi}(f, f).
  bool quantitative_ok = true;
};

struct PoincareReport {
  std::vector<PoincareRecord> records;
  double max_ratio = 0.0;
  /// (n or |g|, max ratio over the suite), increasing.
  std::vector<std::pair<std::int64_t, double>> trend;
  double c_mono = 1.0;
  double deficit = 0.0;
  std::size_t violations = 0;
  std::vector<std::string> notes;

  void write_csv(std::ostream& os) const;
};

/// Power mode: phi is a measure on Z and the energy is E_{s,phi}. Element
/// mode: phi is a measure on `group` and the energy is E_phi.
PoincareReport pseudo_poincare_report(const Group& group, const PoincareMode& mode, const Measure& phi,
                                      std::span<const TestFunction> suite);

/// Signed-generator blocks (i, x) with g = prod s_i^x from a BFS geodesic.
std::vector<std::pair<int, std::int64_t>> power_decomposition(const Ball& ball, const Element& g);

struct Comparison {
  double c_hat = 0.0;        ///< max_f E_mu / E_nu over represented masses
  double c_certified = 0.0;  ///< max_f E_mu / (E_nu + uncertainty)
  std::size_t argmax = 0;
  std::string case_id;
  std::vector<double> ratios;
};

Comparison dirichlet_comparison(const Measure& mu, const Measure& nu, std::span<const TestFunction> suite);

}  // namespace rwslow
