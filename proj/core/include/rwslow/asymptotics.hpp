#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rwslow/convolution.hpp"
#include "rwslow/lattice_law.hpp"
#include "rwslow/measures.hpp"
#include "rwslow/slowly_varying.hpp"

namespace rwslow {

enum class FitModel { PowerLaw, Stretched, SlowCorrection };

std::string to_string(FitModel m);

/// Range of n for points (n, p(2n)); series entries at odd steps are ignored.
struct FitWindow {
  std::int64_t n_min = 1;
  std::int64_t n_max = std::numeric_limits<std::int64_t>::max();
};

/// [16, inf) for polynomial laws, [1000, inf) for the slowly varying regimes.
FitWindow default_window(Prediction::Regime regime);

struct FitResult {
  FitModel model = FitModel::PowerLaw;
  /// PowerLaw: slope of log p(2n) in log n. Stretched: slope of
  /// log(-log p(2n)) in log n. SlowCorrection: least-squares delta in
  /// -log p(2n) ~ c n / (log^{(k-1)} n)^delta.
  double exponent = 0.0;
  double intercept = 0.0;
  std::int64_t n_min = 0;
  std::int64_t n_max = 0;
  std::size_t points = 0;
  double residual = 0.0;  ///< RMS in the fitted log coordinates

  int k = 0;  ///< SlowCorrection: iterated-log level
  double delta = 0.0;
  double q_min = 0.0;  ///< SlowCorrection: range of q(n) over the window
  double q_max = 0.0;
  double q_ratio = 0.0;

  bool has_verdict = false;
  double predicted = std::numeric_limits<double>::quiet_NaN();
  double tolerance = 0.0;  ///< exponent tolerance, or the max/min bound
  bool pass = false;
  double margin = 0.0;  ///< tolerance - deviation (>= 0 on pass)

  std::vector<std::string> warnings;
};

/// Least-squares slope of log p(2n) against log n. Needs >= 8 points and
/// log_p_upper - log_p_lower < 0.1 on each.
FitResult fit_powerlaw(const ReturnSeries& series, FitWindow window = {});
/// Slope of log(-log p(2n)) against log n; warns when -log p < 10.
FitResult fit_stretched(const ReturnSeries& series, FitWindow window = {});
/// q(n) = -log p(2n) (log^{(k-1)} n)^delta / n over the window with
/// log^{(j)} the j-fold natural logarithm; records q max/min.
FitResult fit_slowcorrection(const ReturnSeries& series, int k, double delta, FitWindow window = {});

struct VerdictOptions {
  double exponent_tolerance = 0.1;
  double ratio_bound = 4.0;
  bool use_default_window = true;
  FitWindow window;
};

/// Fits the regime of `prediction` and compares against it.
FitResult verdict(const ReturnSeries& series, const Prediction& prediction, const VerdictOptions& options = {});
/// Compares an existing fit; throws DomainError when the model does not
/// match the prediction's regime.
FitResult verdict(FitResult fit, const Prediction& prediction, const VerdictOptions& options = {});

/// G(x) = phi(|y| > x), K(x) = x^{-2} sum_{|y| <= x} y^2 phi(y), Q = G + K
/// at integer x, and a_n with Q(a_n) = 1/n.
class GjpScale {
 public:
  explicit GjpScale(LineLaw law);

  double G(std::int64_t x) const;
  double K(std::int64_t x) const;
  double Q(std::int64_t x) const { return G(x) + K(x); }
  /// Monotone bisection over integers, then log Q linear in log x between
  /// the bracketing points (linear in x on [0, 1]).
  double a(std::int64_t n) const;
  std::vector<double> a_sequence(std::span<const std::int64_t> ns) const;

  const LineLaw& law() const { return law_; }

 private:
  LineLaw law_;
};

GjpScale gjp_scale(const Measure& mu);

}  // namespace rwslow
