#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rwslow/lattice_law.hpp"
#include "rwslow/measures.hpp"
#include "rwslow/slowly_varying.hpp"

namespace rwslow {

/// Bernstein function psi(s) = a + b s + int (1 - e^{-st}) m(t) dt given by
/// its killing rate a, drift b and Levy density m (as log m(e^x)).
class BernsteinRep {
 public:
  using LogDensity = std::function<double(double)>;

  /// psi(s) = sqrt(s), m(t) = t^{-3/2} / (2 sqrt(pi)).
  static BernsteinRep sqrt_rep();
  /// psi(s) = s^alpha, 0 < alpha < 1.
  static BernsteinRep stable_rep(double alpha);
  /// psi(s) = log2(1 + s), m(t) = e^{-t} / (t ln 2).
  static BernsteinRep log2_rep();
  /// psi(s) = b s (no Levy part).
  static BernsteinRep drift_only(double b);
  /// Arbitrary representation. With `normalize`, the density is rescaled so
  /// that psi(1) = 1 (requires a + b < 1 when a density is present).
  static BernsteinRep custom(double a, double b, LogDensity log_density, std::string name, bool normalize);
  /// `sqrt`, `log2`, `stable:<alpha>`, `drift`.
  static BernsteinRep parse(std::string_view token);

  double killing() const { return a_; }
  double drift() const { return b_; }
  bool has_density() const { return static_cast<bool>(log_density_); }
  /// log m(e^x) including the normalization factor.
  double log_density_at_log(double x) const;
  const std::string& name() const { return name_; }

  /// psi(s) by quadrature.
  double psi(double s) const;
  /// log psi(e^y), accurate for s far below double range.
  double log_psi_at_log(double y) const;

 private:
  BernsteinRep() = default;
  double a_ = 0.0;
  double b_ = 0.0;
  double log_scale_ = 0.0;
  LogDensity log_density_;
  std::string name_;
};

/// Coefficients c(1..N) of psi(s) = sum c(n) (1 - (1-s)^n), with tail mass.
struct SubordCoeffs {
  enum class Source { Alpha, Levy, Direct };

  Source source = Source::Alpha;
  std::vector<double> c;  ///< c[n-1] = c(n)
  double tail = 0.0;      ///< mass of the coefficients beyond N
  double alpha = 0.0;     ///< Alpha only
  std::shared_ptr<const BernsteinRep> rep;  ///< Levy only
  std::optional<SlowVaryFn> ell;            ///< Direct only
  double normalizer = 1.0;                  ///< Direct only: Z
  std::size_t quadrature_failures = 0;      ///< Levy only
  double normalization_error = 0.0;         ///< |sum c + independent tail - 1|

  std::size_t size() const { return c.size(); }
  /// c(n) for any n >= 1; beyond N uses the closed form / quadrature / weight.
  double operator()(std::int64_t n) const;
  std::string token() const;
};

SubordCoeffs coeffs_alpha(double alpha, std::size_t n);
SubordCoeffs coeffs_from_levy(const BernsteinRep& rep, std::size_t n);
SubordCoeffs coeffs_direct(const SlowVaryFn& ell, std::size_t n);
/// `alpha:<a>`, `levy:<rep token>`, `direct(<ell token>)`.
SubordCoeffs coeffs_from_token(std::string_view token, std::size_t n);

/// G(x) = sum_n c(n) (1 - (1-x)^n) including the coefficients beyond N.
std::shared_ptr<const OuterSymbol> outer_symbol(const SubordCoeffs& coeffs);

enum class SubordMode {
  /// sum_{n<=N} c(n) phi^(n) on the cap ball; the tail goes to the deficit.
  Truncate,
  /// Adds the n > N part by Fourier inversion (Z with an analytic profile).
  Complete,
};

struct SubordResult {
  Measure measure;
  /// Bound on |represented mass - ideal mass| for every represented element.
  double pointwise_error = 0.0;
};

SubordResult subordinate_report(const Measure& phi, const SubordCoeffs& coeffs, int cap,
                                SubordMode mode = SubordMode::Truncate);
Measure subordinate(const Measure& phi, const SubordCoeffs& coeffs, int cap,
                    SubordMode mode = SubordMode::Truncate);

}  // namespace rwslow
