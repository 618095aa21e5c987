#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rwslow/slowly_varying.hpp"

namespace rwslow {

/// Positive decreasing weight w(t) on [0, inf) whose tail integral is known
/// analytically (or by a well-conditioned substitution) at any magnitude.
class TailWeight {
 public:
  virtual ~TailWeight() = default;
  virtual double value(double t) const = 0;
  /// log w(e^x); must stay accurate for x in the thousands.
  virtual double log_value_at_log(double x) const = 0;
  /// int_{e^x}^inf w(t) dt.
  virtual double tail_integral_at_log(double x) const = 0;
  virtual std::string token() const = 0;

  double tail_integral(double t) const;
  /// sum_{n > N} w(n), by direct summation up to 64 and midpoint
  /// Euler-Maclaurin beyond.
  double sum_beyond(std::int64_t n) const;
  /// First three derivatives of w at t (finite differences of log w in log t).
  std::array<double, 3> derivatives(double t) const;
};

/// w(t) = 1 / ((1+t) ell(1+t)): subordination coefficient profile.
std::shared_ptr<const TailWeight> shifted_kernel_weight(const SlowVaryFn& ell);
/// w(t) = 1 / ((1+t) ell(1+t^2)): generator-power / D-based radial law on Z.
std::shared_ptr<const TailWeight> genpow_weight(const SlowVaryFn& ell);
/// w(t) = 1 / (V(1+t) ell(1+t)) with V(r) = 2r+1: V-based radial law on Z.
std::shared_ptr<const TailWeight> radial_volume_weight(const SlowVaryFn& ell);
/// w(t) = (1+t)^{-1-alpha}: stable-like law.
std::shared_ptr<const TailWeight> stable_weight(double alpha);

/// int_{e^x}^inf r(t) / ((1+t) ell(t)) dt given log r as a function of log t,
/// computed after the substitution y = kernel tail of ell (r bounded).
template <class LogRatio>
double kernel_tail_integral(const SlowVaryFn& ell, LogRatio&& log_ratio, double x);

/// x = 1 - phi_hat  ->  1 - (phi_psi)_hat for a subordination psi.
class OuterSymbol {
 public:
  virtual ~OuterSymbol() = default;
  /// G(x) given log x, accurate in absolute terms (x >= 1 maps to G = 1).
  virtual double value(double log_x) const = 0;
  /// log G(x) given log x, accurate for x far below double range.
  virtual double log_value(double log_x) const = 0;
};

/// Symmetric probability law on Z: either finitely supported, or
/// c * w(|n|) for every n with an analytic tail weight.
class LineLaw {
 public:
  /// masses[n] for n = 0..R (mirrored to -n); deficit is unrepresented mass.
  static LineLaw finite(std::vector<double> masses, double deficit = 0.0);
  static LineLaw kernel(std::shared_ptr<const TailWeight> weight);

  bool is_finite() const { return weight_ == nullptr; }
  const TailWeight* weight() const { return weight_.get(); }
  /// Finite support radius, or -1 for infinite support.
  std::int64_t radius() const { return weight_ ? -1 : static_cast<std::int64_t>(masses_.size()) - 1; }
  double normalizer() const { return c_; }
  double deficit() const { return deficit_; }

  double mass(std::int64_t n) const;
  /// sum_{|n| > r} phi(n) for integer r >= 0 (finite laws include the deficit).
  double tail_beyond(std::int64_t r) const;
  /// Same for r = e^x beyond any integer range (kernel laws only).
  double tail_beyond_log(double x) const;
  /// sum_{|n| <= r} n^2 phi(n).
  double truncated_second_moment(std::int64_t r) const;

  /// log(1 - phi_hat(theta)) at theta = e^u, accurate for u down to -1e5;
  /// u below -1e6 is treated as theta = 0.
  double log_one_minus_symbol(double u) const;

  std::string describe() const;

 private:
  LineLaw() = default;
  double kernel_one_minus_symbol(double u) const;

  std::vector<double> masses_;
  double deficit_ = 0.0;
  double second_moment_ = 0.0;
  std::shared_ptr<const TailWeight> weight_;
  double c_ = 1.0;
};

}  // namespace rwslow

#include "rwslow/detail/kernel_tail.inl"
