#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rwslow {

/// log_[k] t with log_[0] t = t and log_[m] t = log(1 + log_[m-1] t).
double iterated_log(int k, double t);

/// log(1 + e^x) without overflow.
double softplus(double x);

/// Slowly varying function
///   ell(t) = prod_{j=1}^{k-1} (1 + log_[j] t) * (1 + log_[k] t)^{1+delta}.
/// k = 1 is the log-power family [1 + log(1+t)]^{1+delta}.
class SlowVaryFn {
 public:
  static SlowVaryFn log_power(double delta);
  static SlowVaryFn iter_log(int k, double delta);
  /// `logpow:<delta>` or `iterlog:<k>:<delta>`.
  static SlowVaryFn parse(std::string_view token);

  int levels() const { return k_; }
  double delta() const { return delta_; }
  std::string token() const;

  double operator()(double t) const;
  /// log ell(e^x), valid for any real x (no overflow for huge t).
  double log_at_log(double x) const;

  /// Exact closed form of  int_t^inf ds / ((1+s) ell(s)) = 1 / (delta (1 + log_[k] t)^delta),
  /// with t = e^x.
  double kernel_tail_at_log(double x) const;
  /// Inverse of kernel_tail_at_log: the x = log t with kernel tail y. Saturates
  /// at x = 1e300 when t is beyond double range for nested logs.
  double kernel_tail_inverse_log(double y) const;

  friend bool operator==(const SlowVaryFn&, const SlowVaryFn&) = default;

 private:
  SlowVaryFn(int k, double delta);
  int k_;
  double delta_;
};

/// theta(s) = 1 / int_s^inf du / (u ell(u)), for s >= 1, evaluated by adaptive
/// Gauss-Kronrod on a cached grid in log s plus a closed-form tail.
class ThetaFn {
 public:
  explicit ThetaFn(SlowVaryFn ell);

  const SlowVaryFn& ell() const { return ell_; }
  bool converged() const { return converged_; }

  /// theta(e^x), x >= 0.
  double at_log(double x) const;
  double operator()(double s) const;
  /// theta_2(s) = theta(s^2) / 2.
  double theta2(double s) const;
  double theta2_at_log(double x) const { return 0.5 * at_log(2.0 * x); }

  /// log of the s >= 1 with theta(s) = u, relative tolerance 1e-9 in log s;
  /// closed form beyond the cached grid. Throws DomainError when u < theta(1).
  double inverse_log(double u) const;
  double inverse(double u) const;

  /// Largest log s covered by the cached grid (s_max = e^max_log()).
  double max_log() const { return grid_step_ * static_cast<double>(suffix_.size() - 1); }

 private:
  double integral_at_log(double x) const;

  SlowVaryFn ell_;
  double grid_step_ = 0.5;
  std::vector<double> suffix_;  ///< int_{e^{x_j}}^inf du/(u ell(u))
  bool converged_ = true;
};

/// Moment functions rho: [0, inf) -> [1, inf) with rho(0) = 1.
class MomentFn {
 public:
  enum class Kind { Power, LogEps, IterLogEps, ThetaTwo };

  static MomentFn power(double alpha);
  static MomentFn log_eps(double eps);
  static MomentFn iter_log_eps(int k, double eps);
  static MomentFn theta_two(const SlowVaryFn& ell);
  /// `pow:<a>`, `logeps:<e>`, `iterlogeps:<k>:<e>`, `theta2(<ell token>)`.
  static MomentFn parse(std::string_view token);

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  int levels() const { return k_; }
  const ThetaFn* theta() const { return theta_.get(); }
  std::string token() const;

  /// rho(s). ThetaTwo is clamped below by 1 so rho(0) = 1 and rho >= 1.
  double operator()(double s) const;
  /// log of sup{r >= 0 : rho(r) <= s}; -inf when rho(0) > s, +inf when the
  /// threshold exceeds double range.
  double log_inverse(double s) const;

 private:
  MomentFn(Kind kind, double param, int k, std::shared_ptr<const ThetaFn> theta);
  Kind kind_;
  double param_;
  int k_;
  std::shared_ptr<const ThetaFn> theta_;
};

/// Decay law asserted for a family.
struct Prediction {
  enum class Regime { Polynomial, Stretched, SlowCorrection };
  Regime regime;
  /// Polynomial: exponent of n in p(2n) (negative).
  /// Stretched: exponent of n in -log p(2n), gamma / (1 + gamma) in (0, 1).
  /// SlowCorrection: the power delta in n / (log_[k-1] n)^delta.
  double exponent;
  double gamma = 0.0;  ///< Stretched only: log theta^{-1}(u) ~ u^gamma
  int k = 0;           ///< SlowCorrection only
  /// Closed-form de Bruijn conjugate of the slow factor kappa (Stretched only).
  std::function<double(double)> kappa_sharp;

  std::string describe() const;
};

/// Decay law for walks subordinated/built from ell (regime fixed per family).
Prediction predicted_decay(const SlowVaryFn& ell);
/// Decay law for the weak-moment class of rho on a group of growth degree D.
Prediction predicted_decay(const MomentFn& rho, int growth_degree);

/// Shortest round-trip decimal text of a double (used by all token printers).
std::string format_number(double v);
/// Strict parse of a decimal number; throws ParseError.
double parse_number(std::string_view text);

}  // namespace rwslow
