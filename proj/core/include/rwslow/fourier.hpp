#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rwslow/convolution.hpp"
#include "rwslow/measures.hpp"

namespace rwslow {

/// mu_hat(theta) = sum_y mu(y) cos(y . theta) over the represented atoms
/// (compensated summation). Lattice groups only.
double char_fn(const Measure& mu, std::span<const double> theta);

/// 1 - mu_hat in the log domain, either from the analytic profile of the
/// ideal law or by direct summation over the represented atoms.
class LogSymbol {
 public:
  /// `ideal`: use the analytic profile when the measure has one.
  LogSymbol(const Measure& mu, bool ideal = true);

  int dim() const { return dim_; }
  /// Axis-separable through a one-dimensional law.
  bool separable() const { return axis_ != nullptr; }

  /// log F_axis(e^u) (separable only).
  double log_axis(double u) const;
  /// log(1 - mu_hat) from the per-axis values log F_axis(e^{u_i}).
  double combine(std::span<const double> log_axis_values) const;
  /// log(1 - mu_hat) at theta_i = e^{u_i}.
  double log_one_minus(std::span<const double> u) const;

 private:
  int dim_;
  std::shared_ptr<const LineLaw> axis_;
  std::shared_ptr<const OuterSymbol> outer_;
  double log_inner_ = 0.0;
  double log_outer_ = 0.0;
  // direct summation data (non-separable case)
  std::vector<std::array<double, 3>> points_;
  std::vector<double> weights_;  // 2 mu(y) over one representative of {y, -y}
  std::array<double, 3> second_{};
  double radius_ = 0.0;
  double deficit_ = 0.0;
};

struct FourierOptions {
  double panel_width = 0.5;    ///< in u = log theta
  double panel_growth = 0.02;  ///< panel width is max(panel_width, panel_growth |u|)
  double cutoff = 40.0;        ///< panels below max - cutoff are negligible
  bool ideal = true;           ///< use the analytic profile when present
  std::int64_t max_panels = 400000;
};

/// log p(n) = log[(2 pi)^{-d} int mu_hat^n] by Gauss-Kronrod panels in
/// u = log theta with max-shifted log accumulation. Requires mu_hat >= 0.
ReturnSeries return_series_fourier(const Measure& mu, std::span<const std::int64_t> ns,
                                   const FourierOptions& options = {});

/// log theta* with n (1 - mu_hat(theta*)) = 1 along the first axis.
double log_theta_star(const Measure& mu, std::int64_t n, bool ideal = true);

}  // namespace rwslow
