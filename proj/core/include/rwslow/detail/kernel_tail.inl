#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace rwslow {

template <class LogRatio>
double kernel_tail_integral(const SlowVaryFn& ell, LogRatio&& log_ratio, double x) {
  // With y(t) = int_t^inf ds/((1+s) ell(s)), dy = -dt/((1+t) ell(t)), so the
  // integral becomes int_0^{y(t)} r(t(y)) dy with r bounded and slowly varying.
  using boost::math::quadrature::gauss_kronrod;
  const double top = ell.kernel_tail_at_log(x);
  auto integrand = [&](double y) { return std::exp(log_ratio(ell.kernel_tail_inverse_log(y))); };
  double total = 0.0;
  double hi = top;
  for (int j = 0; j < 48; ++j) {
    const double lo = 0.5 * hi;
    total += gauss_kronrod<double, 15>::integrate(integrand, lo, hi, 0, 0.0, nullptr);
    hi = lo;
  }
  return total + hi * integrand(0.5 * hi);
}

}  // namespace rwslow
