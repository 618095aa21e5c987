#include "rwslow/lattice_law.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rwslow/error.hpp"

namespace rwslow {

namespace {

using boost::math::quadrature::gauss_kronrod;
constexpr double kPi = std::numbers::pi;

/// Value and first three derivatives (in v) of exp(G(log v)).
template <class LogFn>
std::array<double, 4> exp_log_derivatives(LogFn&& G, double s) {
  const double h = 0.02;
  double g[7];
  for (int k = -3; k <= 3; ++k) g[k + 3] = G(s + h * k);
  const double d1 = (-g[0] + 9 * g[1] - 45 * g[2] + 45 * g[4] - 9 * g[5] + g[6]) / (60 * h);
  const double d2 = (2 * g[0] - 27 * g[1] + 270 * g[2] - 490 * g[3] + 270 * g[4] - 27 * g[5] + 2 * g[6]) / (180 * h * h);
  const double d3 = (g[0] - 8 * g[1] + 13 * g[2] - 13 * g[4] + 8 * g[5] - g[6]) / (8 * h * h * h);
  const double v = std::exp(s);
  const double f = std::exp(g[3]);
  return {f, f * d1 / v, f * (d2 + d1 * d1 - d1) / (v * v),
          f * (d3 + 3 * d1 * d2 + d1 * d1 * d1 - 3 * d2 - 3 * d1 * d1 + 2 * d1) / (v * v * v)};
}

double log_kernel_ratio_shift(const SlowVaryFn& ell, double x) {
  return ell.log_at_log(x) - ell.log_at_log(softplus(x));
}

class ShiftedKernel final : public TailWeight {
 public:
  explicit ShiftedKernel(SlowVaryFn ell) : ell_(ell) {}
  double value(double t) const override { return 1.0 / ((1.0 + t) * ell_(1.0 + t)); }
  double log_value_at_log(double x) const override {
    const double l1 = softplus(x);
    return -l1 - ell_.log_at_log(l1);
  }
  double tail_integral_at_log(double x) const override {
    // int_T^inf dt/((1+t) ell(1+t)) = int_{1+T}^inf ds/(s ell(s)), r(s) = (1+s)/s
    return kernel_tail_integral(ell_, [](double xs) { return softplus(-xs); }, softplus(x));
  }
  std::string token() const override { return "shifted(" + ell_.token() + ")"; }

 private:
  SlowVaryFn ell_;
};

class GenPow final : public TailWeight {
 public:
  explicit GenPow(SlowVaryFn ell) : ell_(ell) {}
  double value(double t) const override { return 1.0 / ((1.0 + t) * ell_(1.0 + t * t)); }
  double log_value_at_log(double x) const override {
    return -softplus(x) - ell_.log_at_log(softplus(2.0 * x));
  }
  double tail_integral_at_log(double x) const override {
    const SlowVaryFn& ell = ell_;
    return kernel_tail_integral(
        ell_, [&ell](double xt) { return ell.log_at_log(xt) - ell.log_at_log(softplus(2.0 * xt)); }, x);
  }
  std::string token() const override { return "genpow(" + ell_.token() + ")"; }

 private:
  SlowVaryFn ell_;
};

class RadialVolume final : public TailWeight {
 public:
  explicit RadialVolume(SlowVaryFn ell) : ell_(ell) {}
  double value(double t) const override { return 1.0 / ((2.0 * t + 3.0) * ell_(1.0 + t)); }
  double log_value_at_log(double x) const override {
    const double lv = x > 0.0 ? std::log(2.0) + x + std::log1p(1.5 * std::exp(-x)) : std::log(2.0 * std::exp(x) + 3.0);
    return -lv - ell_.log_at_log(softplus(x));
  }
  double tail_integral_at_log(double x) const override {
    const SlowVaryFn& ell = ell_;
    return kernel_tail_integral(
        ell_,
        [&ell](double xt) {
          return -std::log(2.0 + std::exp(-softplus(xt))) + log_kernel_ratio_shift(ell, xt);
        },
        x);
  }
  std::string token() const override { return "radialV(" + ell_.token() + ")"; }

 private:
  SlowVaryFn ell_;
};

class Stable final : public TailWeight {
 public:
  explicit Stable(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable index must lie in (0, 2)");
  }
  double value(double t) const override { return std::pow(1.0 + t, -1.0 - alpha_); }
  double log_value_at_log(double x) const override { return -(1.0 + alpha_) * softplus(x); }
  double tail_integral_at_log(double x) const override { return std::exp(-alpha_ * softplus(x)) / alpha_; }
  std::string token() const override { return "stable(" + format_number(alpha_) + ")"; }

 private:
  double alpha_;
};

constexpr std::int64_t kDirectTerms = 1000;
constexpr std::int64_t kNormalizerTerms = 4096;

}  // namespace

double TailWeight::tail_integral(double t) const {
  if (!(t > 0.0)) return tail_integral_at_log(-745.0);
  return tail_integral_at_log(std::log(t));
}

std::array<double, 3> TailWeight::derivatives(double t) const {
  const auto d = exp_log_derivatives([this](double s) { return log_value_at_log(s); }, std::log(t));
  return {d[1], d[2], d[3]};
}

double TailWeight::sum_beyond(std::int64_t n) const {
  if (n < 0) throw DomainError("sum_beyond needs n >= 0");
  double direct = 0.0;
  std::int64_t m = n;
  if (m < 64) {
    for (std::int64_t k = 64; k > n; --k) direct += value(static_cast<double>(k));
    m = 64;
  }
  const double b = static_cast<double>(m) + 0.5;
  const auto d = derivatives(b);
  return direct + tail_integral(b) + d[0] / 24.0 - 7.0 / 5760.0 * d[2];
}

std::shared_ptr<const TailWeight> shifted_kernel_weight(const SlowVaryFn& ell) {
  return std::make_shared<ShiftedKernel>(ell);
}
std::shared_ptr<const TailWeight> genpow_weight(const SlowVaryFn& ell) { return std::make_shared<GenPow>(ell); }
std::shared_ptr<const TailWeight> radial_volume_weight(const SlowVaryFn& ell) {
  return std::make_shared<RadialVolume>(ell);
}
std::shared_ptr<const TailWeight> stable_weight(double alpha) { return std::make_shared<Stable>(alpha); }

// ---------------------------------------------------------------------------

LineLaw LineLaw::finite(std::vector<double> masses, double deficit) {
  if (masses.empty()) throw DomainError("line law needs at least the mass at 0");
  LineLaw law;
  for (double m : masses)
    if (!(m >= 0.0)) throw DomainError("line law masses must be non-negative");
  if (!(deficit >= 0.0)) throw DomainError("deficit must be non-negative");
  law.masses_ = std::move(masses);
  law.deficit_ = deficit;
  for (std::size_t n = 1; n < law.masses_.size(); ++n)
    law.second_moment_ += law.masses_[n] * static_cast<double>(n) * static_cast<double>(n);
  return law;
}

LineLaw LineLaw::kernel(std::shared_ptr<const TailWeight> weight) {
  if (!weight) throw DomainError("null tail weight");
  LineLaw law;
  law.weight_ = std::move(weight);
  double s = 0.0;
  for (std::int64_t n = kNormalizerTerms; n >= 1; --n) s += law.weight_->value(static_cast<double>(n));
  s += law.weight_->sum_beyond(kNormalizerTerms);
  law.c_ = 1.0 / (law.weight_->value(0.0) + 2.0 * s);
  law.masses_.resize(kDirectTerms + 1);
  for (std::int64_t n = 0; n <= kDirectTerms; ++n) law.masses_[n] = law.c_ * law.weight_->value(static_cast<double>(n));
  return law;
}

double LineLaw::mass(std::int64_t n) const {
  const std::int64_t a = n < 0 ? -n : n;
  if (weight_) {
    if (a <= kDirectTerms) return masses_[a];
    return c_ * weight_->value(static_cast<double>(a));
  }
  return a < static_cast<std::int64_t>(masses_.size()) ? masses_[a] : 0.0;
}

double LineLaw::tail_beyond(std::int64_t r) const {
  if (r < 0) return 1.0;
  if (weight_) return 2.0 * c_ * weight_->sum_beyond(r);
  double s = deficit_;
  for (std::size_t n = masses_.size(); n-- > static_cast<std::size_t>(r) + 1;) s += 2.0 * masses_[n];
  return s;
}

double LineLaw::tail_beyond_log(double x) const {
  if (x < 34.0) return tail_beyond(static_cast<std::int64_t>(std::floor(std::exp(x))));
  if (!weight_) return deficit_;
  return 2.0 * c_ * weight_->tail_integral_at_log(x);
}

double LineLaw::truncated_second_moment(std::int64_t r) const {
  double s = 0.0;
  for (std::int64_t n = 1; n <= r; ++n) {
    const double m = mass(n);
    if (!weight_ && m == 0.0 && n >= static_cast<std::int64_t>(masses_.size())) break;
    s += 2.0 * m * static_cast<double>(n) * static_cast<double>(n);
  }
  return s;
}

double LineLaw::kernel_one_minus_symbol(double u) const {
  const TailWeight& w = *weight_;
  const double theta = std::exp(u);
  double direct = 0.0;
  for (std::int64_t n = kDirectTerms; n >= 1; --n) {
    const double s = std::sin(0.5 * static_cast<double>(n) * theta);
    direct += masses_[n] * 2.0 * s * s;
  }
  direct /= c_;

  // Continuous remainder int_b^inf w(t) (1 - cos t theta) dt in v = t theta.
  const double b = static_cast<double>(kDirectTerms) + 0.5;
  const double lb = std::log(b) + u;
  auto lg = [&w, u](double s) { return w.log_value_at_log(s - u) - u; };
  double area = 0.0;
  double v0 = std::exp(lb);
  if (lb < 0.0) {
    auto f = [&lg](double s) {
      const double v = std::exp(s);
      const double h = std::sin(0.5 * v);
      return std::exp(lg(s) + s) * 2.0 * h * h;
    };
    double lo = std::max(lb, -60.0);
    const double width = 1.0;
    while (lo < 0.0) {
      const double hi = std::min(0.0, lo + width);
      area += gauss_kronrod<double, 15>::integrate(f, lo, hi, 0, 0.0, nullptr);
      lo = hi;
    }
    v0 = 1.0;
  }
  const double top = 2.0 * kPi * (std::ceil(std::exp(lb) / (2.0 * kPi)) + 16.0);
  {
    auto f = [&lg](double v) {
      const double h = std::sin(0.5 * v);
      return std::exp(lg(std::log(v))) * 2.0 * h * h;
    };
    const int panels = static_cast<int>(std::ceil((top - v0) / kPi));
    const double width = (top - v0) / panels;
    for (int j = 0; j < panels; ++j) {
      const double lo = v0 + width * j;
      area += gauss_kronrod<double, 15>::integrate(f, lo, lo + width, 0, 0.0, nullptr);
    }
  }
  const double ltop = std::log(top);
  const auto gd = exp_log_derivatives(lg, ltop);
  area += w.tail_integral_at_log(ltop - u) + gd[1] - gd[3];

  // Midpoint Euler-Maclaurin correction at b.
  const auto wd = w.derivatives(b);
  const double wb = w.value(b);
  const double half = std::sin(0.5 * b * theta);
  const double omc = 2.0 * half * half;
  const double sn = std::sin(b * theta);
  const double cs = std::cos(b * theta);
  const double f1 = wd[0] * omc + wb * theta * sn;
  const double f3 = wd[2] * omc + 3.0 * wd[1] * theta * sn + 3.0 * wd[0] * theta * theta * cs -
                    wb * theta * theta * theta * sn;
  return 2.0 * c_ * (direct + area + f1 / 24.0 - 7.0 / 5760.0 * f3);
}

double LineLaw::log_one_minus_symbol(double u) const {
  if (u < -1e6) return deficit_ > 0.0 ? std::log(deficit_) : -std::numeric_limits<double>::infinity();
  if (weight_) return std::log(kernel_one_minus_symbol(u));
  const double radius = static_cast<double>(masses_.size() - 1);
  if (radius == 0.0) return std::log(deficit_);
  if (radius * std::exp(u) < 1e-4) {
    const double quad = 2.0 * u + std::log(second_moment_);
    if (deficit_ <= 0.0) return quad;
    const double ld = std::log(deficit_);
    const double m = std::max(quad, ld);
    return m + std::log(std::exp(quad - m) + std::exp(ld - m));
  }
  const double theta = std::exp(u);
  double s = deficit_;
  for (std::size_t n = masses_.size() - 1; n >= 1; --n) {
    const double h = std::sin(0.5 * static_cast<double>(n) * theta);
    s += 4.0 * masses_[n] * h * h;
  }
  return std::log(s);
}

std::string LineLaw::describe() const {
  std::ostringstream os;
  if (weight_)
    os << "kernel " << weight_->token() << " c=" << format_number(c_);
  else
    os << "finite radius " << masses_.size() - 1 << " deficit=" << format_number(deficit_);
  return os.str();
}

}  // namespace rwslow
