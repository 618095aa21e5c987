#include "rwslow/fourier.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rwslow/error.hpp"

namespace rwslow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// The 15 Kronrod nodes on [-1, 1] in increasing order with Kronrod and
/// embedded Gauss weights (0 off the Gauss nodes).
struct Nodes {
  std::array<double, 15> x{}, wk{}, wg{};
  Nodes() {
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    const auto& ax = gauss_kronrod<double, 15>::abscissa();
    const auto& kw = gauss_kronrod<double, 15>::weights();
    const auto& gw = gauss<double, 7>::weights();
    for (int i = 0; i < 8; ++i) {
      const double g = (i % 2 == 0) ? gw[i / 2] : 0.0;
      x[7 + i] = ax[i];
      x[7 - i] = -ax[i];
      wk[7 + i] = wk[7 - i] = kw[i];
      wg[7 + i] = wg[7 - i] = g;
    }
  }
};

const Nodes& nodes() {
  static const Nodes n;
  return n;
}

/// Panels stepping down from log pi with width max(h, growth |u|), and a
/// lazily filled cache of an n-independent function at their nodes.
class PanelCache {
 public:
  PanelCache(double width, double growth, std::function<double(double)> fn)
      : width_(width), growth_(growth), fn_(std::move(fn)) {
    bounds_.push_back(std::log(kPi));
  }

  double hi(std::int64_t j) { return bound(j); }
  double lo(std::int64_t j) { return bound(j + 1); }
  double width(std::int64_t j) { return bound(j) - bound(j + 1); }
  double u(std::int64_t j, int q) {
    const double h = width(j);
    return bound(j) - 0.5 * h * (1.0 - nodes().x[q]);
  }
  const std::array<double, 15>& values(std::int64_t j) {
    while (static_cast<std::int64_t>(cache_.size()) <= j) {
      const std::int64_t k = static_cast<std::int64_t>(cache_.size());
      std::array<double, 15> v{};
      for (int q = 0; q < 15; ++q) v[q] = fn_(u(k, q));
      cache_.push_back(v);
    }
    return cache_[j];
  }

 private:
  double bound(std::int64_t j) {
    while (static_cast<std::int64_t>(bounds_.size()) <= j) {
      const double b = bounds_.back();
      bounds_.push_back(b - std::max(width_, growth_ * std::abs(b)));
    }
    return bounds_[j];
  }

  double width_;
  double growth_;
  std::function<double(double)> fn_;
  std::vector<double> bounds_;
  std::vector<std::array<double, 15>> cache_;
};

double log_one_minus_exp(double lf) {
  if (lf > 1e-13) throw DomainError("negative integrand: 1 - mu_hat exceeds 1 (laziness mu(e) >= 1/2 violated)");
  if (lf >= 0.0) return kNegInf;
  return std::log1p(-std::exp(lf));
}

struct Scan {
  double log_i = kNegInf;
  double log_err = kNegInf;
  std::int64_t panels = 0;
};

/// 1-D scan of int e^{u + n L(u)} du over (-inf, log pi].
Scan scan_1d(PanelCache& log_f, std::int64_t n, const FourierOptions& opt) {
  const Nodes& nd = nodes();
  const double dn = static_cast<double>(n);
  Scan s;
  double gmax = kNegInf;
  for (std::int64_t j = 0; j < opt.max_panels; ++j) {
    const auto& lf = log_f.values(j);
    std::array<double, 15> v{};
    double m = kNegInf;
    for (int q = 0; q < 15; ++q) {
      const double l = log_one_minus_exp(lf[q]);
      v[q] = l == kNegInf ? kNegInf : log_f.u(j, q) + dn * l;
      m = std::max(m, v[q]);
    }
    const double lo = log_f.lo(j);
    const double h = log_f.width(j);
    s.panels = j + 1;
    if (m == kNegInf) continue;
    double k = 0.0, g = 0.0;
    for (int q = 0; q < 15; ++q) {
      const double e = std::exp(v[q] - m);
      k += nd.wk[q] * e;
      g += nd.wg[q] * e;
    }
    k *= 0.5 * h;
    g *= 0.5 * h;
    s.log_i = log_add(s.log_i, m + std::log(k));
    if (k != g) s.log_err = log_add(s.log_err, m + std::log(std::abs(k - g)));
    gmax = std::max(gmax, m);
    if (lo < s.log_i - opt.cutoff) {
      // int_{-inf}^{lo} e^u mu_hat^n du <= e^{lo}
      s.log_err = log_add(s.log_err, lo);
      return s;
    }
    const double slope = (v[1] - v[0]) / (log_f.u(j, 1) - log_f.u(j, 0));
    if (m < gmax - opt.cutoff && slope > 0.25) {
      const double rest = v[0] - std::log(slope);
      if (rest < s.log_i - opt.cutoff) {
        s.log_err = log_add(s.log_err, rest);
        return s;
      }
    }
  }
  throw NumericalError("Fourier quadrature did not reach the decay region within the panel budget");
}

/// Tensor-product sum over `panels` panels per axis for d = 2, 3.
Scan tensor_sum(const LogSymbol& sym, PanelCache& grid, bool separable, std::int64_t panels, std::int64_t n) {
  const Nodes& nd = nodes();
  const int d = sym.dim();
  const std::size_t m = static_cast<std::size_t>(panels) * 15;
  std::vector<double> u(m), wk(m), wg(m), lf(m);
  for (std::int64_t j = 0; j < panels; ++j) {
    for (int q = 0; q < 15; ++q) {
      const std::size_t i = static_cast<std::size_t>(j) * 15 + q;
      const double h = grid.width(j);
      u[i] = grid.u(j, q);
      wk[i] = 0.5 * h * nd.wk[q];
      wg[i] = 0.5 * h * nd.wg[q];
      if (separable) lf[i] = grid.values(j)[q];
    }
  }
  const double dn = static_cast<double>(n);
  double shift = kNegInf, sk = 0.0, sg = 0.0;
  auto add = [&](double v, double wkk, double wgg) {
    if (v == kNegInf) return;
    if (v > shift) {
      const double r = shift == kNegInf ? 0.0 : std::exp(shift - v);
      sk *= r;
      sg *= r;
      shift = v;
    }
    const double e = std::exp(v - shift);
    sk += wkk * e;
    sg += wgg * e;
  };
  std::array<double, 3> buf{};
  auto point = [&](std::span<const std::size_t> idx) {
    double usum = 0.0, wkk = 1.0, wgg = 1.0;
    for (int a = 0; a < d; ++a) {
      usum += u[idx[a]];
      wkk *= wk[idx[a]];
      wgg *= wg[idx[a]];
      buf[a] = separable ? lf[idx[a]] : u[idx[a]];
    }
    const std::span<const double> vals(buf.data(), d);
    const double l = log_one_minus_exp(separable ? sym.combine(vals) : sym.log_one_minus(vals));
    add(l == kNegInf ? kNegInf : usum + dn * l, wkk, wgg);
  };
  std::array<std::size_t, 3> idx{};
  if (d == 2) {
    for (idx[0] = 0; idx[0] < m; ++idx[0])
      for (idx[1] = 0; idx[1] < m; ++idx[1]) point(std::span<const std::size_t>(idx.data(), 2));
  } else {
    for (idx[0] = 0; idx[0] < m; ++idx[0])
      for (idx[1] = 0; idx[1] < m; ++idx[1])
        for (idx[2] = 0; idx[2] < m; ++idx[2]) point(std::span<const std::size_t>(idx.data(), 3));
  }
  Scan s;
  s.panels = panels;
  s.log_i = shift + std::log(sk);
  s.log_err = sk != sg ? shift + std::log(std::abs(sk - sg)) : kNegInf;
  // region with some coordinate below the grid: <= d e^{lo} pi^{d-1}
  const double lo = grid.lo(panels - 1);
  s.log_err = log_add(s.log_err, std::log(static_cast<double>(d)) + lo + (d - 1) * std::log(kPi));
  return s;
}

}  // namespace

double char_fn(const Measure& mu, std::span<const double> theta) {
  const Group& g = mu.group();
  if (!g.is_lattice()) throw DomainError("char_fn is defined on Z^d only");
  if (static_cast<int>(theta.size()) != g.rank()) throw DomainError("theta dimension does not match the lattice");
  double sum = 0.0, comp = 0.0;
  for (const Atom& a : mu.atoms()) {
    double phase = 0.0;
    for (int i = 0; i < g.rank(); ++i) phase += static_cast<double>(a.g.c[i]) * theta[i];
    const double v = a.mass * std::cos(phase);
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

LogSymbol::LogSymbol(const Measure& mu, bool ideal) : dim_(mu.group().rank()) {
  const Group& g = mu.group();
  if (!g.is_lattice()) throw UnsupportedError("the Fourier engine works on Z^d only");
  if (ideal && mu.profile()) {
    const auto& p = *mu.profile();
    axis_ = p.axis;
    outer_ = p.outer;
    log_inner_ = std::log(p.inner_scale);
    log_outer_ = std::log(p.outer_scale);
    return;
  }
  if (dim_ == 1) {
    axis_ = std::make_shared<LineLaw>(line_law(mu));
    return;
  }
  deficit_ = mu.deficit();
  for (const Atom& a : mu.atoms()) {
    for (int i = 0; i < dim_; ++i) {
      Element r = a.g;
      r.c[i] = -r.c[i];
      if (mu.mass(r) != a.mass) throw UnsupportedError("direct-summation symbol needs reflection symmetry per coordinate");
    }
    if (a.g == g.identity() || g.invert(a.g) < a.g) continue;
    std::array<double, 3> y{};
    double len = 0.0;
    for (int i = 0; i < dim_; ++i) {
      y[i] = static_cast<double>(a.g.c[i]);
      len += std::abs(y[i]);
    }
    radius_ = std::max(radius_, len);
    points_.push_back(y);
    weights_.push_back(2.0 * a.mass);
    for (int i = 0; i < dim_; ++i) second_[i] += 2.0 * a.mass * y[i] * y[i];
  }
}

double LogSymbol::log_axis(double u) const {
  if (!axis_) throw DomainError("symbol is not axis-separable");
  return axis_->log_one_minus_symbol(u);
}

double LogSymbol::combine(std::span<const double> lf) const {
  double m = kNegInf;
  for (double v : lf) m = std::max(m, v);
  double lx = kNegInf;
  if (m != kNegInf) {
    double s = 0.0;
    for (double v : lf) s += std::exp(v - m);
    lx = m + std::log(s / static_cast<double>(lf.size())) + log_inner_;
  }
  if (outer_) return log_outer_ + (lx == kNegInf ? kNegInf : outer_->log_value(lx));
  return log_outer_ + lx;
}

double LogSymbol::log_one_minus(std::span<const double> u) const {
  if (axis_) {
    std::array<double, 3> lf{};
    for (std::size_t i = 0; i < u.size(); ++i) lf[i] = axis_->log_one_minus_symbol(u[i]);
    return combine(std::span<const double>(lf.data(), u.size()));
  }
  double tmax = 0.0;
  for (double v : u) tmax = std::max(tmax, std::exp(v));
  if (radius_ * tmax < 1e-4) {
    // 1 - cos z = z^2/2 to relative accuracy 1e-9; reflection symmetry kills cross terms
    double out = deficit_ > 0.0 ? std::log(deficit_) : kNegInf;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (second_[i] > 0.0) out = log_add(out, std::log(0.5 * second_[i]) + 2.0 * u[i]);
    return out;
  }
  double s = deficit_;
  for (std::size_t k = 0; k < points_.size(); ++k) {
    double phase = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) phase += points_[k][i] * std::exp(u[i]);
    const double h = std::sin(0.5 * phase);
    s += weights_[k] * 2.0 * h * h;
  }
  return std::log(s);
}

ReturnSeries return_series_fourier(const Measure& mu, std::span<const std::int64_t> ns, const FourierOptions& opt) {
  const LogSymbol sym(mu, opt.ideal);
  const int d = sym.dim();
  if (d > 3) throw UnsupportedError("the Fourier engine supports d <= 3");
  ReturnSeries series;
  series.engine = "fourier";
  series.measure = mu.descriptor();

  // marginal along the first axis (other coordinates at theta = 0)
  std::function<double(double)> marginal;
  std::function<double(double)> axis_fn = [](double) { return 0.0; };
  if (sym.separable()) {
    axis_fn = [&sym](double u) { return sym.log_axis(u); };
    const double zero = sym.log_axis(-1e300);
    marginal = [&sym, d, zero](double u) {
      std::array<double, 3> lf{sym.log_axis(u), zero, zero};
      return sym.combine(std::span<const double>(lf.data(), d));
    };
  } else {
    marginal = [&sym, d](double u) {
      std::array<double, 3> uu{u, -1e300, -1e300};
      return sym.log_one_minus(std::span<const double>(uu.data(), d));
    };
  }
  PanelCache marg(opt.panel_width, opt.panel_growth, marginal);
  PanelCache axis(opt.panel_width, opt.panel_growth, axis_fn);

  for (std::int64_t n : ns) {
    if (n < 0) throw DomainError("return series needs n >= 0");
    if (n == 0) {
      series.entries.push_back({0, 0.0, 0.0, 0.0});
      continue;
    }
    Scan s = scan_1d(marg, n, opt);
    if (d > 1) {
      std::int64_t panels = s.panels + 2;
      for (int attempt = 0;; ++attempt) {
        s = tensor_sum(sym, axis, sym.separable(), panels, n);
        if (s.log_err < s.log_i - 20.0 || attempt == 4) break;
        panels = panels * 3 / 2 + 1;
      }
    }
    const double shift = d * std::log(kPi);
    const double rel = std::exp(s.log_err - s.log_i);
    SeriesEntry e{};
    e.n = n;
    e.log_p_upper = s.log_i + std::log1p(rel) - shift;
    if (rel < 1.0) {
      e.log_p_lower = s.log_i + std::log1p(-rel) - shift;
    } else {
      e.log_p_lower = kNegInf;
      series.notices.push_back("n=" + std::to_string(n) + ": quadrature error exceeds the estimate");
    }
    series.entries.push_back(e);
  }
  return series;
}

double log_theta_star(const Measure& mu, std::int64_t n, bool ideal) {
  const LogSymbol sym(mu, ideal);
  const int d = sym.dim();
  auto f = [&](double u) {
    std::array<double, 3> uu{u, -1e300, -1e300};
    return std::log(static_cast<double>(n)) + sym.log_one_minus(std::span<const double>(uu.data(), d));
  };
  double lo = -1e5, hi = std::log(kPi);
  if (f(hi) < 0.0) return hi;
  if (f(lo) > 0.0) throw NumericalError("theta* lies below e^{-1e5}");
  for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace rwslow
