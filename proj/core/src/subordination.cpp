#include "rwslow/subordination.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rwslow/convolution.hpp"
#include "rwslow/error.hpp"

namespace rwslow {

namespace {

using boost::math::quadrature::gauss_kronrod;
constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// log(1 - e^{-z}) for z > 0.
double log_one_minus_exp_neg(double z) {
  if (z < 1e-8) return std::log(z) - 0.5 * z;
  return std::log(-std::expm1(-z));
}

/// log int exp(f(x)) dx over the real line for a unimodal-ish log integrand,
/// using Gauss-Kronrod panels of width `width` between the points where f
/// falls 45 below its maximum. `center` seeds the search for the maximum.
template <class LogF>
double log_integrate(LogF&& f, double center, double width, double* rel_err) {
  double xmax = center, fmax = f(center);
  for (int dir : {-1, 1}) {
    double x = center;
    for (int i = 0; i < 4000; ++i) {
      x += dir * width;
      const double v = f(x);
      if (v > fmax) { fmax = v; xmax = x; }
      else if (v < fmax - 45.0) break;
    }
  }
  if (!std::isfinite(fmax)) {
    if (rel_err) *rel_err = 0.0;
    return kNegInf;
  }
  double lo = xmax, hi = xmax;
  for (int i = 0; i < 100000 && f(lo) > fmax - 45.0; ++i) lo -= width;
  for (int i = 0; i < 100000 && f(hi) > fmax - 45.0; ++i) hi += width;
  auto g = [&](double x) { return std::exp(f(x) - fmax); };
  double total = 0.0, err_total = 0.0;
  for (double a = lo; a < hi; a += width) {
    double err = 0.0;
    total += gauss_kronrod<double, 15>::integrate(g, a, a + width, 12, 1e-13, &err);
    err_total += err;
  }
  if (rel_err) *rel_err = total > 0.0 ? err_total / total : 1.0;
  return fmax + std::log(total);
}

double levy_coefficient(const BernsteinRep& rep, std::int64_t n, double* rel_err) {
  const double dn = static_cast<double>(n);
  const double lg = std::lgamma(dn + 1.0);
  auto f = [&](double x) {
    if (x > 700.0) return kNegInf;
    return dn * x - std::exp(x) + rep.log_density_at_log(x) + x - lg;
  };
  const double width = std::min(1.0, 1.0 / std::sqrt(dn + 1.0));
  return std::exp(log_integrate(f, std::log(dn + 0.5), width, rel_err));
}

}  // namespace

// ---------------------------------------------------------------------------

BernsteinRep BernsteinRep::sqrt_rep() {
  BernsteinRep r;
  const double c = -std::log(2.0 * std::sqrt(kPi));
  r.log_density_ = [c](double x) { return -1.5 * x + c; };
  r.name_ = "sqrt";
  return r;
}

BernsteinRep BernsteinRep::stable_rep(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("stable Bernstein index must lie in (0, 1)");
  BernsteinRep r;
  const double c = std::log(alpha) - std::lgamma(1.0 - alpha);
  r.log_density_ = [c, alpha](double x) { return -(1.0 + alpha) * x + c; };
  r.name_ = "stable:" + format_number(alpha);
  return r;
}

BernsteinRep BernsteinRep::log2_rep() {
  BernsteinRep r;
  const double c = -std::log(std::log(2.0));
  r.log_density_ = [c](double x) { return x > 700.0 ? kNegInf : -std::exp(x) - x + c; };
  r.name_ = "log2";
  return r;
}

BernsteinRep BernsteinRep::drift_only(double b) {
  if (!(b >= 0.0)) throw DomainError("drift must be >= 0");
  BernsteinRep r;
  r.b_ = b;
  r.name_ = b == 1.0 ? "drift" : "drift:" + format_number(b);
  return r;
}

BernsteinRep BernsteinRep::custom(double a, double b, LogDensity log_density, std::string name, bool normalize) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("killing and drift must be >= 0");
  BernsteinRep r;
  r.a_ = a;
  r.b_ = b;
  r.log_density_ = std::move(log_density);
  r.name_ = std::move(name);
  if (r.log_density_) {
    // int t m(t) / (1+t) dt < inf, checked on the log scale
    double err = 0.0;
    const double li = log_integrate(
        [&r](double x) { return r.log_density_(x) + 2.0 * x - softplus(x); }, 0.0, 1.0, &err);
    if (!std::isfinite(li) || err > 1e-6) throw DomainError("Levy density fails int t m(t)/(1+t) dt < inf");
    if (normalize) {
      const double rest = 1.0 - a - b;
      if (!(rest > 0.0)) throw DomainError("cannot normalize psi(1) = 1 with a + b >= 1");
      const double levy = std::exp(r.log_psi_at_log(0.0)) - a - b;
      r.log_scale_ = std::log(rest / levy);
    }
  } else if (normalize && std::abs(a + b - 1.0) > 1e-12) {
    throw DomainError("a pure drift/killing representation needs a + b = 1 for psi(1) = 1");
  }
  return r;
}

BernsteinRep BernsteinRep::parse(std::string_view token) {
  if (token == "sqrt") return sqrt_rep();
  if (token == "log2") return log2_rep();
  if (token == "drift") return drift_only(1.0);
  if (token.starts_with("stable:")) return stable_rep(parse_number(token.substr(7)));
  throw ParseError("unknown Levy representation '" + std::string(token) + "'");
}

double BernsteinRep::log_density_at_log(double x) const {
  if (!log_density_) return kNegInf;
  return log_density_(x) + log_scale_;
}

double BernsteinRep::log_psi_at_log(double y) const {
  double out = a_ > 0.0 ? std::log(a_) : kNegInf;
  if (b_ > 0.0) out = log_add(out, std::log(b_) + y);
  if (log_density_) {
    auto f = [this, y](double x) {
      return log_one_minus_exp_neg(std::exp(y + x)) + log_density_at_log(x) + x;
    };
    out = log_add(out, log_integrate(f, -y, 1.0, nullptr));
  }
  return out;
}

double BernsteinRep::psi(double s) const {
  if (!(s >= 0.0)) throw DomainError("psi is evaluated for s >= 0");
  if (s == 0.0) return a_;
  return std::exp(log_psi_at_log(std::log(s)));
}

// ---------------------------------------------------------------------------

double SubordCoeffs::operator()(std::int64_t n) const {
  if (n < 1) throw DomainError("coefficients are indexed from 1");
  if (static_cast<std::size_t>(n) <= c.size()) return c[n - 1];
  switch (source) {
    case Source::Alpha:
      if (alpha == 1.0) return 0.0;
      return std::exp(std::log(alpha) + std::lgamma(n - alpha) - std::lgamma(1.0 - alpha) - std::lgamma(n + 1.0));
    case Source::Levy: return levy_coefficient(*rep, n, nullptr);
    case Source::Direct: return shifted_kernel_weight(*ell)->value(static_cast<double>(n)) / normalizer;
  }
  return 0.0;
}

std::string SubordCoeffs::token() const {
  switch (source) {
    case Source::Alpha: return "alpha:" + format_number(alpha);
    case Source::Levy: return "levy:" + rep->name();
    case Source::Direct: return "direct(" + ell->token() + ")";
  }
  return {};
}

SubordCoeffs coeffs_alpha(double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  if (n < 1) throw DomainError("N must be >= 1");
  SubordCoeffs out;
  out.source = SubordCoeffs::Source::Alpha;
  out.alpha = alpha;
  out.c.resize(n);
  out.c[0] = alpha;
  for (std::size_t k = 1; k < n; ++k) out.c[k] = out.c[k - 1] * (static_cast<double>(k) - alpha) / (k + 1.0);
  double sum = 0.0, comp = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double t = sum + out.c[k];
    comp += (sum - t) + out.c[k];
    sum = t;
  }
  out.tail = std::max(0.0, (1.0 - sum) - comp);
  return out;
}

SubordCoeffs coeffs_from_levy(const BernsteinRep& rep, std::size_t n) {
  if (n < 1) throw DomainError("N must be >= 1");
  if (rep.killing() != 0.0) throw DomainError("coefficient quadrature needs psi(0) = 0");
  const double psi1 = std::exp(rep.log_psi_at_log(0.0));
  if (std::abs(psi1 - 1.0) > 1e-6) throw DomainError("Levy representation is not normalized: psi(1) = " + format_number(psi1));
  SubordCoeffs out;
  out.source = SubordCoeffs::Source::Levy;
  out.rep = std::make_shared<const BernsteinRep>(rep);
  out.c.assign(n, 0.0);
  if (rep.has_density()) {
    for (std::size_t k = 1; k <= n; ++k) {
      double err = 0.0;
      out.c[k - 1] = levy_coefficient(rep, static_cast<std::int64_t>(k), &err);
      if (!(err <= 1e-8)) ++out.quadrature_failures;
    }
  }
  out.c[0] += rep.drift();

  // Independent tail: sum_{n>N} t^n e^{-t}/n! = P(N+1, t) (regularized gamma).
  double tail = 0.0;
  if (rep.has_density()) {
    const double a = static_cast<double>(n) + 1.0;
    auto f = [&](double x) {
      if (x > 700.0) return rep.log_density_at_log(x) + x;
      const double p = boost::math::gamma_p(a, std::exp(x));
      return (p > 0.0 ? std::log(p) : kNegInf) + rep.log_density_at_log(x) + x;
    };
    tail = std::exp(log_integrate(f, std::log(a), std::min(1.0, 2.0 / std::sqrt(a)), nullptr));
  }
  double sum = 0.0;
  for (std::size_t k = n; k-- > 0;) sum += out.c[k];
  out.tail = tail;
  out.normalization_error = std::abs(sum + tail - 1.0);
  return out;
}

SubordCoeffs coeffs_direct(const SlowVaryFn& ell, std::size_t n) {
  if (n < 1) throw DomainError("N must be >= 1");
  auto w = shifted_kernel_weight(ell);
  SubordCoeffs out;
  out.source = SubordCoeffs::Source::Direct;
  out.ell = ell;
  out.c.resize(n);
  double z = 0.0;
  for (std::size_t k = n; k >= 1; --k) {
    out.c[k - 1] = w->value(static_cast<double>(k));
    z += out.c[k - 1];
  }
  const double rest = w->sum_beyond(static_cast<std::int64_t>(n));
  z += rest;
  for (double& v : out.c) v /= z;
  out.normalizer = z;
  out.tail = rest / z;
  return out;
}

SubordCoeffs coeffs_from_token(std::string_view token, std::size_t n) {
  if (token.starts_with("alpha:")) return coeffs_alpha(parse_number(token.substr(6)), n);
  if (token.starts_with("levy:")) return coeffs_from_levy(BernsteinRep::parse(token.substr(5)), n);
  if (token.starts_with("direct(") && token.ends_with(")")) {
    return coeffs_direct(SlowVaryFn::parse(token.substr(7, token.size() - 8)), n);
  }
  throw ParseError("unknown coefficient token '" + std::string(token) + "'");
}

// ---------------------------------------------------------------------------

namespace {

class AlphaOuter final : public OuterSymbol {
 public:
  explicit AlphaOuter(double a) : a_(a) {}
  double value(double lx) const override { return lx >= 0.0 ? 1.0 : std::exp(a_ * lx); }
  double log_value(double lx) const override { return std::min(0.0, a_ * lx); }

 private:
  double a_;
};

class LevyOuter final : public OuterSymbol {
 public:
  explicit LevyOuter(std::shared_ptr<const BernsteinRep> rep) : rep_(std::move(rep)) {}
  double value(double lx) const override { return lx >= 0.0 ? 1.0 : std::exp(rep_->log_psi_at_log(lx)); }
  double log_value(double lx) const override { return lx >= 0.0 ? 0.0 : rep_->log_psi_at_log(lx); }

 private:
  std::shared_ptr<const BernsteinRep> rep_;
};

/// sum_n c(n) (1 - e^{-n eps}) with c(n) = w(n)/Z continued beyond N.
class DirectOuter final : public OuterSymbol {
 public:
  explicit DirectOuter(const SubordCoeffs& c)
      : c_(c.c), z_(c.normalizer), w_(shifted_kernel_weight(*c.ell)) {}

  double value(double lx) const override {
    if (lx >= 0.0) return 1.0;
    double le;
    if (lx < -30.0) {
      le = lx + std::log1p(0.5 * std::exp(lx));
    } else {
      le = std::log(-std::log1p(-std::exp(lx)));
    }
    const double eps = std::exp(le);
    double head = 0.0;
    for (std::size_t n = c_.size(); n >= 1; --n) head += c_[n - 1] * -std::expm1(-static_cast<double>(n) * eps);
    return head + tail_one_minus(le) / z_;
  }
  double log_value(double lx) const override { return std::log(value(lx)); }

 private:
  /// sum_{n>N} w(n) (1 - e^{-n eps}) given log eps.
  double tail_one_minus(double le) const {
    const TailWeight& w = *w_;
    const double b = static_cast<double>(c_.size()) + 0.5;
    const double lb = std::log(b) + le;
    const double eps = std::exp(le);
    double integral;
    if (lb >= std::log(40.0)) {
      integral = w.tail_integral(b) - w.value(b) * std::exp(-b * eps) / eps;
    } else {
      auto lg = [&w, le](double s) { return w.log_value_at_log(s - le) - le; };
      double area = 0.0;
      double v0 = std::exp(lb);
      if (lb < 0.0) {
        auto f = [&lg](double s) { return std::exp(lg(s) + s) * -std::expm1(-std::exp(s)); };
        for (double lo = std::max(lb, -60.0); lo < 0.0;) {
          const double hi = std::min(0.0, lo + 1.0);
          area += gauss_kronrod<double, 15>::integrate(f, lo, hi, 0, 0.0, nullptr);
          lo = hi;
        }
        v0 = 1.0;
      }
      auto f = [&lg](double v) { return std::exp(lg(std::log(v))) * -std::expm1(-v); };
      const int panels = static_cast<int>(std::ceil((40.0 - v0) / 2.0));
      const double width = (40.0 - v0) / panels;
      for (int j = 0; j < panels; ++j) {
        area += gauss_kronrod<double, 15>::integrate(f, v0 + j * width, v0 + (j + 1) * width, 0, 0.0, nullptr);
      }
      area += w.tail_integral_at_log(std::log(40.0) - le) - std::exp(lg(std::log(40.0)) - 40.0);
      integral = area;
    }
    const auto d = w.derivatives(b);
    const double wb = w.value(b);
    const double q = std::exp(-b * eps);
    const double f1 = d[0] * (1.0 - q) + wb * eps * q;
    const double f3 = d[2] * (1.0 - q) + 3.0 * d[1] * eps * q - 3.0 * d[0] * eps * eps * q + wb * eps * eps * eps * q;
    return integral + f1 / 24.0 - 7.0 / 5760.0 * f3;
  }

  std::vector<double> c_;
  double z_;
  std::shared_ptr<const TailWeight> w_;
};

}  // namespace

std::shared_ptr<const OuterSymbol> outer_symbol(const SubordCoeffs& coeffs) {
  switch (coeffs.source) {
    case SubordCoeffs::Source::Alpha: return std::make_shared<AlphaOuter>(coeffs.alpha);
    case SubordCoeffs::Source::Levy: return std::make_shared<LevyOuter>(coeffs.rep);
    case SubordCoeffs::Source::Direct: return std::make_shared<DirectOuter>(coeffs);
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

namespace {

/// (1/pi) int_0^pi T(theta) cos(x theta) dtheta for x = 0..cap, with the
/// Kronrod-Gauss difference as error estimate.
std::pair<std::vector<double>, double> inverse_cosine_transform(const std::function<double(double)>& t_of_log_theta,
                                                                int cap) {
  const auto& xk = gauss_kronrod<double, 15>::abscissa();
  const auto& wk = gauss_kronrod<double, 15>::weights();
  const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
  std::vector<double> kron(cap + 1, 0.0), gauss(cap + 1, 0.0);
  auto panel = [&](double lo, double hi, bool log_scale) {
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < xk.size(); ++i) {
      for (int sgn : {-1, 1}) {
        if (i == 0 && sgn == 1) continue;
        const double z = mid + sgn * half * xk[i];
        const double theta = log_scale ? std::exp(z) : z;
        const double jac = log_scale ? theta : 1.0;
        const double t = t_of_log_theta(std::log(theta)) * jac * half;
        const double wkr = wk[i] * t;
        const double wgs = (i % 2 == 0) ? wg[i / 2] * t : 0.0;
        for (int x = 0; x <= cap; ++x) {
          const double c = std::cos(x * theta);
          kron[x] += wkr * c;
          gauss[x] += wgs * c;
        }
      }
    }
  };
  const double split = std::min(0.05, 1.0 / (4.0 * std::max(cap, 1)));
  const double ls = std::log(split);
  for (double lo = -60.0; lo < ls;) {
    const double hi = std::min(ls, lo + 0.25);
    panel(lo, hi, true);
    lo = hi;
  }
  const int panels = static_cast<int>(std::ceil((kPi - split) / std::min(0.02, kPi / (8.0 * std::max(cap, 1)))));
  const double width = (kPi - split) / panels;
  for (int j = 0; j < panels; ++j) panel(split + j * width, split + (j + 1) * width, false);
  double err = 0.0;
  for (int x = 0; x <= cap; ++x) {
    kron[x] /= kPi;
    err = std::max(err, std::abs(kron[x] - gauss[x] / kPi));
  }
  return {kron, err};
}

}  // namespace

SubordResult subordinate_report(const Measure& phi, const SubordCoeffs& coeffs, int cap, SubordMode mode) {
  if (phi.identity_mass() <= 0.0) throw DomainError("subordinate needs phi(e) > 0");
  if (!phi.is_symmetric()) throw DomainError("subordinate needs a symmetric base measure");
  const Group& g = phi.group();
  CapWalker walker(phi, cap);
  const Ball& b = walker.ball();
  std::vector<double> cur = walker.identity(), next, acc(b.size(), 0.0);
  std::size_t active = 1;
  double d = 0.0, dsum = 0.0;
  const double dphi = phi.deficit();
  const std::size_t n = coeffs.size();
  for (std::size_t k = 1; k <= n; ++k) {
    const double pushed = walker.step(cur, next, active);
    d = d + dphi - d * dphi + pushed;
    cur.swap(next);
    const double ck = coeffs.c[k - 1];
    if (ck == 0.0) continue;
    for (std::size_t i = 0; i < active; ++i) acc[i] += ck * cur[i];
    dsum += ck * d;
  }
  // sup_x phi^(m)(x) <= phi^(2 floor(m/2))(e) for symmetric phi
  const double peak = std::min(1.0, cur[0] + d);

  SubordResult res{Measure(g, {{g.identity(), 1.0}}, 0.0, ""), 0.0};
  std::vector<Atom> atoms;
  atoms.reserve(b.size());
  double deficit;
  if (mode == SubordMode::Truncate) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const std::int64_t j = b.index_of(g.invert(b.elements()[i]));
      const double m = 0.5 * (acc[i] + acc[j]);
      if (m > 0.0) atoms.push_back({b.elements()[i], m});
    }
    double csum = 0.0;
    for (std::size_t k = n; k-- > 0;) csum += coeffs.c[k];
    const double tail = std::max(0.0, 1.0 - csum);
    deficit = tail + dsum;
    res.pointwise_error = tail * peak + dsum;
  } else {
    const auto& p = phi.profile();
    if (!(g.is_lattice() && g.rank() == 1) || !p || p->outer) {
      throw UnsupportedError("complete subordination needs a measure on Z with an analytic profile");
    }
    const auto outer = outer_symbol(coeffs);
    const double scale = p->inner_scale * p->outer_scale;
    const LineLaw& axis = *p->axis;
    auto t_of = [&](double u) {
      const double lf = axis.log_one_minus_symbol(u) + std::log(scale);
      const double y = 1.0 - std::exp(lf);
      double head = 0.0;
      for (std::size_t k = n; k >= 1; --k) head = (head + coeffs.c[k - 1]) * y;
      return (1.0 - outer->value(lf)) - head;
    };
    auto [extra, qerr] = inverse_cosine_transform(t_of, cap);
    for (std::size_t i = 0; i < b.size(); ++i) {
      const std::int64_t x = b.elements()[i].c[0];
      const std::int64_t j = b.index_of(g.invert(b.elements()[i]));
      const double m = 0.5 * (acc[i] + acc[j]) + extra[std::abs(x)];
      if (m < 0.0) throw NumericalError("complete subordination produced a negative mass");
      if (m > 0.0) atoms.push_back({b.elements()[i], m});
    }
    double total = 0.0;
    for (const Atom& a : atoms) total += a.mass;
    deficit = std::max(0.0, 1.0 - total);
    res.pointwise_error = qerr + dsum;
  }
  const std::string desc = "subord(" + coeffs.token() + ",base=" + phi.descriptor() + "," + std::to_string(n) + "," +
                           std::to_string(cap) + (mode == SubordMode::Complete ? ",complete)" : ")");
  res.measure = Measure(g, std::move(atoms), deficit, desc, cap);
  if (auto p = phi.profile(); p && !p->outer) {
    LatticeProfile q = *p;
    q.inner_scale = p->inner_scale * p->outer_scale;
    q.outer_scale = 1.0;
    q.outer = outer_symbol(coeffs);
    q.outer_token = coeffs.token();
    res.measure.set_profile(std::move(q));
  }
  return res;
}

Measure subordinate(const Measure& phi, const SubordCoeffs& coeffs, int cap, SubordMode mode) {
  return subordinate_report(phi, coeffs, cap, mode).measure;
}

}  // namespace rwslow
