#include "rwslow/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "rwslow/error.hpp"

namespace rwslow {

namespace {

struct Point {
  std::int64_t n;  ///< half the step count
  double log_p;
};

std::vector<Point> window_points(const ReturnSeries& s, FitWindow w) {
  if (w.n_min > w.n_max) throw DomainError("fit window is empty");
  std::vector<Point> pts;
  for (const auto& e : s.entries) {
    if (e.n % 2 != 0 || e.n == 0) continue;
    const std::int64_t n = e.n / 2;
    if (n < w.n_min || n > w.n_max) continue;
    if (!std::isfinite(e.log_p_lower) || !(e.log_p_upper - e.log_p_lower < 0.1))
      throw DataError("log p bounds too wide at n=" + std::to_string(e.n));
    pts.push_back({n, e.log_p_lower});
  }
  if (pts.size() < 8)
    throw DataError("insufficient data: " + std::to_string(pts.size()) + " points in the window (need 8)");
  return pts;
}

struct Line {
  double slope, intercept, rms;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DataError("fit window needs at least two distinct n");
  Line l{sxy / sxx, 0.0, 0.0};
  l.intercept = my - l.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (l.intercept + l.slope * x[i]);
    ss += r * r;
  }
  l.rms = std::sqrt(ss / m);
  return l;
}

FitResult base_result(FitModel model, const std::vector<Point>& pts, const Line& l) {
  FitResult r;
  r.model = model;
  r.exponent = l.slope;
  r.intercept = l.intercept;
  r.residual = l.rms;
  r.n_min = pts.front().n;
  r.n_max = pts.back().n;
  r.points = pts.size();
  return r;
}

double iterated_plain_log(int times, double x) {
  for (int i = 0; i < times; ++i) x = std::log(x);
  return x;
}

}  // namespace

std::string to_string(FitModel m) {
  switch (m) {
    case FitModel::PowerLaw: return "powerlaw";
    case FitModel::Stretched: return "stretched";
    case FitModel::SlowCorrection: return "slowcorr";
  }
  return "?";
}

FitWindow default_window(Prediction::Regime regime) {
  FitWindow w;
  w.n_min = regime == Prediction::Regime::Polynomial ? 16 : 1000;
  return w;
}

FitResult fit_powerlaw(const ReturnSeries& series, FitWindow window) {
  const auto pts = window_points(series, window);
  std::vector<double> x, y;
  for (const auto& p : pts) {
    x.push_back(std::log(static_cast<double>(p.n)));
    y.push_back(p.log_p);
  }
  return base_result(FitModel::PowerLaw, pts, least_squares(x, y));
}

FitResult fit_stretched(const ReturnSeries& series, FitWindow window) {
  const auto pts = window_points(series, window);
  std::vector<double> x, y;
  bool early = false;
  for (const auto& p : pts) {
    if (!(p.log_p < 0.0)) throw DataError("stretched fit needs p(2n) < 1");
    if (-p.log_p < 10.0) early = true;
    x.push_back(std::log(static_cast<double>(p.n)));
    y.push_back(std::log(-p.log_p));
  }
  FitResult r = base_result(FitModel::Stretched, pts, least_squares(x, y));
  if (early) r.warnings.push_back("pre-asymptotic: -log p < 10 inside the window");
  return r;
}

FitResult fit_slowcorrection(const ReturnSeries& series, int k, double delta, FitWindow window) {
  if (k < 2) throw DomainError("slow-correction fit needs k >= 2");
  const auto pts = window_points(series, window);
  std::vector<double> x, y;
  double qmin = HUGE_VAL, qmax = 0.0;
  for (const auto& p : pts) {
    if (!(p.log_p < 0.0)) throw DataError("slow-correction fit needs p(2n) < 1");
    const double dn = static_cast<double>(p.n);
    const double L = iterated_plain_log(k - 1, dn);
    if (!(L > 0.0)) throw DataError("iterated logarithm is not positive at n=" + std::to_string(p.n));
    const double q = -p.log_p * std::pow(L, delta) / dn;
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
    x.push_back(std::log(L));
    y.push_back(std::log(-p.log_p) - std::log(dn));
  }
  const Line l = least_squares(x, y);
  FitResult r = base_result(FitModel::SlowCorrection, pts, l);
  r.exponent = -l.slope;
  r.k = k;
  r.delta = delta;
  r.q_min = qmin;
  r.q_max = qmax;
  r.q_ratio = qmax / qmin;
  return r;
}

FitResult verdict(FitResult fit, const Prediction& prediction, const VerdictOptions& options) {
  using R = Prediction::Regime;
  const FitModel want = prediction.regime == R::Polynomial  ? FitModel::PowerLaw
                        : prediction.regime == R::Stretched ? FitModel::Stretched
                                                            : FitModel::SlowCorrection;
  if (fit.model != want)
    throw DomainError("regime mismatch: " + to_string(fit.model) + " fit against a " + to_string(want) + " prediction");
  fit.has_verdict = true;
  fit.predicted = prediction.exponent;
  if (want == FitModel::SlowCorrection) {
    fit.tolerance = options.ratio_bound;
    fit.margin = options.ratio_bound - fit.q_ratio;
  } else {
    fit.tolerance = options.exponent_tolerance;
    fit.margin = options.exponent_tolerance - std::abs(fit.exponent - prediction.exponent);
  }
  fit.pass = fit.margin >= 0.0;
  return fit;
}

FitResult verdict(const ReturnSeries& series, const Prediction& prediction, const VerdictOptions& options) {
  const FitWindow w = options.use_default_window ? default_window(prediction.regime) : options.window;
  switch (prediction.regime) {
    case Prediction::Regime::Polynomial: return verdict(fit_powerlaw(series, w), prediction, options);
    case Prediction::Regime::Stretched: return verdict(fit_stretched(series, w), prediction, options);
    case Prediction::Regime::SlowCorrection:
      return verdict(fit_slowcorrection(series, prediction.k, prediction.exponent, w), prediction, options);
  }
  throw DomainError("unknown prediction regime");
}

GjpScale::GjpScale(LineLaw law) : law_(std::move(law)) {}

double GjpScale::G(std::int64_t x) const { return law_.tail_beyond(x); }

double GjpScale::K(std::int64_t x) const {
  if (x <= 0) return 0.0;
  const double dx = static_cast<double>(x);
  return law_.truncated_second_moment(x) / (dx * dx);
}

double GjpScale::a(std::int64_t n) const {
  if (n < 1) throw DomainError("a_n needs n >= 1");
  const double target = 1.0 / static_cast<double>(n);
  // ties resolve to the right end of a flat stretch of Q
  if (Q(0) < target) return 0.0;
  if (Q(1) < target) return (Q(0) - target) / (Q(0) - Q(1));
  std::int64_t lo = 1, hi = 2;
  while (Q(hi) >= target) {
    lo = hi;
    if (hi > (std::int64_t{1} << 27)) throw BudgetError("a_n beyond 2^28");
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (Q(mid) >= target ? lo : hi) = mid;
  }
  const double ql = std::log(Q(lo)), qh = std::log(Q(hi));
  const double xl = std::log(static_cast<double>(lo)), xh = std::log(static_cast<double>(hi));
  const double t = (ql - std::log(target)) / (ql - qh);
  return std::exp(xl + t * (xh - xl));
}

std::vector<double> GjpScale::a_sequence(std::span<const std::int64_t> ns) const {
  std::vector<double> out;
  out.reserve(ns.size());
  for (std::int64_t n : ns) out.push_back(a(n));
  return out;
}

GjpScale gjp_scale(const Measure& mu) {
  if (!mu.is_symmetric()) throw DomainError("GJP scale needs a symmetric measure");
  return GjpScale(line_law(mu));
}

}  // namespace rwslow
