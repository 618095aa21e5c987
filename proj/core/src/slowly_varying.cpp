#include "rwslow/slowly_varying.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "rwslow/error.hpp"

namespace rwslow {

namespace {

constexpr double kThetaMaxLog = 700.0;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view text) {
  text = trim(text);
  int v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw ParseError("expected integer, got '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

double parse_number(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty()) {
    throw ParseError("expected number, got '" + std::string(text) + "'");
  }
  return v;
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double iterated_log(int k, double t) {
  double v = t;
  for (int j = 0; j < k; ++j) v = std::log1p(v);
  return v;
}

// ---------------------------------------------------------------------------

SlowVaryFn::SlowVaryFn(int k, double delta) : k_(k), delta_(delta) {
  if (k < 1) throw DomainError("iterated-log depth must be >= 1");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DomainError("slowly varying exponent delta must be > 0 for int dt/(t ell(t)) < inf");
  }
}

SlowVaryFn SlowVaryFn::log_power(double delta) { return SlowVaryFn(1, delta); }

SlowVaryFn SlowVaryFn::iter_log(int k, double delta) {
  if (k < 2) throw DomainError("iterlog family needs k >= 2");
  return SlowVaryFn(k, delta);
}

SlowVaryFn SlowVaryFn::parse(std::string_view token) {
  token = trim(token);
  if (token.starts_with("logpow:")) return log_power(parse_number(token.substr(7)));
  if (token.starts_with("iterlog:")) {
    auto rest = token.substr(8);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw ParseError("iterlog needs k and delta: '" + std::string(token) + "'");
    return iter_log(parse_int(rest.substr(0, colon)), parse_number(rest.substr(colon + 1)));
  }
  throw ParseError("unknown slowly varying family '" + std::string(token) + "'");
}

std::string SlowVaryFn::token() const {
  if (k_ == 1) return "logpow:" + format_number(delta_);
  return "iterlog:" + std::to_string(k_) + ":" + format_number(delta_);
}

double SlowVaryFn::operator()(double t) const {
  double level = t;
  double prod = 1.0;
  for (int j = 1; j <= k_; ++j) {
    level = std::log1p(level);
    prod *= (j < k_) ? (1.0 + level) : std::pow(1.0 + level, 1.0 + delta_);
  }
  return prod;
}

double SlowVaryFn::log_at_log(double x) const {
  double level = softplus(x);  // log_[1] t = log(1 + t)
  double out = 0.0;
  for (int j = 1; j <= k_; ++j) {
    if (j > 1) level = std::log1p(level);
    out += (j < k_) ? std::log1p(level) : (1.0 + delta_) * std::log1p(level);
  }
  return out;
}

double SlowVaryFn::kernel_tail_at_log(double x) const {
  double level = softplus(x);
  for (int j = 2; j <= k_; ++j) level = std::log1p(level);
  return 1.0 / (delta_ * std::pow(1.0 + level, delta_));
}

double SlowVaryFn::kernel_tail_inverse_log(double y) const {
  if (!(y > 0.0)) return 1e300;
  double level = std::pow(delta_ * y, -1.0 / delta_) - 1.0;  // log_[k] t
  for (int j = k_; j >= 2; --j) {
    if (level > 690.0) return 1e300;
    level = std::expm1(level);
  }
  // level = log(1 + t)
  if (level > 30.0) return level + std::log1p(-std::exp(-level));
  return std::log(std::expm1(level));
}

// ---------------------------------------------------------------------------

ThetaFn::ThetaFn(SlowVaryFn ell) : ell_(std::move(ell)) {
  using boost::math::quadrature::gauss_kronrod;
  const auto n = static_cast<std::size_t>(kThetaMaxLog / grid_step_);
  suffix_.assign(n + 1, 0.0);
  const double x_top = grid_step_ * static_cast<double>(n);
  // Beyond T = e^x_top the integrand is bracketed by 1/((1+u) ell(u)) and
  // (1 + 1/T) times it; the midpoint of the bracket is exact to e^{-700}.
  suffix_[n] = ell_.kernel_tail_at_log(x_top) * (1.0 + 0.5 * std::exp(-x_top));
  auto integrand = [this](double x) { return std::exp(-ell_.log_at_log(x)); };
  for (std::size_t j = n; j-- > 0;) {
    double err = 0.0;
    const double a = grid_step_ * static_cast<double>(j);
    const double piece = gauss_kronrod<double, 15>::integrate(integrand, a, a + grid_step_, 8, 1e-13, &err);
    if (!(err <= 1e-10 * piece)) converged_ = false;
    suffix_[j] = suffix_[j + 1] + piece;
  }
}

double ThetaFn::integral_at_log(double x) const {
  if (!converged_) throw NumericalError("theta quadrature failed to converge for " + ell_.token());
  if (x < 0.0) throw DomainError("theta is evaluated for s >= 1 only");
  const double x_top = max_log();
  if (x >= x_top) return ell_.kernel_tail_at_log(x) * (1.0 + 0.5 * std::exp(-x));
  using boost::math::quadrature::gauss_kronrod;
  const auto j = static_cast<std::size_t>(x / grid_step_);
  const double b = grid_step_ * static_cast<double>(j + 1);
  auto integrand = [this](double y) { return std::exp(-ell_.log_at_log(y)); };
  double err = 0.0;
  const double head = (b > x) ? gauss_kronrod<double, 15>::integrate(integrand, x, b, 8, 1e-13, &err) : 0.0;
  return head + suffix_[j + 1];
}

double ThetaFn::at_log(double x) const { return 1.0 / integral_at_log(x); }

double ThetaFn::operator()(double s) const {
  if (!(s >= 1.0)) throw DomainError("theta is evaluated for s >= 1 only");
  return at_log(std::log(s));
}

double ThetaFn::theta2(double s) const {
  if (!(s >= 1.0)) throw DomainError("theta_2 is evaluated for s >= 1 only");
  return 0.5 * (*this)(s * s);
}

double ThetaFn::inverse_log(double u) const {
  const double lo_val = at_log(0.0);
  const double hi_val = at_log(max_log());
  if (!(u >= lo_val) || !std::isfinite(u)) {
    throw DomainError("theta_inverse: " + format_number(u) + " below theta(1) = " + format_number(lo_val));
  }
  // beyond the grid theta = 1 / kernel tail up to a factor 1 + e^{-700}
  if (u > hi_val) return std::max(max_log(), ell_.kernel_tail_inverse_log(1.0 / u));
  double lo = 0.0, hi = max_log();
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (at_log(mid) < u) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double ThetaFn::inverse(double u) const {
  const double x = inverse_log(u);
  if (x > 709.0) throw DomainError("theta_inverse result overflows double; use inverse_log");
  return std::exp(x);
}

// ---------------------------------------------------------------------------

MomentFn::MomentFn(Kind kind, double param, int k, std::shared_ptr<const ThetaFn> theta)
    : kind_(kind), param_(param), k_(k), theta_(std::move(theta)) {}

MomentFn MomentFn::power(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("power moment exponent must be > 0");
  return MomentFn(Kind::Power, alpha, 0, nullptr);
}

MomentFn MomentFn::log_eps(double eps) {
  if (!(eps > 0.0)) throw DomainError("log moment exponent must be > 0");
  return MomentFn(Kind::LogEps, eps, 1, nullptr);
}

MomentFn MomentFn::iter_log_eps(int k, double eps) {
  if (!(eps > 0.0)) throw DomainError("log moment exponent must be > 0");
  if (k < 2) throw DomainError("iterated log moment needs k >= 2");
  return MomentFn(Kind::IterLogEps, eps, k, nullptr);
}

MomentFn MomentFn::theta_two(const SlowVaryFn& ell) {
  return MomentFn(Kind::ThetaTwo, ell.delta(), ell.levels(), std::make_shared<const ThetaFn>(ell));
}

MomentFn MomentFn::parse(std::string_view token) {
  token = trim(token);
  if (token.starts_with("pow:")) return power(parse_number(token.substr(4)));
  if (token.starts_with("logeps:")) return log_eps(parse_number(token.substr(7)));
  if (token.starts_with("iterlogeps:")) {
    auto rest = token.substr(11);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw ParseError("iterlogeps needs k and eps");
    return iter_log_eps(parse_int(rest.substr(0, colon)), parse_number(rest.substr(colon + 1)));
  }
  if (token.starts_with("theta2(") && token.ends_with(")")) {
    return theta_two(SlowVaryFn::parse(token.substr(7, token.size() - 8)));
  }
  throw ParseError("unknown moment function '" + std::string(token) + "'");
}

std::string MomentFn::token() const {
  switch (kind_) {
    case Kind::Power: return "pow:" + format_number(param_);
    case Kind::LogEps: return "logeps:" + format_number(param_);
    case Kind::IterLogEps: return "iterlogeps:" + std::to_string(k_) + ":" + format_number(param_);
    case Kind::ThetaTwo: return "theta2(" + theta_->ell().token() + ")";
  }
  return {};
}

double MomentFn::operator()(double s) const {
  if (s < 0.0) throw DomainError("moment function evaluated at negative length");
  switch (kind_) {
    case Kind::Power: return std::pow(1.0 + s, param_);
    case Kind::LogEps: return std::pow(1.0 + std::log1p(s), param_);
    case Kind::IterLogEps: return std::pow(1.0 + iterated_log(k_, s), param_);
    case Kind::ThetaTwo:
      if (s <= 1.0) return std::max(1.0, theta_->theta2_at_log(0.0));
      return std::max(1.0, theta_->theta2_at_log(std::log(s)));
  }
  return 1.0;
}

double MomentFn::log_inverse(double s) const {
  const double inf = std::numeric_limits<double>::infinity();
  if (s < (*this)(0.0)) return -inf;
  auto log_expm1 = [](double level) { return level > 30.0 ? level + std::log1p(-std::exp(-level)) : std::log(std::expm1(level)); };
  switch (kind_) {
    case Kind::Power: return log_expm1(std::log(s) / param_);
    case Kind::LogEps: {
      const double level = std::pow(s, 1.0 / param_) - 1.0;
      return level > 0.0 ? log_expm1(level) : -inf;
    }
    case Kind::IterLogEps: {
      double level = std::pow(s, 1.0 / param_) - 1.0;  // log_[k] r
      if (!(level > 0.0)) return -inf;
      for (int j = k_; j >= 2; --j) {
        if (level > 700.0) return inf;
        level = std::expm1(level);
      }
      return log_expm1(level);
    }
    case Kind::ThetaTwo: {
      return 0.5 * theta_->inverse_log(2.0 * s);
    }
  }
  return -inf;
}

// ---------------------------------------------------------------------------

std::string Prediction::describe() const {
  std::ostringstream os;
  switch (regime) {
    case Regime::Polynomial: os << "polynomial p(2n) ~ n^" << exponent; break;
    case Regime::Stretched: os << "stretched -log p(2n) ~ n^" << exponent; break;
    case Regime::SlowCorrection:
      os << "slowcorrection -log p(2n) ~ n/(log_[" << (k - 1) << "] n)^" << exponent;
      break;
  }
  return os.str();
}

Prediction predicted_decay(const SlowVaryFn& ell) {
  if (ell.levels() == 1) {
    // theta(s) ~ delta (log s)^delta, so log theta^{-1}(u) ~ u^{1/delta}.
    const double gamma = 1.0 / ell.delta();
    return Prediction{Prediction::Regime::Stretched, gamma / (1.0 + gamma), gamma, 0,
                      [](double) { return 1.0; }};
  }
  return Prediction{Prediction::Regime::SlowCorrection, ell.delta(), 0.0, ell.levels(), {}};
}

Prediction predicted_decay(const MomentFn& rho, int growth_degree) {
  switch (rho.kind()) {
    case MomentFn::Kind::Power:
      if (!(rho.parameter() < 2.0)) throw UnsupportedError("power moment prediction needs alpha in (0,2)");
      return Prediction{Prediction::Regime::Polynomial, -static_cast<double>(growth_degree) / rho.parameter(), 0.0, 0, {}};
    case MomentFn::Kind::LogEps: {
      const double eps = rho.parameter();
      return Prediction{Prediction::Regime::Stretched, 1.0 / (1.0 + eps), 1.0 / eps, 0, [](double) { return 1.0; }};
    }
    case MomentFn::Kind::IterLogEps:
      return Prediction{Prediction::Regime::SlowCorrection, rho.parameter(), 0.0, rho.levels(), {}};
    case MomentFn::Kind::ThetaTwo: return predicted_decay(rho.theta()->ell());
  }
  throw UnsupportedError("unsupported moment family");
}

}  // namespace rwslow
