// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "rwslow/asymptotics.hpp"
#include "rwslow/convolution.hpp"
#include "rwslow/descriptors.hpp"
#include "rwslow/dirichlet.hpp"
#include "rwslow/fourier.hpp"
#include "rwslow/lattice_law.hpp"
#include "rwslow/subordination.hpp"

using namespace rwslow;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!ok) {
      pass = false;
      detail += " [x]";
    }
  }
};

std::string num(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

std::vector<std::int64_t> geometric_steps(double a, double b, int count) {
  std::vector<std::int64_t> ns;
  for (int i = 0; i < count; ++i) {
    const double x = a * std::pow(b / a, static_cast<double>(i) / (count - 1));
    const std::int64_t n = 2 * std::llround(x / 2.0);
    if (ns.empty() || n != ns.back()) ns.push_back(n);
  }
  return ns;
}

// every series produced here, for criterion 10
std::vector<ReturnSeries> produced;

const ReturnSeries& keep(ReturnSeries s) {
  produced.push_back(std::move(s));
  return produced.back();
}

const Group Z = Group::lattice(1);
const Group Z2 = Group::lattice(2);
const Group H = Group::heisenberg();

Outcome coefficients() {
  Outcome o;
  const auto a = coeffs_alpha(0.5, 50);
  double worst = 0.0, b = 1.0;
  for (int n = 1; n <= 50; ++n) {
    b *= (0.5 - (n - 1)) / n;
    worst = std::max(worst, std::abs(a.c[n - 1] - (n % 2 == 1 ? b : -b)));
  }
  o.check(worst <= 1e-12, "binomial err " + num(worst, 3));
  const auto l = coeffs_from_levy(BernsteinRep::sqrt_rep(), 100);
  double gw = 0.0;
  for (int n = 1; n <= 100; ++n) {
    const double g = std::exp(std::lgamma(n - 0.5) - std::lgamma(n + 1.0)) / (2.0 * std::sqrt(std::numbers::pi));
    gw = std::max(gw, std::abs(l.c[n - 1] - g));
  }
  o.check(gw <= 1e-7, "gamma err " + num(gw, 3));
  double sa = a.tail, sl = l.tail;
  for (double v : a.c) sa += v;
  for (double v : l.c) sl += v;
  o.check(std::abs(sa - 1.0) <= 1e-12, "alpha sum-1 " + num(sa - 1.0, 2));
  o.check(std::abs(sl - 1.0) <= 1e-7, "levy sum-1 " + num(sl - 1.0, 2));
  return o;
}

Outcome calibration() {
  Outcome o;
  const auto z = keep(return_series_fourier(lazy_uniform(Z), geometric_steps(512, 131072, 17)));
  const double sz = fit_powerlaw(z, {256, 65536}).exponent;
  o.check(std::abs(sz + 0.5) <= 0.05, "Z " + num(sz));
  const auto z2 = keep(return_series_fourier(lazy_uniform(Z2), geometric_steps(128, 16384, 15)));
  const double s2 = fit_powerlaw(z2, {64, 8192}).exponent;
  o.check(std::abs(s2 + 1.0) <= 0.1, "Z2 " + num(s2));
  const auto h = keep(return_series_direct(lazy_uniform(H), 200, 30));
  // at cap 30 the escaped mass keeps the bounds within 0.1 only up to 2n = 96
  const double sh = fit_powerlaw(h, {16, 48}).exponent;
  o.check(std::abs(sh + 2.0) <= 0.3, "H3 " + num(sh));
  return o;
}

Outcome stable_slopes() {
  Outcome o;
  for (auto [alpha, want, tol] : {std::tuple{0.5, -2.0, 0.3}, {1.0, -1.0, 0.15}}) {
    const auto s = keep(return_series_fourier(lazify(stable_like(Z, alpha, 100)), geometric_steps(512, 131072, 17)));
    const double e = fit_powerlaw(s, {256, 65536}).exponent;
    o.check(std::abs(e - want) <= tol, "alpha=" + num(alpha) + " " + num(e));
  }
  return o;
}

Outcome stretched() {
  Outcome o;
  const auto steps = geometric_steps(2e4, 2e6, 21);
  const Prediction p = predicted_decay(SlowVaryFn::log_power(1.0));
  VerdictOptions opt;
  opt.use_default_window = false;
  opt.window = {10000, 1000000};
  const auto g = keep(return_series_fourier(lazify(generator_power(Z, SlowVaryFn::log_power(1.0), 100)), steps));
  const auto vg = verdict(g, p, opt);
  o.check(vg.pass, "genpow " + num(vg.exponent));
  const Measure sub = subordinate(lazy_uniform(Z), coeffs_direct(SlowVaryFn::log_power(1.0), 1000), 50);
  const auto s = keep(return_series_fourier(sub, steps));
  const auto vs = verdict(s, p, opt);
  o.check(vs.pass, "subordinated " + num(vs.exponent));
  return o;
}

Outcome slow_correction() {
  Outcome o;
  const auto s = keep(return_series_fourier(lazify(generator_power(Z, SlowVaryFn::iter_log(2, 1.0), 100)),
                                            geometric_steps(2e4, 2e6, 21)));
  const auto f = fit_slowcorrection(s, 2, 1.0, {10000, 1000000});
  o.check(f.q_ratio <= 3.0, "q max/min " + num(f.q_ratio));
  return o;
}

Outcome profile() {
  Outcome o;
  const auto ell = SlowVaryFn::log_power(1.0);
  const auto r = subordinate_report(lazy_uniform(Z), coeffs_direct(ell, 500), 120, SubordMode::Complete);
  double lo = HUGE_VAL, hi = 0.0, min_mass = HUGE_VAL;
  for (std::int64_t x = 1; x <= 100; ++x) {
    const double m = r.measure.mass(Element{{x, 0, 0}});
    const double q = m * (1.0 + x) * ell(1.0 + double(x) * double(x));
    lo = std::min(lo, q);
    hi = std::max(hi, q);
    min_mass = std::min(min_mass, m);
  }
  o.check(hi / lo <= 10.0, "ratio " + num(hi / lo));
  const double rel = r.pointwise_error / min_mass;
  o.check(rel < 1e-6, "relative deficit " + num(rel, 3));
  return o;
}

Outcome poincare() {
  Outcome o;
  for (const Group& g : {Z, H}) {
    const auto suite = standard_suite(g, 16, 50, 1);
    std::size_t v = 0;
    double worst = 0.0;
    for (const char* phi : {"lazy", "stable(1,1000)", "genpow(logpow:1,1000)"}) {
      const auto r = pseudo_poincare_report(g, PowerMode{0, 50}, parse_measure(Z, phi), suite);
      v += r.violations;
      for (const auto& rec : r.records) worst = std::max(worst, rec.lhs / (16.0 * r.c_mono * rec.dirichlet * rec.branch_H));
    }
    o.check(v == 0, g.name() + " violations " + std::to_string(v) + " worst " + num(worst, 3));
  }
  return o;
}

Outcome stability() {
  Outcome o;
  const auto ell = SlowVaryFn::log_power(1.0);
  const Measure mu = generator_power(H, ell, 50);
  const Measure nu = radial(H, ell, RadialVariant::Volume, 12);
  const double c8 = dirichlet_comparison(mu, nu, standard_suite(H, 8, 50, 1)).c_hat;
  const double c12 = dirichlet_comparison(mu, nu, standard_suite(H, 12, 100, 1)).c_hat;
  const double change = std::max(c8, c12) / std::min(c8, c12);
  o.check(change < 2.0, "C8 " + num(c8) + " C12 " + num(c12));
  return o;
}

Outcome weak_moment_profile() {
  Outcome o;
  const auto ell = SlowVaryFn::log_power(1.0);
  const Measure m = radial(Z, ell, RadialVariant::Degree, 1000);
  std::vector<double> grid;
  for (int j = 1; j <= 60; ++j) grid.push_back(std::ldexp(1.0, j));
  auto v = ideal_weak_profile(m, MomentFn::theta_two(ell), grid);
  std::sort(v.begin(), v.end());
  const double r = v.back() / v[v.size() / 2];
  o.check(v.front() > 0.0 && r <= 4.0, "max/median " + num(r));
  return o;
}

Outcome engines_and_structure() {
  Outcome o;
  double worst = 0.0;
  for (const Group& g : {Z, Z2}) {
    std::vector<std::int64_t> ns;
    for (std::int64_t n = 2; n <= 64; n += 2) ns.push_back(n);
    const int r = g.rank() == 1 ? 20 : 4;
    for (const Measure& m : {lazy_uniform(g), lazify(stable_like(g, 1.0, r))}) {
      // cap = 64 steps times the largest jump, so the direct engine is exact
      const auto f = keep(return_series_fourier(m, ns, FourierOptions{.ideal = false}));
      const auto d = keep(return_series_direct(m, 64, 64 * static_cast<int>(m.radius())));
      for (const auto& e : f.entries) worst = std::max(worst, std::abs(e.log_p_lower - d.find(e.n)->log_p_lower));
    }
  }
  o.check(worst <= 1e-4, "max |delta log p| " + num(worst, 3));
  std::size_t bad = 0;
  for (const auto& s : produced) {
    const StructureReport r = check_structure(s, 1e-10);
    if (!r.monotone || !r.log_convex) ++bad;
  }
  o.check(bad == 0, std::to_string(produced.size()) + " series, " + std::to_string(bad) + " irregular");
  return o;
}

Outcome gjp() {
  Outcome o;
  const GjpScale st(LineLaw::kernel(stable_weight(1.0)));
  double lo = HUGE_VAL, hi = 0.0;
  for (std::int64_t x = 10; x <= 1000; ++x) {
    const double r = st.G(x) / st.K(x);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  o.check(lo >= 0.125 && hi <= 8.0, "stable G/K in [" + num(lo) + ", " + num(hi) + "]");
  const GjpScale lp(LineLaw::kernel(genpow_weight(SlowVaryFn::log_power(1.0))));
  const double r = lp.G(10000) / lp.K(10000);
  o.check(r > 5.0, "logpow G/K(1e4) " + num(r));
  const GjpScale lazy = gjp_scale(lazy_uniform(Z));
  double worst = 0.0;
  for (std::int64_t n : {2, 4, 10, 100, 1000, 10000, 1000000}) worst = std::max(worst, std::abs(lazy.a(n) / std::sqrt(n / 2.0) - 1.0));
  o.check(worst <= 0.01, "lazy a_n rel err " + num(worst, 3));
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget = 0.0;  // seconds, 0 for none
  };
  const std::vector<Criterion> criteria{
      {"subordination coefficients", coefficients, 10.0},
      {"calibration walks", calibration, 600.0},
      {"stable-like slopes", stable_slopes},
      {"stretched exponent k=1", stretched, 900.0},
      {"slow correction k=2", slow_correction},
      {"subordinated profile", profile},
      {"quantitative pseudo-Poincare", poincare},
      {"Dirichlet comparison stability", stability},
      {"weak theta_2 moment", weak_moment_profile},
      {"engine equivalence and structure", engines_and_structure},
      {"GJP regime classification", gjp},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (criteria[i].budget > 0.0) o.check(secs < criteria[i].budget, "runtime budget " + num(criteria[i].budget) + "s");
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
