#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "rwslow/asymptotics.hpp"
#include "rwslow/descriptors.hpp"
#include "rwslow/error.hpp"
#include "rwslow/experiment.hpp"
#include "rwslow/fourier.hpp"

namespace {

using namespace rwslow;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kBudgetError = 3;
constexpr int kVerdictFailure = 4;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// stdout when path is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ParseError("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<std::int64_t> fourier_steps(std::int64_t nmax, const std::string& steps) {
  if (!steps.empty()) return expand_steps(steps);
  return default_steps(nmax);
}

struct GroupInfo {
  std::string name = "zd:1";
  int radius = 16;
  std::string out;
};

int group_info(const GroupInfo& o) {
  const Ball b = ball(Group::from_token(o.name), o.radius);
  Output out(o.out);
  out.stream() << "n,volume\n";
  for (int n = 0; n <= o.radius; ++n) out.stream() << n << ',' << b.volumes()[n] << '\n';
  if (o.radius >= 8) std::cerr << "growth degree estimate " << growth_degree(b).degree << '\n';
  return kOk;
}

struct MeasureBuild {
  std::string group = "zd:1";
  std::string measure = "lazy";
  std::string out;
};

int measure_build(const MeasureBuild& o) {
  const Measure mu = parse_measure(Group::from_token(o.group), o.measure);
  Output out(o.out);
  out.stream() << "a,b,c,mass\n";
  for (const Atom& a : mu.atoms())
    out.stream() << a.g.c[0] << ',' << a.g.c[1] << ',' << a.g.c[2] << ',' << fmt17(a.mass) << '\n';
  std::cerr << mu.descriptor() << ": support " << mu.support_size() << ", deficit " << fmt17(mu.deficit())
            << ", symmetric " << (mu.is_symmetric() ? "yes" : "no") << '\n';
  return kOk;
}

struct Convolve {
  std::string group = "zd:1";
  std::string measure = "lazy";
  std::string engine = "fourier";
  std::int64_t nmax = 64;
  int cap = 0;
  std::string steps;
  std::string out;
};

int convolve_cmd(const Convolve& o) {
  const Measure mu = parse_measure(Group::from_token(o.group), o.measure);
  ReturnSeries s;
  if (o.engine == "fourier") {
    s = return_series_fourier(mu, fourier_steps(o.nmax, o.steps));
  } else {
    if (o.cap < 1) throw ParseError("--cap is required for the direct engine");
    s = return_series_direct(mu, o.nmax, o.cap);
  }
  Output out(o.out);
  s.write_csv(out.stream());
  for (const auto& n : s.notices) std::cerr << "notice: " << n << '\n';
  const StructureReport st = check_structure(s);
  if (!st.monotone || !st.log_convex) std::cerr << "warning: series violates monotonicity/log-convexity\n";
  return kOk;
}

struct Fit {
  std::string in;
  std::string model = "powerlaw";
  std::string window;
  double expect = std::numeric_limits<double>::quiet_NaN();
  double tolerance = 0.1;
  double bound = 4.0;
  std::string out;
};

int fit_cmd(const Fit& o) {
  std::ifstream in(o.in);
  if (!in) throw ParseError("cannot read " + o.in);
  const ReturnSeries s = ReturnSeries::read_csv(in);
  FitWindow w;
  if (!o.window.empty()) w = parse_window(o.window);
  FitResult r;
  std::optional<Prediction> pred;
  if (o.model == "powerlaw" || o.model == "stretched") {
    const auto regime = o.model == "powerlaw" ? Prediction::Regime::Polynomial : Prediction::Regime::Stretched;
    if (o.window.empty()) w = default_window(regime);
    r = o.model == "powerlaw" ? fit_powerlaw(s, w) : fit_stretched(s, w);
    if (!std::isnan(o.expect)) pred = Prediction{regime, o.expect, 0.0, 0, {}};
  } else if (o.model.starts_with("slowcorr:")) {
    const Prediction p = parse_prediction(o.model);
    if (o.window.empty()) w = default_window(p.regime);
    r = fit_slowcorrection(s, p.k, p.exponent, w);
    pred = p;
  } else {
    throw ParseError("--model must be powerlaw, stretched or slowcorr:<k>:<delta>");
  }
  if (pred) {
    VerdictOptions opt;
    opt.exponent_tolerance = o.tolerance;
    opt.ratio_bound = o.bound;
    r = verdict(r, *pred, opt);
  }
  Output out(o.out);
  write_verdict_csv(out.stream(), r);
  for (const auto& m : r.warnings) std::cerr << "warning: " << m << '\n';
  return r.has_verdict && !r.pass ? kVerdictFailure : kOk;
}

struct Poincare {
  std::string group = "zd:1";
  std::string phi = "lazy";
  std::string mode = "power";
  int generator = 0;
  std::int64_t nmax = 50;
  int suite_radius = 16;
  int suite_random = 50;
  std::uint64_t seed = 1;
  std::vector<std::string> elements;
  std::string out;
};

Element parse_element(const std::string& text) {
  std::stringstream ss(text);
  Element e;
  std::string part;
  int i = 0;
  while (std::getline(ss, part, ',')) {
    if (i == 3) throw ParseError("element needs at most 3 coordinates: '" + text + "'");
    e.c[i++] = static_cast<std::int64_t>(parse_number(part));
  }
  return e;
}

int poincare_cmd(const Poincare& o) {
  const Group g = Group::from_token(o.group);
  const auto suite = standard_suite(g, o.suite_radius, o.suite_random, o.seed);
  PoincareReport rep;
  if (o.mode == "power") {
    rep = pseudo_poincare_report(g, PowerMode{o.generator, o.nmax}, parse_measure(Group::lattice(1), o.phi), suite);
  } else {
    std::vector<Element> els;
    for (const auto& t : o.elements) els.push_back(parse_element(t));
    if (els.empty()) {
      for (int j : {1, 2, 4, 8}) els.push_back(g.power(g.generators()[0], j));
      if (g.kind() == GroupKind::Heisenberg)
        for (int j : {1, 4, 16}) els.push_back(g.power(Element{{0, 0, 1}}, j));
    }
    rep = pseudo_poincare_report(g, element_mode_for(o.phi, els), parse_measure(g, o.phi), suite);
  }
  Output out(o.out);
  rep.write_csv(out.stream());
  std::cerr << "max ratio " << fmt17(rep.max_ratio) << ", C_mono " << fmt17(rep.c_mono) << ", violations "
            << rep.violations << '\n';
  for (const auto& n : rep.notes) std::cerr << "note: " << n << '\n';
  return rep.violations > 0 ? kVerdictFailure : kOk;
}

struct MomentCmd {
  std::string group = "zd:1";
  std::string measure = "lazy";
  std::string rho = "pow:1";
  bool weak = false;
};

int moment_cmd(const MomentCmd& o) {
  const Measure mu = parse_measure(Group::from_token(o.group), o.measure);
  const MomentFn rho = MomentFn::parse(o.rho);
  const MomentValue v = o.weak ? weak_moment(mu, rho) : moment(mu, rho);
  std::cout << (o.weak ? "weak_moment," : "moment,") << fmt17(v.value) << ',' << (v.lower_bound ? "lower_bound" : "exact")
            << '\n';
  return kOk;
}

int experiment_cmd(const std::vector<std::string>& configs) {
  std::vector<ExperimentConfig> cs;
  for (const auto& f : configs) cs.push_back(ExperimentConfig::load(f));
  const auto summaries = run_batch(cs, SeriesCache::from_environment());
  bool failed = false;
  for (const auto& s : summaries) {
    std::cout << s.name << ": computed " << s.computed << ", cache hits " << s.cache_hits;
    if (s.verdict) {
      std::cout << ", " << to_string(s.verdict->model) << " exponent " << fmt17(s.verdict->exponent) << " -> "
                << (s.verdict->pass ? "pass" : "FAIL");
    }
    if (s.cross_engine_delta) std::cout << ", cross-engine " << fmt17(*s.cross_engine_delta);
    if (s.poincare_violations) std::cout << ", poincare violations " << *s.poincare_violations;
    std::cout << '\n';
    for (const auto& f : s.files) std::cout << "  " << f.string() << '\n';
    for (const auto& n : s.notes) std::cout << "  note: " << n << '\n';
    failed = failed || s.failed();
  }
  return failed ? kVerdictFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Return probabilities of random walks with slowly varying moment conditions"};
  app.require_subcommand(1);

  auto* group = app.add_subcommand("group", "Group utilities");
  group->require_subcommand(1);
  GroupInfo gi;
  auto* info = group->add_subcommand("info", "Ball volumes V(n) as CSV n,volume");
  info->add_option("--name", gi.name, "zd:1, zd:2, zd:3 or heis3")->capture_default_str();
  info->add_option("--radius", gi.radius)->capture_default_str();
  info->add_option("--out", gi.out, "output file (default stdout)");

  auto* measure = app.add_subcommand("measure", "Measure utilities");
  measure->require_subcommand(1);
  MeasureBuild mb;
  auto* build = measure->add_subcommand("build", "Atoms of a measure as CSV a,b,c,mass");
  build->add_option("--group", mb.group)->capture_default_str();
  build->add_option("--measure", mb.measure, "measure descriptor")->required();
  build->add_option("--out", mb.out);

  Convolve cv;
  auto* conv = app.add_subcommand("convolve", "Return series n,log_p_lower,log_p_upper,engine,deficit");
  conv->add_option("--group", cv.group)->capture_default_str();
  conv->add_option("--measure", cv.measure, "measure descriptor")->required();
  conv->add_option("--engine", cv.engine)->check(CLI::IsMember({"fourier", "direct"}))->capture_default_str();
  conv->add_option("--nmax", cv.nmax)->capture_default_str();
  conv->add_option("--cap", cv.cap, "ball radius for the direct engine");
  conv->add_option("--steps", cv.steps, "explicit step list or geom:a:b:count (fourier)");
  conv->add_option("--out", cv.out);

  Fit ft;
  auto* fit = app.add_subcommand("fit", "Fit a decay law; CSV model,exponent,predicted,residual,pass");
  fit->add_option("--in", ft.in, "return series CSV")->required();
  fit->add_option("--model", ft.model, "powerlaw, stretched or slowcorr:<k>:<delta>")->capture_default_str();
  fit->add_option("--window", ft.window, "a:b in n (points at step 2n)");
  fit->add_option("--expect", ft.expect, "predicted exponent (powerlaw/stretched)");
  fit->add_option("--tolerance", ft.tolerance)->capture_default_str();
  fit->add_option("--bound", ft.bound, "max/min bound for slowcorr")->capture_default_str();
  fit->add_option("--out", ft.out);

  Poincare pc;
  auto* poin = app.add_subcommand("poincare", "Pseudo-Poincare report");
  poin->add_option("--group", pc.group)->capture_default_str();
  poin->add_option("--phi", pc.phi, "measure descriptor (on Z in power mode)")->capture_default_str();
  poin->add_option("--mode", pc.mode)->check(CLI::IsMember({"power", "element"}))->capture_default_str();
  poin->add_option("--generator", pc.generator)->capture_default_str();
  poin->add_option("--nmax", pc.nmax)->capture_default_str();
  poin->add_option("--suite-radius", pc.suite_radius)->capture_default_str();
  poin->add_option("--suite-random", pc.suite_random)->capture_default_str();
  poin->add_option("--seed", pc.seed)->capture_default_str();
  poin->add_option("--element", pc.elements, "element a,b,c (element mode, repeatable)");
  poin->add_option("--out", pc.out);

  MomentCmd mc;
  auto* mom = app.add_subcommand("moment", "Strong or weak rho-moment of a measure");
  mom->add_option("--group", mc.group)->capture_default_str();
  mom->add_option("--measure", mc.measure)->required();
  mom->add_option("--rho", mc.rho, "pow:a, logeps:e, iterlogeps:k:e or theta2(<ell>)")->capture_default_str();
  mom->add_flag("--weak", mc.weak);

  std::vector<std::string> configs;
  auto* exp = app.add_subcommand("experiment", "Config-driven experiments");
  exp->require_subcommand(1);
  auto* run = exp->add_subcommand("run", "Run experiment configs (concurrently)");
  run->add_option("--config", configs, "config file (repeatable)")->required();

  auto* cache = app.add_subcommand("cache", "Series cache ($RWSLOW_CACHE_DIR)");
  cache->require_subcommand(1);
  auto* clear = cache->add_subcommand("clear", "Remove cached series");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (info->parsed()) return group_info(gi);
    if (build->parsed()) return measure_build(mb);
    if (conv->parsed()) return convolve_cmd(cv);
    if (fit->parsed()) return fit_cmd(ft);
    if (poin->parsed()) return poincare_cmd(pc);
    if (mom->parsed()) return moment_cmd(mc);
    if (run->parsed()) return experiment_cmd(configs);
    if (clear->parsed()) {
      const auto c = SeriesCache::from_environment();
      std::cout << "removed " << c.clear() << " files from " << c.dir().string() << '\n';
      return kOk;
    }
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << '\n';
    return kBudgetError;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnsupportedError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
