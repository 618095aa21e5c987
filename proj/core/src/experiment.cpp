#include "rwslow/experiment.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <atomic>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rwslow/descriptors.hpp"
#include "rwslow/detail/parallel.hpp"
#include "rwslow/error.hpp"
#include "rwslow/fourier.hpp"

namespace rwslow {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <class Int>
Int parse_integer(std::string_view s, const std::string& what) {
  Int v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ParseError(what + ": expected an integer, got '" + std::string(s) + "'");
  return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string normalize_steps(std::string_view s) {
  if (s.empty()) return {};
  if (s.starts_with("geom:")) {
    const auto parts = split(s.substr(5), ':');
    if (parts.size() != 3) throw ParseError("steps: geom:<a>:<b>:<count>");
    const auto a = parse_integer<std::int64_t>(parts[0], "steps");
    const auto b = parse_integer<std::int64_t>(parts[1], "steps");
    const auto c = parse_integer<int>(parts[2], "steps");
    if (a < 2 || b < a || c < 2) throw ParseError("steps: need 2 <= a <= b and count >= 2");
    return "geom:" + std::to_string(a) + ":" + std::to_string(b) + ":" + std::to_string(c);
  }
  std::string out;
  for (const auto& p : split(s, ',')) {
    const auto n = parse_integer<std::int64_t>(p, "steps");
    if (n < 0) throw ParseError("steps must be non-negative");
    out += (out.empty() ? "" : ",") + std::to_string(n);
  }
  return out;
}

std::string normalize_window(std::string_view s) {
  if (s.empty()) return {};
  const FitWindow w = parse_window(s);
  return std::to_string(w.n_min) + ":" + std::to_string(w.n_max);
}

std::string normalize_prediction(std::string_view s) {
  if (s.empty()) return {};
  if (s.starts_with("ell:")) return "ell:" + SlowVaryFn::parse(s.substr(4)).token();
  const Prediction p = parse_prediction(s);
  switch (p.regime) {
    case Prediction::Regime::Polynomial: return "polynomial:" + format_number(p.exponent);
    case Prediction::Regime::Stretched: return "stretched:" + format_number(p.exponent);
    case Prediction::Regime::SlowCorrection:
      return "slowcorr:" + std::to_string(p.k) + ":" + format_number(p.exponent);
  }
  return {};
}

std::string one_of(const std::string& v, std::initializer_list<const char*> allowed, const std::string& what) {
  for (const char* a : allowed)
    if (v == a) return v;
  throw ParseError(what + ": unexpected value '" + v + "'");
}

std::string series_key(const ExperimentConfig& c, const std::string& engine) {
  std::ostringstream os;
  os << "rwslow-series-v1\ngroup=" << c.group << "\nmeasure=" << c.measure << "\nengine=" << engine << "\n";
  if (engine == "fourier")
    os << "steps=" << c.steps << "\n";
  else
    os << "nmax=" << c.nmax << "\ncap=" << c.cap << "\n";
  return os.str();
}

void write_text_atomic(const fs::path& target, const std::string& content) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::vector<Element> default_elements(const Group& g) {
  std::vector<Element> out;
  const Element s = g.generators()[0];
  for (int j : {1, 2, 4, 8}) out.push_back(g.power(s, j));
  if (g.kind() == GroupKind::Heisenberg) {
    const Element z{{0, 0, 1}};
    for (int j : {1, 4, 16}) out.push_back(g.power(z, j));
  }
  return out;
}

fs::path output_file(const ExperimentConfig& c, const std::string& suffix) {
  return fs::path(c.output) / (c.name + suffix);
}

}  // namespace

std::vector<std::int64_t> default_steps(std::int64_t nmax) {
  std::vector<std::int64_t> ns;
  if (nmax <= 4096) {
    for (std::int64_t n = 1; n <= nmax; ++n) ns.push_back(n);
    return ns;
  }
  return expand_steps("geom:2:" + std::to_string(nmax) + ":64");
}

std::vector<std::int64_t> expand_steps(std::string_view steps) {
  const std::string s = normalize_steps(steps);
  std::vector<std::int64_t> out;
  if (s.starts_with("geom:")) {
    const auto parts = split(std::string_view(s).substr(5), ':');
    const double a = static_cast<double>(parse_integer<std::int64_t>(parts[0], "steps"));
    const double b = static_cast<double>(parse_integer<std::int64_t>(parts[1], "steps"));
    const int c = parse_integer<int>(parts[2], "steps");
    for (int i = 0; i < c; ++i) {
      const double x = a * std::pow(b / a, static_cast<double>(i) / (c - 1));
      out.push_back(2 * static_cast<std::int64_t>(std::llround(x / 2.0)));
    }
  } else if (!s.empty()) {
    for (const auto& p : split(s, ',')) out.push_back(parse_integer<std::int64_t>(p, "steps"));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FitWindow parse_window(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw ParseError("window must be <a>:<b>");
  FitWindow w{parse_integer<std::int64_t>(parts[0], "window"), parse_integer<std::int64_t>(parts[1], "window")};
  if (w.n_min < 1 || w.n_max < w.n_min) throw ParseError("window needs 1 <= a <= b");
  return w;
}

Prediction parse_prediction(std::string_view token) {
  const std::string t(token);
  Prediction p{};
  if (t.starts_with("polynomial:")) {
    p.regime = Prediction::Regime::Polynomial;
    p.exponent = parse_number(t.substr(11));
  } else if (t.starts_with("stretched:")) {
    p.regime = Prediction::Regime::Stretched;
    p.exponent = parse_number(t.substr(10));
  } else if (t.starts_with("slowcorr:")) {
    const auto parts = split(std::string_view(t).substr(9), ':');
    if (parts.size() != 2) throw ParseError("prediction slowcorr:<k>:<delta>");
    p.regime = Prediction::Regime::SlowCorrection;
    p.k = parse_integer<int>(parts[0], "prediction");
    p.exponent = parse_number(parts[1]);
  } else if (t.starts_with("ell:")) {
    p = predicted_decay(SlowVaryFn::parse(t.substr(4)));
  } else {
    throw ParseError("unknown prediction '" + t + "'");
  }
  return p;
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::string body;
  for (std::string_view rest = text; !rest.empty();) {
    const auto eol = rest.find('\n');
    std::string line(rest.substr(0, eol));
    rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 1);
    // inline comments: ';' or '#' after whitespace
    for (std::size_t i = 1; i < line.size(); ++i)
      if ((line[i] == ';' || line[i] == '#') && std::isspace(static_cast<unsigned char>(line[i - 1]))) {
        line.erase(i);
        break;
      }
    body += line;
    body += '\n';
  }
  std::istringstream is{body};
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  static const std::map<std::string, std::set<std::string>> known = {
      {"experiment", {"name", "group", "measure", "seed", "output"}},
      {"series", {"engine", "steps", "nmax", "cap"}},
      {"verdict", {"prediction", "window", "tolerance", "ratio_bound"}},
      {"poincare", {"mode", "phi", "generator", "nmax", "suite_radius", "suite_random"}},
  };
  for (const auto& [section, body] : tree) {
    auto sec = known.find(section);
    if (sec == known.end()) {
      if (body.empty()) throw ParseError("config: key '" + section + "' outside a section");
      throw ParseError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (!sec->second.count(key)) throw ParseError("config: unknown key '" + key + "' in [" + section + "]");
      const std::string v = node.get_value<std::string>();
      const std::string what = section + "." + key;
      if (section == "experiment") {
        if (key == "name") {
          if (v.empty() || v.find_first_of("/\\ ") != std::string::npos) throw ParseError("experiment.name must be a plain word");
          c.name = v;
        } else if (key == "group") {
          c.group = v;
        } else if (key == "measure") {
          c.measure = normalize_measure(v);
        } else if (key == "seed") {
          c.seed = parse_integer<std::uint64_t>(v, what);
        } else {
          c.output = v;
        }
      } else if (section == "series") {
        if (key == "engine") c.engine = one_of(v, {"fourier", "direct", "both"}, what);
        else if (key == "steps") c.steps = normalize_steps(v);
        else if (key == "nmax") c.nmax = parse_integer<std::int64_t>(v, what);
        else c.cap = parse_integer<int>(v, what);
      } else if (section == "verdict") {
        if (key == "prediction") c.prediction = normalize_prediction(v);
        else if (key == "window") c.window = normalize_window(v);
        else if (key == "tolerance") c.tolerance = parse_number(v);
        else c.ratio_bound = parse_number(v);
      } else {
        if (key == "mode") c.poincare_mode = one_of(v, {"power", "element"}, what);
        else if (key == "phi") c.phi = normalize_measure(v);
        else if (key == "generator") c.generator = parse_integer<int>(v, what);
        else if (key == "nmax") c.poincare_nmax = parse_integer<std::int64_t>(v, what);
        else if (key == "suite_radius") c.suite_radius = parse_integer<int>(v, what);
        else c.suite_random = parse_integer<int>(v, what);
      }
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot read config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  auto kv = [&os](const char* k, const std::string& v) {
    if (!v.empty()) os << k << " = " << v << "\n";
  };
  os << "[experiment]\n";
  kv("name", name);
  kv("group", group);
  kv("measure", measure);
  kv("seed", std::to_string(seed));
  kv("output", output);
  os << "\n[series]\n";
  kv("engine", engine);
  kv("steps", steps);
  kv("nmax", std::to_string(nmax));
  kv("cap", std::to_string(cap));
  os << "\n[verdict]\n";
  kv("prediction", prediction);
  kv("window", window);
  kv("tolerance", format_number(tolerance));
  kv("ratio_bound", format_number(ratio_bound));
  os << "\n[poincare]\n";
  kv("mode", poincare_mode);
  kv("phi", phi);
  kv("generator", std::to_string(generator));
  kv("nmax", std::to_string(poincare_nmax));
  kv("suite_radius", std::to_string(suite_radius));
  kv("suite_random", std::to_string(suite_random));
  return os.str();
}

// ---------------------------------------------------------------------------

SeriesCache::SeriesCache(fs::path dir) : dir_(std::move(dir)) {}

SeriesCache SeriesCache::from_environment() {
  const char* env = std::getenv("RWSLOW_CACHE_DIR");
  return SeriesCache(env && *env ? fs::path(env) : fs::path(".rwslow-cache"));
}

std::string SeriesCache::hash(const std::string& key_text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(key_text.data(), key_text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::optional<ReturnSeries> SeriesCache::load(const std::string& key_text) const {
  const std::string h = hash(key_text);
  std::ifstream csv(dir_ / (h + ".csv"));
  std::ifstream meta(dir_ / (h + ".meta"));
  if (!csv || !meta) return std::nullopt;
  std::stringstream ms;
  ms << meta.rdbuf();
  const std::string m = ms.str();
  if (!m.starts_with(key_text)) return std::nullopt;
  ReturnSeries s = ReturnSeries::read_csv(csv);
  std::istringstream rest(m.substr(key_text.size()));
  for (std::string line; std::getline(rest, line);) {
    if (line.starts_with("measure_descriptor=")) s.measure = line.substr(19);
    if (line.starts_with("notice=")) s.notices.push_back(line.substr(7));
  }
  return s;
}

void SeriesCache::store(const std::string& key_text, const ReturnSeries& series) const {
  fs::create_directories(dir_);
  const std::string h = hash(key_text);
  std::ostringstream meta;
  meta << key_text << "measure_descriptor=" << series.measure << "\n";
  for (const auto& n : series.notices) meta << "notice=" << n << "\n";
  std::ostringstream csv;
  series.write_csv(csv);
  // the CSV is renamed last: a visible CSV always has its metadata
  write_text_atomic(dir_ / (h + ".meta"), meta.str());
  write_text_atomic(dir_ / (h + ".csv"), csv.str());
}

std::size_t SeriesCache::clear() const {
  if (!fs::exists(dir_)) return 0;
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir_)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".csv" || ext == ".meta")) n += fs::remove(e.path()) ? 1 : 0;
  }
  return n;
}

// ---------------------------------------------------------------------------

bool ExperimentSummary::failed() const {
  if (verdict && !verdict->pass) return true;
  return poincare_violations && *poincare_violations > 0;
}

void write_verdict_csv(std::ostream& os, const FitResult& fit) {
  os << "model,exponent,predicted,residual,pass\n";
  std::string model = to_string(fit.model);
  double exponent = fit.exponent;
  double predicted = fit.predicted;
  if (fit.model == FitModel::SlowCorrection) {
    // the boundedness check: q max/min against the allowed ratio
    model += ":" + std::to_string(fit.k) + ":" + format_number(fit.delta);
    exponent = fit.q_ratio;
    predicted = fit.has_verdict ? fit.tolerance : std::numeric_limits<double>::quiet_NaN();
  }
  os << model << ',' << fmt17(exponent) << ',' << fmt17(predicted) << ',' << fmt17(fit.residual) << ','
     << (fit.has_verdict ? (fit.pass ? "true" : "false") : "na") << '\n';
}

std::vector<fs::path> export_plotdata(const ReturnSeries& series, const fs::path& stem) {
  if (series.entries.empty()) throw DataError("export_plotdata: empty series");
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  std::ostringstream loglog, stretched, q;
  for (const auto& e : series.entries) {
    if (e.n < 1) continue;
    const double ln = std::log(static_cast<double>(e.n));
    loglog << fmt17(ln) << ' ' << fmt17(e.log_p_lower) << '\n';
    if (e.log_p_lower < 0.0) stretched << fmt17(ln) << ' ' << fmt17(std::log(-e.log_p_lower)) << '\n';
    if (e.n % 2 == 0 && e.n >= 4) {
      const double h = static_cast<double>(e.n / 2);
      q << e.n / 2 << ' ' << fmt17(-e.log_p_lower * std::log(h) / h) << '\n';
    }
  }
  std::vector<fs::path> out;
  for (auto [suffix, body] : {std::pair<const char*, std::string>{".loglog.txt", loglog.str()},
                              {".stretched.txt", stretched.str()},
                              {".q.txt", q.str()}}) {
    fs::path p = stem;
    p += suffix;
    write_text_atomic(p, body);
    out.push_back(p);
  }
  return out;
}

std::vector<fs::path> export_plotdata(const PoincareReport& report, const fs::path& stem) {
  if (report.records.empty()) throw DataError("export_plotdata: empty report");
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  std::ostringstream os;
  for (const auto& r : report.records) os << r.n_or_wordlen << ' ' << fmt17(r.ratio) << '\n';
  fs::path p = stem;
  p += ".ratio.txt";
  write_text_atomic(p, os.str());
  return {p};
}

ElementMode element_mode_for(std::string_view descriptor, std::vector<Element> elements) {
  ElementMode m;
  m.elements = std::move(elements);
  const Token t = split_token(descriptor);
  if (t.head == "radialV" || t.head == "radialD") {
    if (t.args.size() != 2) throw ParseError(t.head + " takes 2 arguments");
    m.ell = SlowVaryFn::parse(t.args[0]);
  } else {
    m.phi1 = line_law(parse_measure(Group::lattice(1), descriptor));
  }
  return m;
}

ExperimentSummary run_experiment(const ExperimentConfig& c, const SeriesCache& cache) {
  ExperimentSummary sum;
  sum.name = c.name;
  const Group group = Group::from_token(c.group);
  fs::create_directories(c.output);

  std::optional<Measure> mu;
  auto measure = [&]() -> const Measure& {
    if (!mu) mu.emplace(parse_measure(group, c.measure));
    return *mu;
  };
  auto obtain = [&](const std::string& engine) {
    const std::string key = series_key(c, engine);
    if (auto s = cache.load(key)) {
      ++sum.cache_hits;
      return *s;
    }
    ReturnSeries s;
    if (engine == "fourier") {
      const auto ns = c.steps.empty() && c.nmax > 0 ? default_steps(c.nmax) : expand_steps(c.steps);
      if (ns.empty()) throw ParseError("series.steps or series.nmax is required for the fourier engine");
      s = return_series_fourier(measure(), ns);
    } else {
      if (c.nmax < 1 || c.cap < 1) throw ParseError("series.nmax and series.cap are required for the direct engine");
      s = return_series_direct(measure(), c.nmax, c.cap);
    }
    cache.store(key, s);
    ++sum.computed;
    return s;
  };

  std::vector<std::string> engines;
  if (c.engine == "both") engines = {"fourier", "direct"};
  else engines = {c.engine};
  std::vector<ReturnSeries> series;
  for (const auto& e : engines) {
    series.push_back(obtain(e));
    const fs::path p = output_file(c, "_" + e + ".csv");
    std::ostringstream os;
    series.back().write_csv(os);
    write_text_atomic(p, os.str());
    sum.files.push_back(p);
    const StructureReport st = check_structure(series.back());
    if (!sum.structure) sum.structure = st;
    if (!st.monotone || !st.log_convex)
      sum.notes.push_back(e + " series violates monotonicity/log-convexity (worst " + fmt17(st.worst_monotone) + ", " +
                          fmt17(st.worst_convexity) + ")");
    for (const auto& n : series.back().notices) sum.notes.push_back(e + ": " + n);
  }
  if (series.size() == 2) {
    double worst = 0.0;
    for (const auto& a : series[0].entries)
      if (const SeriesEntry* b = series[1].find(a.n); b && a.n > 0)
        worst = std::max(worst, std::abs(a.log_p_lower - b->log_p_lower));
    sum.cross_engine_delta = worst;
  }
  const ReturnSeries& main = series.front();
  for (const auto& p : export_plotdata(main, fs::path(c.output) / c.name)) sum.files.push_back(p);

  if (!c.prediction.empty()) {
    VerdictOptions opt;
    opt.exponent_tolerance = c.tolerance;
    opt.ratio_bound = c.ratio_bound;
    if (!c.window.empty()) {
      opt.use_default_window = false;
      opt.window = parse_window(c.window);
    }
    sum.verdict = verdict(main, parse_prediction(c.prediction), opt);
    const fs::path p = output_file(c, "_verdict.csv");
    std::ostringstream os;
    write_verdict_csv(os, *sum.verdict);
    write_text_atomic(p, os.str());
    sum.files.push_back(p);
  }

  if (!c.poincare_mode.empty()) {
    const auto suite = standard_suite(group, c.suite_radius, c.suite_random, c.seed);
    const std::string phi_desc = c.phi.empty() ? "lazy" : c.phi;
    PoincareReport rep;
    if (c.poincare_mode == "power") {
      rep = pseudo_poincare_report(group, PowerMode{c.generator, c.poincare_nmax}, parse_measure(Group::lattice(1), phi_desc),
                                   suite);
    } else {
      rep = pseudo_poincare_report(group, element_mode_for(phi_desc, default_elements(group)),
                                   parse_measure(group, phi_desc), suite);
    }
    sum.poincare_violations = rep.violations;
    const fs::path p = output_file(c, "_poincare.csv");
    std::ostringstream os;
    rep.write_csv(os);
    write_text_atomic(p, os.str());
    sum.files.push_back(p);
    for (const auto& f : export_plotdata(rep, fs::path(c.output) / (c.name + "_poincare"))) sum.files.push_back(f);
  }
  return sum;
}

std::vector<ExperimentSummary> run_batch(std::span<const ExperimentConfig> configs, const SeriesCache& cache) {
  std::vector<std::optional<ExperimentSummary>> out(configs.size());
  detail::parallel_for(configs.size(), [&](std::size_t i) { out[i] = run_experiment(configs[i], cache); });
  std::vector<ExperimentSummary> res;
  for (auto& s : out) res.push_back(std::move(*s));
  return res;
}

}  // namespace rwslow
