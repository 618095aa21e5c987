#include "rwslow/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "rwslow/error.hpp"

namespace rwslow {

namespace {

constexpr double kUnderflowFloor = 1e-300;
constexpr std::size_t kMaxTableEntries = 50'000'000;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const SeriesEntry* ReturnSeries::find(std::int64_t n) const {
  for (const auto& e : entries)
    if (e.n == n) return &e;
  return nullptr;
}

void ReturnSeries::write_csv(std::ostream& os) const {
  os << "n,log_p_lower,log_p_upper,engine,deficit\n";
  for (const auto& e : entries) {
    os << e.n << ',' << fmt17(e.log_p_lower) << ',' << fmt17(e.log_p_upper) << ',' << engine << ','
       << fmt17(e.deficit) << '\n';
  }
}

ReturnSeries ReturnSeries::read_csv(std::istream& is) {
  ReturnSeries s;
  std::string line;
  if (!std::getline(is, line) || line.rfind("n,log_p_lower,log_p_upper", 0) != 0) {
    throw ParseError("return series CSV must start with the header n,log_p_lower,log_p_upper,engine,deficit");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 5) throw ParseError("return series CSV row needs 5 columns: '" + line + "'");
    SeriesEntry e{};
    e.n = static_cast<std::int64_t>(parse_number(cols[0]));
    e.log_p_lower = parse_number(cols[1]);
    e.log_p_upper = parse_number(cols[2]);
    e.deficit = parse_number(cols[4]);
    s.engine = cols[3];
    s.entries.push_back(e);
  }
  return s;
}

// ---------------------------------------------------------------------------

CapWalker::CapWalker(const Measure& mu, int cap) : mu_(mu), ball_(rwslow::ball(mu.group(), cap)) {
  for (const Atom& a : mu.atoms()) {
    steps_.push_back(a.g);
    masses_.push_back(a.mass);
  }
  const std::size_t s = steps_.size();
  if (ball_.size() * s <= kMaxTableEntries) {
    use_table_ = true;
    table_.resize(ball_.size() * s);
    const Group& g = mu.group();
    for (std::size_t i = 0; i < ball_.size(); ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        table_[i * s + j] = static_cast<std::int32_t>(ball_.index_of(g.compose(ball_.elements()[i], steps_[j])));
      }
    }
  }
}

std::vector<double> CapWalker::identity() const {
  std::vector<double> v(ball_.size(), 0.0);
  v[0] = 1.0;
  return v;
}

double CapWalker::step(const std::vector<double>& in, std::vector<double>& out, std::size_t& active) const {
  const std::size_t s = steps_.size();
  out.assign(ball_.size(), 0.0);
  double pushed = 0.0;
  std::size_t next_active = 0;
  const Group& g = mu_.group();
  for (std::size_t i = 0; i < active; ++i) {
    const double v = in[i];
    if (v == 0.0) continue;
    for (std::size_t j = 0; j < s; ++j) {
      const std::int64_t t =
          use_table_ ? table_[i * s + j] : ball_.index_of(g.compose(ball_.elements()[i], steps_[j]));
      const double m = v * masses_[j];
      if (t < 0) {
        pushed += m;
      } else {
        out[t] += m;
        next_active = std::max(next_active, static_cast<std::size_t>(t) + 1);
      }
    }
  }
  for (std::size_t i = 0; i < next_active; ++i) {
    if (out[i] != 0.0 && out[i] < kUnderflowFloor) {
      pushed += out[i];
      out[i] = 0.0;
    }
  }
  active = next_active;
  return pushed;
}

// ---------------------------------------------------------------------------

Measure convolve(const Measure& mu, const Measure& nu, int cap, bool symmetrize) {
  if (!(mu.group() == nu.group())) throw DomainError("convolve: measures live on different groups");
  const Group& g = mu.group();
  std::optional<WordMetric> metric;
  if (!g.is_lattice()) metric.emplace(g, cap);
  auto inside = [&](const Element& e) {
    if (g.is_lattice()) return *g.closed_form_length(e) <= cap;
    return metric->length(e).has_value();
  };
  std::unordered_map<Element, double, ElementHash> acc;
  double pushed = 0.0;
  for (const Atom& a : mu.atoms()) {
    for (const Atom& b : nu.atoms()) {
      const Element e = g.compose(a.g, b.g);
      const double m = a.mass * b.mass;
      if (inside(e)) acc[e] += m;
      else pushed += m;
    }
  }
  std::vector<Atom> atoms;
  atoms.reserve(acc.size());
  for (auto& [e, m] : acc) {
    if (symmetrize) {
      const Element inv = g.invert(e);
      if (inv != e) {
        auto it = acc.find(inv);
        const double other = it == acc.end() ? 0.0 : it->second;
        // a + b == b + a in IEEE arithmetic, so both sides get the same value
        atoms.push_back({e, 0.5 * (m + other)});
        continue;
      }
    }
    atoms.push_back({e, m});
  }
  const double dm = mu.deficit(), dn = nu.deficit();
  std::int64_t radius = -1;
  if (mu.radius() >= 0 && nu.radius() >= 0) radius = std::min<std::int64_t>(cap, mu.radius() + nu.radius());
  return Measure(g, std::move(atoms), dm + dn - dm * dn + pushed,
                 "conv(" + mu.descriptor() + "," + nu.descriptor() + ")", radius);
}

ReturnSeries return_series_direct(const Measure& mu, std::int64_t nmax, int cap) {
  if (nmax < 1) throw DomainError("nmax must be >= 1");
  CapWalker walker(mu, cap);
  ReturnSeries series;
  series.engine = "direct";
  series.measure = mu.descriptor();
  std::vector<double> cur = walker.identity(), next;
  std::size_t active = 1;
  double deficit = 0.0;
  const double dm = mu.deficit();
  for (std::int64_t n = 1; n <= nmax; ++n) {
    const double pushed = walker.step(cur, next, active);
    deficit = deficit + dm - deficit * dm + pushed;
    cur.swap(next);
    const double p = cur[0];
    if (p <= 0.0) {
      series.notices.push_back("n=" + std::to_string(n) + ": p underflows the 1e-300 floor; entry omitted");
      continue;
    }
    series.entries.push_back({n, std::log(p), std::log(p + deficit), deficit});
  }
  return series;
}

StructureReport check_structure(const ReturnSeries& s, double tol) {
  StructureReport r;
  std::vector<std::pair<double, double>> even;  // (m, log p(2m)) using the lower value
  for (const auto& e : s.entries)
    if (e.n % 2 == 0) even.emplace_back(static_cast<double>(e.n / 2), e.log_p_lower);
  std::sort(even.begin(), even.end());
  for (std::size_t i = 1; i < even.size(); ++i) {
    const double rise = even[i].second - even[i - 1].second;
    r.worst_monotone = std::max(r.worst_monotone, rise);
    if (rise > tol) r.monotone = false;
  }
  for (std::size_t i = 2; i < even.size(); ++i) {
    const auto [a, la] = even[i - 2];
    const auto [b, lb] = even[i - 1];
    const auto [c, lc] = even[i];
    const double s1 = (lb - la) / (b - a);
    const double s2 = (lc - lb) / (c - b);
    // equals la - 2 lb + lc (negated) on a uniform grid
    const double violation = (s1 - s2) * std::min(b - a, c - b);
    r.worst_convexity = std::max(r.worst_convexity, violation);
    if (violation > tol) r.log_convex = false;
  }
  return r;
}

}  // namespace rwslow
