#include "rwslow/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>

#include "rwslow/detail/parallel.hpp"
#include "rwslow/error.hpp"

namespace rwslow {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Suite values on a common BFS ball, function-major.
struct Grid {
  Ball ball;
  std::size_t size;
  std::size_t count;
  std::vector<double> values;
  std::vector<double> norm2;
  int radius;

  const double* row(std::size_t f) const { return values.data() + f * size; }
};

Grid make_grid(const Group& group, std::span<const TestFunction> suite) {
  if (suite.empty()) throw DomainError("test suite is empty");
  int radius = 0;
  for (const auto& f : suite) radius = std::max(radius, f.radius);
  Grid grid{ball(group, radius), 0, suite.size(), {}, {}, radius};
  grid.size = grid.ball.size();
  grid.values.assign(grid.size * grid.count, 0.0);
  grid.norm2.assign(grid.count, 0.0);
  for (std::size_t f = 0; f < suite.size(); ++f) {
    for (const auto& [g, v] : suite[f].values) {
      const std::int64_t i = grid.ball.index_of(g);
      if (i < 0) throw DomainError("test function '" + suite[f].name + "' has support outside its ball");
      grid.values[f * grid.size + static_cast<std::size_t>(i)] = v;
    }
    const double* r = grid.row(f);
    for (std::size_t i = 0; i < grid.size; ++i) grid.norm2[f] += r[i] * r[i];
  }
  return grid;
}

/// sum_x |f(xy) - f(x)|^2 for every suite member, summed without cancellation.
void energies(const Grid& grid, const Element& y, double* out) {
  const Group& g = grid.ball.group();
  const auto& elems = grid.ball.elements();
  std::vector<std::int64_t> image(grid.size);
  std::vector<char> hit(grid.size, 0);
  for (std::size_t x = 0; x < grid.size; ++x) {
    const std::int64_t j = grid.ball.index_of(g.compose(elems[x], y));
    image[x] = j;
    if (j >= 0) hit[static_cast<std::size_t>(j)] = 1;
  }
  std::vector<std::size_t> missed;
  for (std::size_t z = 0; z < grid.size; ++z)
    if (!hit[z]) missed.push_back(z);
  for (std::size_t f = 0; f < grid.count; ++f) {
    const double* v = grid.row(f);
    double s = 0.0;
    for (std::size_t x = 0; x < grid.size; ++x) {
      const std::int64_t j = image[x];
      const double d = j >= 0 ? v[j] - v[x] : v[x];
      s += d * d;
    }
    // x outside the ball with xy inside
    for (std::size_t z : missed) s += v[z] * v[z];
    out[f] = s;
  }
}

std::vector<std::vector<double>> energies_for(const Grid& grid, std::span<const Element> ys) {
  std::vector<std::vector<double>> out(ys.size(), std::vector<double>(grid.count));
  detail::parallel_for(ys.size(), [&](std::size_t i) { energies(grid, ys[i], out[i].data()); });
  return out;
}

std::int64_t word_length_of(const Group& group, const Element& g, int radius) {
  if (auto len = group.closed_form_length(g)) return *len;
  const WordMetric metric(group, radius);
  if (auto len = metric.length(g)) return *len;
  throw DomainError("word length unavailable within radius " + std::to_string(radius));
}

}  // namespace

double TestFunction::operator()(const Element& g) const {
  auto it = values.find(g);
  return it == values.end() ? 0.0 : it->second;
}

double TestFunction::norm2() const {
  double s = 0.0;
  for (const auto& [g, v] : values) s += v * v;
  return s;
}

TestFunction ball_indicator(const Group& group, int r) {
  const Ball b = ball(group, r);
  TestFunction f{"ball" + std::to_string(r), r, {}};
  for (const Element& e : b.elements()) f.values.emplace(e, 1.0);
  return f;
}

TestFunction tent(const Group& group, int width) {
  if (width < 1) throw DomainError("tent width must be >= 1");
  const Ball b = ball(group, width - 1);
  TestFunction f{"tent" + std::to_string(width), width - 1, {}};
  for (std::size_t i = 0; i < b.size(); ++i) f.values.emplace(b.elements()[i], width - b.lengths()[i]);
  return f;
}

TestFunction random_signs(const Group& group, int r, std::uint64_t seed, std::string name) {
  const Ball b = ball(group, r);
  std::mt19937_64 rng(seed);
  TestFunction f{std::move(name), r, {}};
  for (const Element& e : b.elements()) f.values.emplace(e, (rng() & 1u) ? 1.0 : -1.0);
  return f;
}

std::vector<TestFunction> standard_suite(const Group& group, int radius, int random_count, std::uint64_t seed) {
  if (radius < 1) throw DomainError("suite radius must be >= 1");
  std::vector<int> radii;
  for (int r : {2, 4, 8, 16})
    if (r < radius) radii.push_back(r);
  radii.push_back(radius);
  std::vector<TestFunction> suite;
  for (int r : radii) suite.push_back(ball_indicator(group, r));
  for (int r : radii) suite.push_back(tent(group, r + 1));
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(std::max(random_count, 0)));
  std::mt19937_64 master(seed);
  for (auto& s : seeds) s = master();
  for (int i = 0; i < random_count; ++i) suite.push_back(random_signs(group, radius, seeds[i], "rand" + std::to_string(i)));
  return suite;
}

std::vector<DirichletValue> dirichlet_forms(const Measure& mu, std::span<const TestFunction> suite) {
  const Group& group = mu.group();
  const Grid grid = make_grid(group, suite);
  // S(y) = S(y^{-1}), so y and y^{-1} share one evaluation.
  std::vector<Element> ys;
  std::vector<double> weights;
  double far = 0.0;
  for (const Atom& a : mu.atoms()) {
    if (a.g == group.identity()) continue;
    const Element inv = group.invert(a.g);
    const double partner = mu.mass(inv);
    if (inv < a.g && partner > 0.0) continue;
    const double w = a.mass + (inv < a.g ? 0.0 : partner);
    const auto len = group.closed_form_length(a.g);
    if (len && *len > 2 * static_cast<std::int64_t>(grid.radius)) {
      far += w;
      continue;
    }
    ys.push_back(a.g);
    weights.push_back(w);
  }
  const auto s = energies_for(grid, ys);
  std::vector<DirichletValue> out(grid.count);
  for (std::size_t f = 0; f < grid.count; ++f) {
    double e = far * grid.norm2[f];
    for (std::size_t i = 0; i < ys.size(); ++i) e += 0.5 * weights[i] * s[i][f];
    out[f] = {e, grid.norm2[f] * mu.deficit()};
  }
  return out;
}

DirichletValue dirichlet_form(const Measure& mu, const TestFunction& f) {
  return dirichlet_forms(mu, std::span<const TestFunction>(&f, 1))[0];
}

std::vector<double> translation_energy(const Group& group, const Element& g, std::span<const TestFunction> suite) {
  const Grid grid = make_grid(group, suite);
  std::vector<double> out(grid.count);
  energies(grid, g, out.data());
  return out;
}

TailMoment tail_and_moment(const LineLaw& phi, std::int64_t r) {
  if (r < 0) throw DomainError("tail radius must be >= 0");
  TailMoment t;
  t.H_upper = phi.tail_beyond(r);
  t.H_lower = std::max(0.0, t.H_upper - phi.deficit());
  t.G = phi.truncated_second_moment(r);
  return t;
}

TailMoment tail_and_moment(const Measure& phi, std::int64_t r) { return tail_and_moment(line_law(phi), r); }

double monotonicity_constant(const LineLaw& phi, std::int64_t range) {
  if (phi.radius() >= 0) range = std::min(range, phi.radius());
  double running = std::numeric_limits<double>::infinity();
  double c = 1.0;
  for (std::int64_t m = 0; m <= range; ++m) {
    const double v = phi.mass(m);
    running = std::min(running, v);
    if (v == 0.0) continue;
    if (running == 0.0) return std::numeric_limits<double>::infinity();
    c = std::max(c, v / running);
  }
  return c;
}

std::vector<std::pair<int, std::int64_t>> power_decomposition(const Ball& ball, const Element& g) {
  const auto word = ball.geodesic_word(g);
  if (!word) throw DomainError("element outside the ball used for the decomposition");
  std::vector<std::pair<int, std::int64_t>> blocks;
  for (int label : *word) {
    const int i = std::abs(label) - 1;
    const std::int64_t step = label > 0 ? 1 : -1;
    if (!blocks.empty() && blocks.back().first == i) {
      blocks.back().second += step;
    } else {
      blocks.emplace_back(i, step);
    }
  }
  return blocks;
}

PoincareReport pseudo_poincare_report(const Group& group, const PoincareMode& mode, const Measure& phi,
                                      std::span<const TestFunction> suite) {
  PoincareReport rep;
  std::map<std::int64_t, double> trend;
  auto record = [&](PoincareRecord r) {
    const double factor = std::min(r.branch_H, r.branch_G);
    r.ratio = r.lhs / (factor * r.dirichlet);
    rep.max_ratio = std::max(rep.max_ratio, r.ratio);
    auto [it, fresh] = trend.emplace(r.n_or_wordlen, r.ratio);
    if (!fresh) it->second = std::max(it->second, r.ratio);
    if (!r.quantitative_ok) ++rep.violations;
    rep.records.push_back(std::move(r));
  };

  if (const auto* pm = std::get_if<PowerMode>(&mode)) {
    if (pm->generator < 0 || pm->generator >= group.generator_count()) throw DomainError("generator index out of range");
    if (pm->n_max < 1) throw DomainError("power mode needs n_max >= 1");
    const LineLaw law = line_law(phi);
    const Grid grid = make_grid(group, suite);
    const Element s = group.generators()[pm->generator];
    // |s^n| >= |n| for catalog generators, so S(s^n) = 2||f||^2 once |n| > 2R.
    const std::int64_t reach = 2 * static_cast<std::int64_t>(grid.radius);
    const std::int64_t top = std::max(pm->n_max, reach);
    std::vector<Element> powers;
    for (std::int64_t n = 1; n <= top; ++n) powers.push_back(group.power(s, n));
    const auto S = energies_for(grid, powers);
    const double beyond = tail_and_moment(law, reach).H_lower;
    std::vector<double> energy(grid.count);
    for (std::size_t f = 0; f < grid.count; ++f) {
      double e = grid.norm2[f] * beyond;
      for (std::int64_t n = 1; n <= reach; ++n) e += law.mass(n) * S[n - 1][f];
      if (!(e > 0.0)) throw DomainError("test function '" + suite[f].name + "' has zero Dirichlet energy");
      energy[f] = e;
    }
    rep.c_mono = monotonicity_constant(law, law.radius() >= 0 ? law.radius() : top);
    rep.deficit = law.deficit();
    for (std::int64_t n = 1; n <= pm->n_max; ++n) {
      const TailMoment tm = tail_and_moment(law, n);
      const double dn = static_cast<double>(n);
      for (std::size_t f = 0; f < grid.count; ++f) {
        PoincareRecord r;
        r.case_id = suite[f].name;
        r.n_or_wordlen = n;
        r.lhs = S[n - 1][f];
        r.branch_H = tm.H_upper > 0.0 ? 1.0 / tm.H_upper : std::numeric_limits<double>::infinity();
        r.branch_G = dn * dn / tm.G;
        r.dirichlet = energy[f];
        r.quantitative_ok = r.lhs * tm.H_upper <= 16.0 * rep.c_mono * energy[f] * (1.0 + 1e-12);
        record(std::move(r));
      }
    }
    if (rep.deficit > 0.0)
      rep.notes.push_back("phi deficit " + fmt17(rep.deficit) + " counted in H; energies use represented mass only");
  } else {
    const auto& em = std::get<ElementMode>(mode);
    if (em.phi1.has_value() == em.ell.has_value()) throw DomainError("element mode needs exactly one of phi1 and ell");
    if (phi.group() != group) throw DomainError("phi lives on a different group");
    const Grid grid = make_grid(group, suite);
    const auto dir = dirichlet_forms(phi, suite);
    for (std::size_t f = 0; f < dir.size(); ++f)
      if (!(dir[f].value > 0.0)) throw DomainError("test function '" + suite[f].name + "' has zero Dirichlet energy");
    const auto S = energies_for(grid, em.elements);
    std::optional<ThetaFn> theta;
    if (em.ell) theta.emplace(*em.ell);
    rep.deficit = phi.deficit();
    std::int64_t max_len = 0;
    for (const Element& g : em.elements) max_len = std::max(max_len, word_length_of(group, g, grid.radius * 2 + 2));
    std::optional<Ball> words;
    if (em.phi1) words.emplace(ball(group, static_cast<int>(max_len)));
    for (std::size_t k = 0; k < em.elements.size(); ++k) {
      const Element& g = em.elements[k];
      const std::int64_t len = word_length_of(group, g, static_cast<int>(max_len));
      const double dl = static_cast<double>(len);
      double bh = 0.0, bg = 0.0;
      std::string tag = "(" + std::to_string(g.c[0]) + " " + std::to_string(g.c[1]) + " " + std::to_string(g.c[2]) + ")";
      if (em.phi1) {
        const TailMoment tm = tail_and_moment(*em.phi1, len);
        bh = tm.H_upper > 0.0 ? 1.0 / tm.H_upper : std::numeric_limits<double>::infinity();
        bg = tm.G > 0.0 ? dl * dl / tm.G : std::numeric_limits<double>::infinity();
        const auto blocks = power_decomposition(*words, g);
        std::int64_t biggest = 0;
        for (const auto& b : blocks) biggest = std::max(biggest, std::abs(b.second));
        rep.notes.push_back("g=" + tag + " |g|=" + std::to_string(len) + " blocks M=" + std::to_string(blocks.size()) +
                            " max|x_j|=" + std::to_string(biggest));
      } else {
        bh = bg = (*theta)(1.0 + dl * dl);
      }
      for (std::size_t f = 0; f < grid.count; ++f) {
        PoincareRecord r;
        r.case_id = suite[f].name + "@" + tag;
        r.n_or_wordlen = len;
        r.lhs = S[k][f];
        r.branch_H = bh;
        r.branch_G = bg;
        r.dirichlet = dir[f].value;
        record(std::move(r));
      }
    }
  }
  rep.trend.assign(trend.begin(), trend.end());
  return rep;
}

void PoincareReport::write_csv(std::ostream& os) const {
  os << "case_id,n_or_wordlen,lhs,branch_H,branch_G,dirichlet,ratio\n";
  for (const auto& r : records) {
    os << r.case_id << ',' << r.n_or_wordlen << ',' << fmt17(r.lhs) << ',' << fmt17(r.branch_H) << ','
       << fmt17(r.branch_G) << ',' << fmt17(r.dirichlet) << ',' << fmt17(r.ratio) << '\n';
  }
}

Comparison dirichlet_comparison(const Measure& mu, const Measure& nu, std::span<const TestFunction> suite) {
  if (mu.group() != nu.group()) throw DomainError("comparison needs measures on the same group");
  const auto a = dirichlet_forms(mu, suite);
  const auto b = dirichlet_forms(nu, suite);
  Comparison c;
  c.ratios.resize(a.size());
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (!(b[f].value > 0.0)) throw DomainError("zero denominator energy for '" + suite[f].name + "'");
    c.ratios[f] = a[f].value / b[f].value;
    c.c_certified = std::max(c.c_certified, a[f].value / (b[f].value + b[f].uncertainty));
    if (f == 0 || c.ratios[f] > c.c_hat) {
      c.c_hat = c.ratios[f];
      c.argmax = f;
    }
  }
  c.case_id = suite[c.argmax].name;
  return c;
}

}  // namespace rwslow
