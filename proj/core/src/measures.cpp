#include "rwslow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rwslow/error.hpp"

namespace rwslow {

namespace {

/// Neumaier compensated sum.
struct Accumulator {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

constexpr std::int64_t kTailDirectTerms = 1 << 17;

LatticeProfile axis_profile(std::shared_ptr<const LineLaw> axis, int dim) {
  LatticeProfile p;
  p.axis = std::move(axis);
  p.dim = dim;
  return p;
}

/// One-dimensional law c w(|n|) on [-R, R] with its analytic deficit.
struct TruncatedLine {
  std::vector<double> masses;  // n = 0..R
  double deficit;
};

TruncatedLine truncate_line(const TailWeight& w, int radius) {
  Accumulator acc;
  std::vector<double> raw(static_cast<std::size_t>(radius) + 1);
  for (int n = radius; n >= 0; --n) {
    raw[n] = w.value(static_cast<double>(n));
    acc.add(n == 0 ? raw[n] : 2.0 * raw[n]);
  }
  const double tail = 2.0 * w.sum_beyond(radius);
  const double c = 1.0 / (acc.value() + tail);
  for (double& m : raw) m *= c;
  return {std::move(raw), c * tail};
}

Measure axis_measure(const Group& group, const TruncatedLine& line, int radius, std::string descriptor) {
  const int k = group.generator_count();
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(k) * (2 * radius) + 1);
  atoms.push_back({group.identity(), line.masses[0]});
  for (int i = 0; i < k; ++i) {
    const Element& s = group.generators()[i];
    for (int n = 1; n <= radius; ++n) {
      const double m = line.masses[n] / k;
      atoms.push_back({group.power(s, n), m});
      atoms.push_back({group.power(s, -n), m});
    }
  }
  return Measure(group, std::move(atoms), line.deficit, std::move(descriptor), radius);
}

}  // namespace

Measure::Measure(Group group, std::vector<Atom> atoms, double deficit, std::string descriptor, std::int64_t radius)
    : group_(std::move(group)), deficit_(deficit), descriptor_(std::move(descriptor)), radius_(radius) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.g < b.g; });
  atoms_.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (!(a.mass >= 0.0) || !std::isfinite(a.mass)) throw DomainError("measure masses must be finite and >= 0");
    if (!atoms_.empty() && atoms_.back().g == a.g) {
      atoms_.back().mass += a.mass;
    } else {
      atoms_.push_back(a);
    }
  }
  std::erase_if(atoms_, [](const Atom& a) { return a.mass == 0.0; });
  if (deficit_ < 0.0 && deficit_ > -1e-14) deficit_ = 0.0;
  if (!(deficit_ >= 0.0)) throw DomainError("measure deficit must be >= 0");
  const double total = total_mass() + deficit_;
  const double tol = 1e-12 + 1e-15 * static_cast<double>(atoms_.size());
  if (!(std::abs(total - 1.0) <= tol)) {
    throw DomainError("measure mass + deficit = " + format_number(total) + " differs from 1");
  }
}

double Measure::mass(const Element& g) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), g, [](const Atom& a, const Element& e) { return a.g < e; });
  return (it != atoms_.end() && it->g == g) ? it->mass : 0.0;
}

double Measure::total_mass() const {
  Accumulator acc;
  for (const Atom& a : atoms_) acc.add(a.mass);
  return acc.value();
}

bool Measure::is_symmetric() const {
  for (const Atom& a : atoms_) {
    if (mass(group_.invert(a.g)) != a.mass) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Measure delta_measure(const Group& group) {
  Measure m(group, {{group.identity(), 1.0}}, 0.0, "delta", 0);
  if (group.is_lattice()) m.set_profile(axis_profile(std::make_shared<LineLaw>(LineLaw::finite({1.0})), group.rank()));
  return m;
}

Measure lazy_uniform(const Group& group) {
  const int k = group.generator_count();
  std::vector<Atom> atoms{{group.identity(), 0.5}};
  for (const Element& s : group.signed_generators()) atoms.push_back({s, 0.25 / k});
  Measure m(group, std::move(atoms), 0.0, "lazy", 1);
  if (group.is_lattice()) {
    m.set_profile(axis_profile(std::make_shared<LineLaw>(LineLaw::finite({0.5, 0.25})), group.rank()));
  }
  return m;
}

Measure radial(const Group& group, const SlowVaryFn& ell, RadialVariant variant, int radius) {
  if (radius < 0) throw DomainError("radius must be >= 0");
  const bool volume = variant == RadialVariant::Volume;
  const std::string desc = std::string(volume ? "radialV(" : "radialD(") + ell.token() + "," + std::to_string(radius) + ")";
  const int D = group.growth_degree();

  if (group.is_lattice() && group.rank() == 1) {
    auto w = volume ? radial_volume_weight(ell) : genpow_weight(ell);
    Measure m = axis_measure(group, truncate_line(*w, radius), radius, desc);
    m.set_profile(axis_profile(std::make_shared<LineLaw>(LineLaw::kernel(w)), 1));
    return m;
  }

  // Volumes up to R+1 (V(1+|g|) for |g| <= R); lattices in closed form.
  const Ball b = ball(group, volume && !group.is_lattice() ? radius + 1 : radius);
  auto vol = [&](std::int64_t r) -> double {
    if (auto v = group.lattice_volume(r)) return *v;
    if (r <= b.radius()) return static_cast<double>(b.volumes()[r]);
    const double vr = static_cast<double>(b.volumes()[b.radius()]);
    return vr * std::pow(static_cast<double>(r) / b.radius(), D);
  };
  auto sphere = [&](std::int64_t k) -> double { return k == 0 ? 1.0 : vol(k) - vol(k - 1); };
  auto weight = [&](std::int64_t k) -> double {
    const double t = static_cast<double>(k);
    return volume ? 1.0 / (vol(k + 1) * ell(1.0 + t)) : 1.0 / (std::pow(1.0 + t, D) * ell(1.0 + t * t));
  };

  std::vector<double> wk(static_cast<std::size_t>(radius) + 1);
  Accumulator represented;
  for (int k = 0; k <= radius; ++k) {
    wk[k] = weight(k);
    represented.add(sphere(k) * wk[k]);
  }
  // Tail: direct sum over spheres, then S(k) w_k ~ a / ((1+k) ell(.)) beyond K.
  const std::int64_t K = std::max<std::int64_t>(kTailDirectTerms, 4 * static_cast<std::int64_t>(radius));
  Accumulator tail;
  for (std::int64_t k = K; k > radius; --k) tail.add(sphere(k) * weight(k));
  const double t = static_cast<double>(K);
  const double a = sphere(K) * weight(K) * (1.0 + t) * (volume ? ell(1.0 + t) : ell(1.0 + t * t));
  tail.add(a * (volume ? shifted_kernel_weight(ell)->sum_beyond(K) : genpow_weight(ell)->sum_beyond(K)));

  const double c = 1.0 / (represented.value() + tail.value());
  std::vector<Atom> atoms;
  atoms.reserve(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const int len = b.lengths()[i];
    if (len <= radius) atoms.push_back({b.elements()[i], c * wk[len]});
  }
  return Measure(group, std::move(atoms), c * tail.value(), desc, radius);
}

Measure generator_power(const Group& group, const SlowVaryFn& ell, int radius) {
  if (radius < 1) throw DomainError("generator_power needs R >= 1");
  auto w = genpow_weight(ell);
  Measure m = axis_measure(group, truncate_line(*w, radius), radius,
                           "genpow(" + ell.token() + "," + std::to_string(radius) + ")");
  if (group.is_lattice()) m.set_profile(axis_profile(std::make_shared<LineLaw>(LineLaw::kernel(w)), group.rank()));
  return m;
}

Measure stable_like(const Group& group, double alpha, int radius) {
  if (radius < 1) throw DomainError("stable_like needs R >= 1");
  auto w = stable_weight(alpha);
  Measure m = axis_measure(group, truncate_line(*w, radius), radius,
                           "stable(" + format_number(alpha) + "," + std::to_string(radius) + ")");
  if (group.is_lattice()) m.set_profile(axis_profile(std::make_shared<LineLaw>(LineLaw::kernel(w)), group.rank()));
  return m;
}

Measure rescale(const Measure& mu, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("rescale factor must lie in (0, 1]");
  std::vector<Atom> atoms(mu.atoms().begin(), mu.atoms().end());
  for (Atom& a : atoms) a.mass *= lambda;
  atoms.push_back({mu.group().identity(), 1.0 - lambda});
  Measure out(mu.group(), std::move(atoms), lambda * mu.deficit(), mu.descriptor(), mu.radius());
  if (auto p = mu.profile()) {
    p->outer_scale *= lambda;
    out.set_profile(*p);
  }
  return out;
}

Measure lazify(const Measure& mu) {
  Measure out = rescale(mu, 0.5);
  out.set_descriptor("lazify(" + mu.descriptor() + ")");
  return out;
}

std::vector<std::int64_t> support_lengths(const Measure& mu) {
  const Group& g = mu.group();
  std::vector<std::int64_t> out;
  out.reserve(mu.support_size());
  if (g.is_lattice()) {
    for (const Atom& a : mu.atoms()) out.push_back(*g.closed_form_length(a.g));
    return out;
  }
  if (mu.radius() < 0) throw DomainError("word lengths unavailable: measure radius unknown");
  WordMetric metric(g, static_cast<int>(mu.radius()));
  for (const Atom& a : mu.atoms()) {
    auto len = metric.length(a.g);
    if (!len) throw DomainError("word length missing for a support element");
    out.push_back(*len);
  }
  return out;
}

MomentValue moment(const Measure& mu, const MomentFn& rho) {
  const auto lengths = support_lengths(mu);
  Accumulator acc;
  for (std::size_t i = 0; i < lengths.size(); ++i) acc.add(rho(static_cast<double>(lengths[i])) * mu.atoms()[i].mass);
  return {acc.value(), mu.deficit() > 0.0};
}

namespace {

/// (rho value, mass) pairs of the support sorted by decreasing rho with
/// running masses of {rho >= value}.
std::vector<std::pair<double, double>> rho_levels(const Measure& mu, const MomentFn& rho) {
  const auto lengths = support_lengths(mu);
  std::vector<std::pair<std::int64_t, double>> by_len;
  by_len.reserve(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) by_len.emplace_back(lengths[i], mu.atoms()[i].mass);
  std::sort(by_len.begin(), by_len.end(), [](auto& a, auto& b) { return a.first > b.first; });
  std::vector<std::pair<double, double>> levels;
  double running = 0.0;
  for (std::size_t i = 0; i < by_len.size();) {
    std::size_t j = i;
    while (j < by_len.size() && by_len[j].first == by_len[i].first) running += by_len[j++].second;
    const double r = rho(static_cast<double>(by_len[i].first));
    if (!levels.empty() && levels.back().first == r) {
      levels.back().second = running;
    } else {
      levels.emplace_back(r, running);
    }
    i = j;
  }
  return levels;
}

}  // namespace

MomentValue weak_moment(const Measure& mu, const MomentFn& rho) {
  double w = 0.0;
  for (auto [r, mass] : rho_levels(mu, rho)) w = std::max(w, r * mass);
  return {w, mu.deficit() > 0.0};
}

double moment_witness_scale(const Measure& mu, const MomentFn& rho) {
  const double m = moment(mu, rho).value;
  return m <= 2.0 ? 1.0 : 1.0 / (m - 1.0);
}

double weak_moment_witness_scale(const Measure& mu, const MomentFn& rho) {
  double w = 0.0;
  const double base = rho(0.0);
  for (auto [r, mass] : rho_levels(mu, rho))
    if (r > base) w = std::max(w, r * mass);
  return w <= 2.0 ? 1.0 : 2.0 / w;
}

std::vector<double> ideal_weak_profile(const Measure& mu, const MomentFn& rho, std::span<const double> s_grid) {
  const auto& p = mu.profile();
  if (!p || p->dim != 1 || p->outer || !mu.group().is_lattice()) {
    throw UnsupportedError("ideal weak profile needs a measure on Z with an analytic axis law");
  }
  std::vector<double> out;
  out.reserve(s_grid.size());
  for (double s : s_grid) {
    const double lr = rho.log_inverse(s);
    double tail;
    if (lr == -std::numeric_limits<double>::infinity()) {
      tail = 1.0;
    } else if (lr == std::numeric_limits<double>::infinity()) {
      tail = 0.0;
    } else {
      // {rho(|n|) > s} = {|n| > r}
      tail = lr < 34.0 ? p->axis->tail_beyond(static_cast<std::int64_t>(std::floor(std::exp(lr))))
                       : p->axis->tail_beyond_log(lr);
    }
    out.push_back(s * p->outer_scale * tail);
  }
  return out;
}

LineLaw line_law(const Measure& mu) {
  const Group& g = mu.group();
  if (!(g.is_lattice() && g.rank() == 1)) throw DomainError("line law requires a measure on Z");
  std::int64_t r = 0;
  for (const Atom& a : mu.atoms()) r = std::max(r, std::abs(a.g.c[0]));
  std::vector<double> masses(static_cast<std::size_t>(r) + 1, 0.0);
  for (const Atom& a : mu.atoms()) {
    if (a.g.c[0] >= 0) masses[a.g.c[0]] = a.mass;
    else if (mu.mass(g.invert(a.g)) != a.mass) throw DomainError("line law requires a symmetric measure");
  }
  return LineLaw::finite(std::move(masses), mu.deficit());
}

}  // namespace rwslow
