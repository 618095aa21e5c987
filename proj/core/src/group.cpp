#include "rwslow/group.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "rwslow/error.hpp"

namespace rwslow {

std::size_t ElementHash::operator()(const Element& e) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (auto v : e.c) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

Group::Group(std::string name, GroupKind kind, int rank, int degree, std::vector<Element> gens)
    : name_(std::move(name)), kind_(kind), rank_(rank), degree_(degree), generators_(std::move(gens)) {}

Group Group::lattice(int d) {
  if (d < 1 || d > 3) {
    throw UnsupportedError("unsupported lattice dimension " + std::to_string(d) + " (catalog: 1..3)");
  }
  std::vector<Element> gens;
  for (int i = 0; i < d; ++i) {
    Element e;
    e.c[static_cast<std::size_t>(i)] = 1;
    gens.push_back(e);
  }
  return Group("zd:" + std::to_string(d), GroupKind::Lattice, d, d, std::move(gens));
}

Group Group::heisenberg() {
  return Group("heis3", GroupKind::Heisenberg, 3, 4, {Element{{1, 0, 0}}, Element{{0, 1, 0}}});
}

Group Group::from_token(std::string_view token) {
  if (token == "heis3") return heisenberg();
  if (token.starts_with("zd:")) {
    auto rest = token.substr(3);
    int d = 0;
    for (char ch : rest) {
      if (ch < '0' || ch > '9') throw ParseError("bad group token '" + std::string(token) + "'");
      d = d * 10 + (ch - '0');
      if (d > 1000) break;
    }
    if (rest.empty()) throw ParseError("bad group token '" + std::string(token) + "'");
    return lattice(d);
  }
  throw ParseError("unknown group token '" + std::string(token) + "'");
}

std::vector<Element> Group::signed_generators() const {
  std::vector<Element> out;
  out.reserve(2 * generators_.size());
  for (const auto& s : generators_) {
    out.push_back(s);
    out.push_back(invert(s));
  }
  return out;
}

Element Group::compose(const Element& g, const Element& h) const {
  Element r;
  r.c[0] = g.c[0] + h.c[0];
  r.c[1] = g.c[1] + h.c[1];
  r.c[2] = g.c[2] + h.c[2];
  if (kind_ == GroupKind::Heisenberg) r.c[2] += g.c[0] * h.c[1];
  return r;
}

Element Group::invert(const Element& g) const {
  Element r{{-g.c[0], -g.c[1], -g.c[2]}};
  if (kind_ == GroupKind::Heisenberg) r.c[2] = -g.c[2] + g.c[0] * g.c[1];
  return r;
}

Element Group::power(const Element& g, std::int64_t n) const {
  Element r{{n * g.c[0], n * g.c[1], n * g.c[2]}};
  if (kind_ == GroupKind::Heisenberg) r.c[2] += g.c[0] * g.c[1] * (n * (n - 1) / 2);
  return r;
}

std::optional<std::int64_t> Group::closed_form_length(const Element& g) const {
  if (kind_ != GroupKind::Lattice) return std::nullopt;
  return std::abs(g.c[0]) + std::abs(g.c[1]) + std::abs(g.c[2]);
}

namespace {

double binomial(std::int64_t n, int k) {
  if (k < 0 || n < k) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return r;
}

}  // namespace

std::optional<double> Group::lattice_volume(std::int64_t k) const {
  if (kind_ != GroupKind::Lattice) return std::nullopt;
  if (k < 0) return 0.0;
  double v = 0.0;
  for (int j = 0; j <= rank_; ++j) v += std::ldexp(binomial(rank_, j) * binomial(k, j), j);
  return v;
}

std::optional<double> Group::lattice_sphere_size(std::int64_t k) const {
  if (kind_ != GroupKind::Lattice) return std::nullopt;
  if (k == 0) return 1.0;
  return *lattice_volume(k) - *lattice_volume(k - 1);
}

// ---------------------------------------------------------------------------

ElementIndex::ElementIndex(std::span<const Element> elements) : size_(elements.size()) {
  if (elements.empty()) return;
  std::array<std::int64_t, 3> lo{}, hi{};
  lo = hi = elements.front().c;
  for (const auto& e : elements) {
    for (std::size_t i = 0; i < 3; ++i) {
      lo[i] = std::min(lo[i], e.c[i]);
      hi[i] = std::max(hi[i], e.c[i]);
    }
  }
  double box = 1.0;
  for (std::size_t i = 0; i < 3; ++i) box *= static_cast<double>(hi[i] - lo[i] + 1);
  // Dense table only while it stays within a small multiple of the set size.
  use_dense_ = box <= std::max(8.0 * static_cast<double>(elements.size()), 1.0e6) && box <= 4.0e8 &&
               elements.size() < static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max());
  if (use_dense_) {
    lo_ = lo;
    for (std::size_t i = 0; i < 3; ++i) extent_[i] = hi[i] - lo[i] + 1;
    dense_.assign(static_cast<std::size_t>(box), -1);
    for (std::size_t k = 0; k < elements.size(); ++k) {
      const auto& e = elements[k];
      auto pos = ((e.c[0] - lo_[0]) * extent_[1] + (e.c[1] - lo_[1])) * extent_[2] + (e.c[2] - lo_[2]);
      dense_[static_cast<std::size_t>(pos)] = static_cast<std::int32_t>(k);
    }
  } else {
    sparse_.reserve(elements.size());
    for (std::size_t k = 0; k < elements.size(); ++k) sparse_.emplace(elements[k], static_cast<std::int64_t>(k));
  }
}

std::int64_t ElementIndex::find(const Element& e) const {
  if (use_dense_) {
    std::int64_t pos = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      auto off = e.c[i] - lo_[i];
      if (off < 0 || off >= extent_[i]) return -1;
      pos = pos * extent_[i] + off;
    }
    return dense_[static_cast<std::size_t>(pos)];
  }
  auto it = sparse_.find(e);
  return it == sparse_.end() ? -1 : it->second;
}

// ---------------------------------------------------------------------------

Ball ball(const Group& group, int radius, std::size_t element_cap) {
  if (radius < 0) throw DomainError("ball radius must be nonnegative");
  if (group.is_lattice()) {
    auto v = *group.lattice_volume(radius);
    if (v > static_cast<double>(element_cap)) {
      throw BudgetError("ball of radius " + std::to_string(radius) + " in " + group.name() + " exceeds element cap");
    }
  }
  Ball b(group);
  b.radius_ = radius;
  const auto gens = group.signed_generators();

  std::unordered_map<Element, std::int64_t, ElementHash> seen;
  b.elements_.push_back(group.identity());
  b.lengths_.push_back(0);
  b.parent_.push_back(-1);
  b.parent_label_.push_back(0);
  seen.emplace(group.identity(), 0);

  std::size_t frontier_begin = 0;
  for (int len = 1; len <= radius; ++len) {
    const std::size_t frontier_end = b.elements_.size();
    for (std::size_t k = frontier_begin; k < frontier_end; ++k) {
      const Element g = b.elements_[k];
      for (std::size_t s = 0; s < gens.size(); ++s) {
        Element h = group.compose(g, gens[s]);
        if (seen.contains(h)) continue;
        if (b.elements_.size() >= element_cap) {
          throw BudgetError("ball of radius " + std::to_string(radius) + " in " + group.name() +
                            " exceeds element cap of " + std::to_string(element_cap));
        }
        seen.emplace(h, static_cast<std::int64_t>(b.elements_.size()));
        b.elements_.push_back(h);
        b.lengths_.push_back(len);
        b.parent_.push_back(static_cast<std::int64_t>(k));
        int label = static_cast<int>(s / 2) + 1;
        b.parent_label_.push_back(s % 2 == 0 ? label : -label);
      }
    }
    frontier_begin = frontier_end;
  }
  seen.clear();

  b.volumes_.assign(static_cast<std::size_t>(radius) + 1, 0);
  for (int len : b.lengths_) ++b.volumes_[static_cast<std::size_t>(len)];
  for (std::size_t i = 1; i < b.volumes_.size(); ++i) b.volumes_[i] += b.volumes_[i - 1];
  b.index_ = ElementIndex(b.elements_);
  return b;
}

std::optional<int> Ball::word_length(const Element& g) const {
  auto i = index_.find(g);
  if (i < 0) return std::nullopt;
  return lengths_[static_cast<std::size_t>(i)];
}

std::optional<std::vector<int>> Ball::geodesic_word(const Element& g) const {
  auto i = index_.find(g);
  if (i < 0) return std::nullopt;
  std::vector<int> word;
  while (parent_[static_cast<std::size_t>(i)] >= 0) {
    word.push_back(parent_label_[static_cast<std::size_t>(i)]);
    i = parent_[static_cast<std::size_t>(i)];
  }
  std::reverse(word.begin(), word.end());
  return word;
}

GrowthEstimate growth_degree(const Ball& b) {
  if (b.radius() < 8) throw DomainError("growth_degree needs radius >= 8");
  const int r = b.radius();
  std::vector<double> xs, ys;
  for (int n = r / 2; n <= r; ++n) {
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(static_cast<double>(b.volumes()[static_cast<std::size_t>(n)])));
  }
  const double m = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (my + slope * (xs[i] - mx));
    ss += e * e;
  }
  return {slope, std::sqrt(ss / m)};
}

// ---------------------------------------------------------------------------

WordMetric::WordMetric(const Group& g, int radius) : group_(g), radius_(radius) {
  if (g.is_lattice()) {
    radius_ = std::numeric_limits<int>::max();
  } else {
    ball_ = std::make_shared<const Ball>(rwslow::ball(g, radius));
  }
}

std::optional<std::int64_t> WordMetric::length(const Element& g) const {
  if (auto l = group_.closed_form_length(g)) return l;
  if (auto l = ball_->word_length(g)) return *l;
  return std::nullopt;
}

}  // namespace rwslow
