#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rwslow {

/// Canonical integer coordinates of a group element.
///
/// Lattices Z^d use the first d coordinates and keep the rest at zero. The
/// discrete Heisenberg group uses (a, b, c) with the law
/// (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab').
struct Element {
  std::array<std::int64_t, 3> c{};

  friend auto operator<=>(const Element&, const Element&) = default;
};

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept;
};

enum class GroupKind { Lattice, Heisenberg };

/// One of the catalog groups of polynomial growth: Z, Z^2, Z^3, H3(Z).
class Group {
 public:
  static Group lattice(int d);
  static Group heisenberg();
  /// Accepts `zd:1`, `zd:2`, `zd:3` and `heis3`.
  static Group from_token(std::string_view token);

  const std::string& name() const { return name_; }
  GroupKind kind() const { return kind_; }
  bool is_lattice() const { return kind_ == GroupKind::Lattice; }
  /// d for Z^d; 3 (coordinate count) for H3.
  int rank() const { return rank_; }
  /// Degree D of polynomial volume growth.
  int growth_degree() const { return degree_; }

  int generator_count() const { return static_cast<int>(generators_.size()); }
  const std::vector<Element>& generators() const { return generators_; }
  /// s_1, s_1^{-1}, s_2, s_2^{-1}, ... (the identity of S* is left implicit).
  std::vector<Element> signed_generators() const;

  Element identity() const { return Element{}; }
  Element compose(const Element& g, const Element& h) const;
  Element invert(const Element& g) const;
  Element power(const Element& g, std::int64_t n) const;

  /// Exact word length when a closed form exists (L1 norm on lattices).
  std::optional<std::int64_t> closed_form_length(const Element& g) const;

  /// Exact sphere size S(k) = V(k) - V(k-1) for lattices; nullopt otherwise.
  std::optional<double> lattice_sphere_size(std::int64_t k) const;
  /// Exact V(k) for lattices; nullopt otherwise.
  std::optional<double> lattice_volume(std::int64_t k) const;

  friend bool operator==(const Group& a, const Group& b) { return a.name_ == b.name_; }

 private:
  Group(std::string name, GroupKind kind, int rank, int degree, std::vector<Element> gens);

  std::string name_;
  GroupKind kind_;
  int rank_;
  int degree_;
  std::vector<Element> generators_;
};

/// Element -> dense index lookup. Uses a dense bounding-box table when the
/// box is small enough, a hash map otherwise.
class ElementIndex {
 public:
  ElementIndex() = default;
  explicit ElementIndex(std::span<const Element> elements);

  /// Index of `e` in the construction span, or -1.
  std::int64_t find(const Element& e) const;
  std::size_t size() const { return size_; }

 private:
  std::size_t size_ = 0;
  std::array<std::int64_t, 3> lo_{};
  std::array<std::int64_t, 3> extent_{};
  std::vector<std::int32_t> dense_;
  std::unordered_map<Element, std::int64_t, ElementHash> sparse_;
  bool use_dense_ = false;
};

inline constexpr std::size_t kDefaultElementCap = 50'000'000;

/// Ball of radius R in the Cayley graph, computed by breadth-first search.
class Ball {
 public:
  const Group& group() const { return group_; }
  int radius() const { return radius_; }
  std::size_t size() const { return elements_.size(); }

  /// Elements in BFS order (nondecreasing word length).
  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<int>& lengths() const { return lengths_; }
  /// V(0..R).
  const std::vector<std::int64_t>& volumes() const { return volumes_; }

  std::optional<int> word_length(const Element& g) const;
  std::int64_t index_of(const Element& g) const { return index_.find(g); }

  /// A geodesic word for g as signed generator labels: +(i+1) for s_i,
  /// -(i+1) for s_i^{-1}. Obtained by unrolling BFS parents.
  std::optional<std::vector<int>> geodesic_word(const Element& g) const;

  friend Ball ball(const Group& group, int radius, std::size_t element_cap);

 private:
  explicit Ball(Group g) : group_(std::move(g)) {}

  Group group_;
  int radius_ = 0;
  std::vector<Element> elements_;
  std::vector<int> lengths_;
  std::vector<std::int64_t> parent_;
  std::vector<int> parent_label_;
  std::vector<std::int64_t> volumes_;
  ElementIndex index_;
};

/// Throws BudgetError when the ball would exceed `element_cap` elements.
Ball ball(const Group& group, int radius, std::size_t element_cap = kDefaultElementCap);

struct GrowthEstimate {
  double degree;
  double residual;  ///< RMS residual of the log-log fit
};

/// Least-squares slope of log V(n) against log n over n in [R/2, R].
/// Requires radius >= 8.
GrowthEstimate growth_degree(const Ball& b);

/// Word lengths for elements of a group: closed form on lattices, a shared
/// BFS ball on H3.
class WordMetric {
 public:
  explicit WordMetric(const Group& g, int radius = 0);

  const Group& group() const { return group_; }
  /// Radius up to which lengths are guaranteed available.
  int radius() const { return radius_; }
  std::optional<std::int64_t> length(const Element& g) const;
  /// The underlying ball (H3 only).
  const Ball* ball() const { return ball_.get(); }

 private:
  Group group_;
  int radius_;
  std::shared_ptr<const Ball> ball_;
};

}  // namespace rwslow
