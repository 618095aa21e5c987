#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwslow/group.hpp"
#include "rwslow/lattice_law.hpp"
#include "rwslow/slowly_varying.hpp"

namespace rwslow {

struct Atom {
  Element g;
  double mass;
};

/// Analytic description of an ideal lattice law:
///   1 - mu_hat(theta) = outer_scale * G(inner_scale * (1/dim) sum_i F_axis(theta_i))
/// with F_axis = 1 - axis_hat and G the identity when `outer` is null.
struct LatticeProfile {
  std::shared_ptr<const LineLaw> axis;
  int dim = 1;
  double inner_scale = 1.0;
  std::shared_ptr<const OuterSymbol> outer;
  double outer_scale = 1.0;
  std::string outer_token;
};

/// Finitely supported symmetric measure with an explicit deficit (mass of the
/// ideal measure that is not represented).
class Measure {
 public:
  /// Sorts and merges atoms; drops zero masses. Validates masses >= 0 and
  /// sum + deficit = 1 within 1e-12 * (1 + atom count).
  Measure(Group group, std::vector<Atom> atoms, double deficit, std::string descriptor,
          std::int64_t radius = -1);

  const Group& group() const { return group_; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t support_size() const { return atoms_.size(); }
  double mass(const Element& g) const;
  double identity_mass() const { return mass(group_.identity()); }
  double deficit() const { return deficit_; }
  double total_mass() const;
  const std::string& descriptor() const { return descriptor_; }
  /// Largest word length in the support (-1 when unknown).
  std::int64_t radius() const { return radius_; }
  bool is_symmetric() const;

  const std::optional<LatticeProfile>& profile() const { return profile_; }
  void set_profile(LatticeProfile p) { profile_ = std::move(p); }
  void set_descriptor(std::string d) { descriptor_ = std::move(d); }

 private:
  Group group_;
  std::vector<Atom> atoms_;
  double deficit_;
  std::string descriptor_;
  std::int64_t radius_;
  std::optional<LatticeProfile> profile_;
};

Measure delta_measure(const Group& group);
/// phi(e) = 1/2, phi(s_i^{+-1}) = 1/(4k).
Measure lazy_uniform(const Group& group);

enum class RadialVariant { Volume, Degree };
/// Volume: c / (V(1+|g|) ell(1+|g|)); Degree: c / ((1+|g|)^D ell(1+|g|^2)),
/// on the ball of radius R with the analytic tail as deficit.
Measure radial(const Group& group, const SlowVaryFn& ell, RadialVariant variant, int radius);
/// k^{-1} sum_i sum_{|n|<=R} phi_1(n) [g = s_i^n], phi_1(n) ~ 1/((1+|n|) ell(1+n^2)).
Measure generator_power(const Group& group, const SlowVaryFn& ell, int radius);
/// Same structure with phi_1(n) ~ (1+|n|)^{-1-alpha}.
Measure stable_like(const Group& group, double alpha, int radius);
/// (delta_e + mu) / 2.
Measure lazify(const Measure& mu);
/// (1 - lambda) delta_e + lambda mu.
Measure rescale(const Measure& mu, double lambda);

/// Word lengths of the support atoms (closed form on lattices, BFS on H3).
std::vector<std::int64_t> support_lengths(const Measure& mu);

struct MomentValue {
  double value;
  bool lower_bound;  ///< deficit > 0: the ideal moment is at least this
};

MomentValue moment(const Measure& mu, const MomentFn& rho);
MomentValue weak_moment(const Measure& mu, const MomentFn& rho);

/// Largest lambda in (0, 1] with moment((1-lambda) delta + lambda mu) <= 2.
double moment_witness_scale(const Measure& mu, const MomentFn& rho);
/// Largest lambda in (0, 1] with W(rho, (1-lambda) delta + lambda mu) <= 2.
double weak_moment_witness_scale(const Measure& mu, const MomentFn& rho);

/// s * mu({g : rho(|g|) > s}) for each s of the grid, using the ideal law of
/// a measure on Z with an analytic profile (mu({|g| > r}) = tail beyond r).
std::vector<double> ideal_weak_profile(const Measure& mu, const MomentFn& rho, std::span<const double> s_grid);

/// The symmetric one-dimensional law of a measure on Z: masses at n >= 0.
LineLaw line_law(const Measure& mu);

}  // namespace rwslow
