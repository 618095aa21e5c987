#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rwslow/group.hpp"
#include "rwslow/measures.hpp"

namespace rwslow {

struct SeriesEntry {
  std::int64_t n;
  double log_p_lower;
  double log_p_upper;
  double deficit;  ///< accumulated unrepresented mass at step n (direct engine)
};

/// n -> log mu^(n)(e) with certified lower/upper values.
struct ReturnSeries {
  std::string engine;   ///< "direct" or "fourier"
  std::string measure;  ///< measure descriptor
  std::vector<SeriesEntry> entries;
  std::vector<std::string> notices;

  const SeriesEntry* find(std::int64_t n) const;
  /// Columns n,log_p_lower,log_p_upper,engine,deficit (doubles as %.17g).
  void write_csv(std::ostream& os) const;
  static ReturnSeries read_csv(std::istream& is);
};

/// Dense walk on the Cayley ball of radius `cap`: one step multiplies on the
/// right by the measure, dropping (and reporting) mass that leaves the ball.
class CapWalker {
 public:
  CapWalker(const Measure& mu, int cap);

  const Ball& ball() const { return ball_; }
  std::size_t size() const { return ball_.size(); }
  const Measure& measure() const { return mu_; }

  /// out = in * mu restricted to the ball; returns the pushed-out mass.
  /// Only indices below `active` are read from `in`; returns the new active
  /// bound through `active`.
  double step(const std::vector<double>& in, std::vector<double>& out, std::size_t& active) const;
  /// Initial vector delta_e.
  std::vector<double> identity() const;

 private:
  Measure mu_;
  Ball ball_;
  std::vector<double> masses_;
  std::vector<Element> steps_;
  std::vector<std::int32_t> table_;  ///< ball index * support + j -> target or -1
  bool use_table_ = false;
};

/// mu * nu restricted to the cap ball; deficit = d_mu + d_nu - d_mu d_nu + pushed.
/// With `symmetrize`, g and g^{-1} receive the average of their two values
/// (exact symmetry for commuting factors such as powers of one measure).
Measure convolve(const Measure& mu, const Measure& nu, int cap, bool symmetrize = false);

/// p(n) = mu^(n)(e) for n = 1..nmax by iterated convolution on the cap ball.
ReturnSeries return_series_direct(const Measure& mu, std::int64_t nmax, int cap);

struct StructureReport {
  bool monotone = true;
  bool log_convex = true;
  double worst_monotone = 0.0;  ///< max of log p(2n+2) - log p(2n)
  double worst_convexity = 0.0;  ///< max second-difference violation
};

/// Checks nonincrease and convexity of log p(2n) over consecutive even n.
StructureReport check_structure(const ReturnSeries& s, double tol = 1e-10);

}  // namespace rwslow
