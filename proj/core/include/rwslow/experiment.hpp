#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rwslow/asymptotics.hpp"
#include "rwslow/convolution.hpp"
#include "rwslow/dirichlet.hpp"

namespace rwslow {

/// Line-oriented config: `[section]` headers and `key = value` lines, `;`
/// comments. Sections and keys:
///
///   [experiment] name, group, measure, seed, output
///   [series]     engine (fourier|direct|both), steps, nmax, cap
///   [verdict]    prediction, window, tolerance, ratio_bound
///   [poincare]   mode (power|element), phi, generator, nmax, suite_radius,
///                suite_random
///
/// `steps` is a comma list or `geom:<a>:<b>:<count>` (even step counts,
/// geometric). `prediction` is `polynomial:<e>`, `stretched:<e>`,
/// `slowcorr:<k>:<delta>` or `ell:<slowly varying token>`.
struct ExperimentConfig {
  std::string name = "experiment";
  std::string group = "zd:1";
  std::string measure = "lazy";
  std::uint64_t seed = 1;
  std::string output = "out";

  std::string engine = "fourier";
  std::string steps;
  std::int64_t nmax = 0;
  int cap = 0;

  std::string prediction;
  std::string window;
  double tolerance = 0.1;
  double ratio_bound = 4.0;

  std::string poincare_mode;
  std::string phi;
  int generator = 0;
  std::int64_t poincare_nmax = 50;
  int suite_radius = 16;
  int suite_random = 50;

  /// Throws ParseError on unknown sections/keys or malformed values.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& file);
  /// Canonical text; parse(to_text()) reproduces it exactly.
  std::string to_text() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Step counts described by a `steps` value.
std::vector<std::int64_t> expand_steps(std::string_view steps);
/// Fourier steps when none are given: every n up to 4096, else 64 geometric points.
std::vector<std::int64_t> default_steps(std::int64_t nmax);
/// `a:b` -> [a, b].
FitWindow parse_window(std::string_view text);
/// Prediction token (see ExperimentConfig).
Prediction parse_prediction(std::string_view token);

/// Series cache in $RWSLOW_CACHE_DIR (default `.rwslow-cache`), keyed by the
/// SHA-256 of the normalized series parameters; writes go to a temporary
/// file renamed into place.
class SeriesCache {
 public:
  explicit SeriesCache(std::filesystem::path dir);
  static SeriesCache from_environment();

  const std::filesystem::path& dir() const { return dir_; }
  std::optional<ReturnSeries> load(const std::string& key_text) const;
  void store(const std::string& key_text, const ReturnSeries& series) const;
  /// Removes every cache entry; returns the number of files removed.
  std::size_t clear() const;

  static std::string hash(const std::string& key_text);

 private:
  std::filesystem::path dir_;
};

struct ExperimentSummary {
  std::string name;
  std::vector<std::filesystem::path> files;
  std::size_t cache_hits = 0;
  std::size_t computed = 0;
  std::optional<FitResult> verdict;
  std::optional<double> cross_engine_delta;  ///< max |delta log p| on the overlap
  std::optional<StructureReport> structure;
  std::optional<std::size_t> poincare_violations;
  std::vector<std::string> notes;

  bool failed() const;
};

ExperimentSummary run_experiment(const ExperimentConfig& config, const SeriesCache& cache);
/// Runs independent experiments concurrently; results in input order.
std::vector<ExperimentSummary> run_batch(std::span<const ExperimentConfig> configs, const SeriesCache& cache);

/// Writes `<stem>.loglog.txt` (log n, log p), `<stem>.stretched.txt`
/// (log n, log(-log p)) and `<stem>.q.txt` (n, -log p(2n) log n / n).
std::vector<std::filesystem::path> export_plotdata(const ReturnSeries& series, const std::filesystem::path& stem);
/// Writes `<stem>.ratio.txt` (word length or n, ratio).
std::vector<std::filesystem::path> export_plotdata(const PoincareReport& report, const std::filesystem::path& stem);

/// Verdict rows `model,exponent,predicted,residual,pass`.
void write_verdict_csv(std::ostream& os, const FitResult& fit);

/// Element-mode bound matching a measure descriptor: theta(1+|g|^2) for the
/// radial families, the one-dimensional law (the descriptor built on Z)
/// otherwise.
ElementMode element_mode_for(std::string_view descriptor, std::vector<Element> elements);

}  // namespace rwslow
