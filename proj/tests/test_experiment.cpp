#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rwslow/descriptors.hpp"
#include "rwslow/error.hpp"
#include "rwslow/experiment.hpp"

using namespace rwslow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("rwslow_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const char* kStretchedConfig = R"([experiment]
name = stretched
measure = lazify(genpow(logpow:1.0,100))
[series]
steps = geom:2000:2000000:16
[verdict]
prediction = ell:logpow:1
)";

}  // namespace

TEST(Config, RoundTrip) {
  const auto c = ExperimentConfig::parse(
      "[experiment]\nname = a\ngroup = heis3\nmeasure = lazy ; comment\n[series]\nengine = direct\nnmax = 40\ncap = 20\n"
      "[poincare]\nmode = element\nphi = radialD(logpow:1,8)\n");
  EXPECT_EQ(c.group, "heis3");
  EXPECT_EQ(c.engine, "direct");
  EXPECT_EQ(c.cap, 20);
  EXPECT_EQ(c.poincare_mode, "element");
  EXPECT_EQ(ExperimentConfig::parse(c.to_text()), c);
  EXPECT_EQ(ExperimentConfig::parse(c.to_text()).to_text(), c.to_text());
}

TEST(Config, RejectsUnknownKeysAndSections) {
  EXPECT_THROW(ExperimentConfig::parse("[experiment]\ncolour = red\n"), ParseError);
  EXPECT_THROW(ExperimentConfig::parse("[plots]\nx = 1\n"), ParseError);
  EXPECT_THROW(ExperimentConfig::parse("[series]\nnmax = many\n"), ParseError);
}

TEST(Config, Steps) {
  EXPECT_EQ(expand_steps("2,4,10"), (std::vector<std::int64_t>{2, 4, 10}));
  const auto g = expand_steps("geom:2:2000:4");
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g.front(), 2);
  EXPECT_EQ(g.back(), 2000);
  for (auto n : g) EXPECT_EQ(n % 2, 0);
  EXPECT_THROW(expand_steps("geom:2:1"), ParseError);
}

TEST(Config, WindowAndPrediction) {
  const FitWindow w = parse_window("100:5000");
  EXPECT_EQ(w.n_min, 100);
  EXPECT_EQ(w.n_max, 5000);
  const Prediction p = parse_prediction("slowcorr:2:1");
  EXPECT_EQ(p.regime, Prediction::Regime::SlowCorrection);
  EXPECT_EQ(p.k, 2);
  EXPECT_EQ(parse_prediction("ell:logpow:1").regime, Prediction::Regime::Stretched);
  EXPECT_DOUBLE_EQ(parse_prediction("polynomial:-0.5").exponent, -0.5);
  EXPECT_THROW(parse_prediction("linear:1"), ParseError);
}

TEST(Descriptors, Normalize) {
  EXPECT_EQ(normalize_measure(" lazify( genpow(logpow:1.0, 100) ) "), "lazify(genpow(logpow:1,100))");
  EXPECT_EQ(normalize_measure("subord(alpha:0.50,base=lazy,20,10)"), "subord(alpha:0.5,base=lazy,20,10)");
  EXPECT_EQ(normalize_measure("subord(direct(logpow:1),base=lazy,20,10,complete)"),
            "subord(direct(logpow:1),base=lazy,20,10,complete)");
  EXPECT_THROW(normalize_measure("genpow(logpow:1)"), ParseError);
  EXPECT_THROW(normalize_measure("lazify(lazy"), ParseError);
  EXPECT_THROW(normalize_measure("gauss(1)"), ParseError);
}

TEST(Descriptors, MeasureMatchesNormalizedText) {
  const Group z = Group::lattice(1);
  for (const char* d : {"lazy", "stable(0.5,10)", "radialD(iterlog:2:1,50)", "lazify(genpow(logpow:1,100))"}) {
    EXPECT_EQ(parse_measure(z, d).descriptor(), normalize_measure(d)) << d;
  }
}

TEST(Cache, StoreLoadAndClear) {
  const SeriesCache cache(scratch("cache"));
  ReturnSeries s;
  s.engine = "direct";
  s.measure = "lazy";
  s.entries = {{1, std::log(0.5), std::log(0.5), 0.0}, {2, std::log(0.375), std::log(0.375), 0.0}};
  EXPECT_FALSE(cache.load("key").has_value());
  cache.store("key", s);
  const auto back = cache.load("key");
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->entries[1].log_p_lower, s.entries[1].log_p_lower);
  EXPECT_EQ(SeriesCache::hash("key").size(), 64u);
  EXPECT_NE(SeriesCache::hash("key"), SeriesCache::hash("key2"));
  EXPECT_EQ(cache.clear(), 2u);
  EXPECT_FALSE(cache.load("key").has_value());
}

TEST(Run, StretchedExperimentPassesAndCaches) {
  const fs::path dir = scratch("run");
  auto c = ExperimentConfig::parse(kStretchedConfig);
  c.output = (dir / "out").string();
  const SeriesCache cache(dir / "cache");
  const auto first = run_experiment(c, cache);
  ASSERT_TRUE(first.verdict.has_value());
  EXPECT_TRUE(first.verdict->pass);
  EXPECT_EQ(first.computed, 1u);
  EXPECT_EQ(first.cache_hits, 0u);
  EXPECT_FALSE(first.failed());
  const fs::path csv = dir / "out" / "stretched_fourier.csv";
  ASSERT_TRUE(fs::exists(csv));
  const std::string bytes = slurp(csv);
  const std::string verdict_bytes = slurp(dir / "out" / "stretched_verdict.csv");

  const auto second = run_experiment(c, cache);
  EXPECT_EQ(second.computed, 0u);
  EXPECT_EQ(second.cache_hits, 1u);
  EXPECT_EQ(second.verdict->exponent, first.verdict->exponent);
  EXPECT_EQ(slurp(csv), bytes);
  EXPECT_EQ(slurp(dir / "out" / "stretched_verdict.csv"), verdict_bytes);
}

TEST(Run, CachedSeriesEqualsFresh) {
  const fs::path dir = scratch("fresh");
  auto c = ExperimentConfig::parse("[experiment]\nname = z2\ngroup = zd:2\n[series]\nengine = both\nnmax = 24\ncap = 30\n");
  c.output = (dir / "out").string();
  const auto a = run_experiment(c, SeriesCache(dir / "c1"));
  const std::string fresh = slurp(dir / "out" / "z2_direct.csv");
  run_experiment(c, SeriesCache(dir / "c1"));
  EXPECT_EQ(slurp(dir / "out" / "z2_direct.csv"), fresh);
  ASSERT_TRUE(a.cross_engine_delta.has_value());
  EXPECT_LE(*a.cross_engine_delta, 1e-4);
}

TEST(Run, FiveDimensionalLatticeIsUnsupported) {
  auto c = ExperimentConfig::parse("[experiment]\nname = d5\ngroup = zd:5\n");
  c.output = scratch("d5").string();
  EXPECT_THROW(run_experiment(c, SeriesCache(scratch("d5cache"))), UnsupportedError);
}

TEST(Run, BatchMatchesSerial) {
  const fs::path dir = scratch("batch");
  std::vector<ExperimentConfig> cs;
  for (const char* m : {"lazy", "stable(1,50)", "genpow(logpow:1,50)"}) {
    auto c = ExperimentConfig::parse("[series]\nengine = direct\nnmax = 30\ncap = 80\n");
    c.measure = m;
    c.name = "b" + std::to_string(cs.size());
    c.output = (dir / "out").string();
    cs.push_back(c);
  }
  const auto batch = run_batch(cs, SeriesCache(dir / "cache"));
  ASSERT_EQ(batch.size(), cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    EXPECT_EQ(batch[i].name, cs[i].name);
    const std::string bytes = slurp(dir / "out" / (cs[i].name + "_direct.csv"));
    run_experiment(cs[i], SeriesCache(dir / "serial"));
    EXPECT_EQ(slurp(dir / "out" / (cs[i].name + "_direct.csv")), bytes);
  }
}

TEST(Run, PoincareSectionWritesReport) {
  const fs::path dir = scratch("poincare");
  auto c = ExperimentConfig::parse(
      "[experiment]\nname = pp\n[series]\nengine = direct\nnmax = 10\ncap = 12\n"
      "[poincare]\nmode = power\nphi = lazy\nsuite_radius = 8\nsuite_random = 4\n");
  c.output = (dir / "out").string();
  const auto s = run_experiment(c, SeriesCache(dir / "cache"));
  ASSERT_TRUE(s.poincare_violations.has_value());
  EXPECT_EQ(*s.poincare_violations, 0u);
  EXPECT_TRUE(fs::exists(dir / "out" / "pp_poincare.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "pp_poincare.ratio.txt"));
}

TEST(PlotData, ThreeEntriesGiveThreeLines) {
  const fs::path dir = scratch("plot3");
  ReturnSeries s;
  s.entries = {{2, -1.0, -1.0, 0}, {4, -1.5, -1.5, 0}, {6, -1.8, -1.8, 0}};
  const auto files = export_plotdata(s, dir / "s");
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(lines(files[0]).size(), 3u);
  EXPECT_EQ(lines(files[1]).size(), 3u);
}

TEST(PlotData, StretchedViewIsStraight) {
  const fs::path dir = scratch("plotline");
  ReturnSeries s;
  for (int i = 1; i <= 12; ++i) {
    const std::int64_t n = std::int64_t{1} << i;
    s.entries.push_back({n, -std::sqrt(static_cast<double>(n)), -std::sqrt(static_cast<double>(n)), 0});
  }
  const auto files = export_plotdata(s, dir / "s");
  std::vector<std::pair<double, double>> pts;
  for (const auto& l : lines(files[1])) {
    std::istringstream is(l);
    double x, y;
    is >> x >> y;
    pts.emplace_back(x, y);
  }
  for (std::size_t i = 1; i < pts.size(); ++i)
    EXPECT_NEAR((pts[i].second - pts[i - 1].second) / (pts[i].first - pts[i - 1].first), 0.5, 1e-12);
}

TEST(PlotData, ReportRatioColumns) {
  const fs::path dir = scratch("plotrep");
  const Group z = Group::lattice(1);
  const TestFunction fs_[] = {tent(z, 10)};
  const auto r = pseudo_poincare_report(z, PowerMode{0, 5}, lazy_uniform(z), fs_);
  const auto files = export_plotdata(r, dir / "r");
  const auto ls = lines(files.at(0));
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls[0].substr(0, 2), "1 ");
}

TEST(PlotData, EmptyInputIsAnError) {
  const fs::path dir = scratch("plotempty");
  EXPECT_THROW(export_plotdata(ReturnSeries{}, dir / "e"), DataError);
  EXPECT_THROW(export_plotdata(PoincareReport{}, dir / "e"), DataError);
}

TEST(VerdictCsv, NoVerdictIsNa) {
  FitResult f;
  f.model = FitModel::PowerLaw;
  f.exponent = -0.5;
  std::ostringstream os;
  write_verdict_csv(os, f);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "model,exponent,predicted,residual,pass");
  EXPECT_NE(os.str().find(",na"), std::string::npos);
}
