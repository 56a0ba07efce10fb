#include <filesystem>

#include <gtest/gtest.h>

#include "cli_fixture.hpp"
#include "test_util.hpp"
#include "vct/volume_io.hpp"

using namespace vct;
using namespace vct::testing;
namespace fs = std::filesystem;

TEST(Cli, HelpAndUnknownCommand) {
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"phantom", "gen", "--n", "1"}).code, kExitUsage);
}

TEST(Cli, PhantomGenRejectsEmptyCohort) {
  TempDir dir("cli_zero");
  const CliResult r = run({"phantom", "gen", "--n", "0", "--seed", "1", "--out", dir.path().string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Cli, PhantomGenSingleSubject) {
  TempDir dir("cli_one");
  const CliResult r = run({"phantom", "gen", "--n", "1", "--seed", "4", "--out", dir.path().string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto files = snapshot(dir.path());
  EXPECT_EQ(files.size(), 7u);
  const CohortManifest m = read_manifest(dir / "manifest.json");
  ASSERT_EQ(m.subjects.size(), 1u);
  EXPECT_NO_THROW(load_volume(dir / m.subjects[0].image));
  EXPECT_EQ(m.seed, 4u);
}

TEST(Cli, PhantomGenIsReproducibleAcrossThreads) {
  TempDir a("cli_a"), b("cli_b");
  ASSERT_EQ(run({"phantom", "gen", "--n", "3", "--seed", "8", "--out", a.path().string(), "--threads", "1"}).code, 0);
  ASSERT_EQ(run({"phantom", "gen", "--n", "3", "--seed", "8", "--out", b.path().string(), "--threads", "3"}).code, 0);
  EXPECT_EQ(snapshot(a.path()), snapshot(b.path()));
}

TEST(Cli, MeasureMatchesTruthAndReportsMissingFiles) {
  TempDir dir("cli_measure"), out("cli_measure_out");
  ASSERT_EQ(run({"phantom", "gen", "--n", "2", "--seed", "2", "--out", dir.path().string()}).code, 0);
  ASSERT_EQ(run({"measure", "--manifest", (dir / "manifest.json").string(), "--out", out.path().string()}).code, 0);
  const CohortManifest m = read_manifest(dir / "manifest.json");
  const auto rows = read_cohort_csv(out / "cohort.csv");
  for (const Subject& s : m.subjects) EXPECT_NEAR(rows.at(s.id).fat_pct, s.truth.fat_pct, 0.5);

  fs::remove(dir / m.subjects[1].tissue);
  const CliResult r = run({"measure", "--manifest", (dir / "manifest.json").string(), "--out", out.path().string()});
  EXPECT_EQ(r.code, kExitPartial);
  EXPECT_NE(r.err.find(m.subjects[1].id), std::string::npos);
  EXPECT_EQ(read_cohort_csv(out / "cohort.csv").size(), 1u);
}

TEST(Cli, MeasureRejectsEmptyManifest) {
  TempDir dir("cli_empty");
  write_manifest(CohortManifest{}, dir / "manifest.json");
  EXPECT_EQ(run({"measure", "--manifest", (dir / "manifest.json").string(), "--out", dir.path().string()}).code,
            kExitUsage);
  EXPECT_EQ(run({"measure", "--manifest", (dir / "nope.json").string(), "--out", dir.path().string()}).code, kExitIo);
}

TEST(Cli, TrialRunWritesTablesAndRejectsBadConfig) {
  TempDir dir("cli_trial");
  write_trial_workspace(dir.path(), 260, 12);
  const fs::path out = dir / "out";
  const CliResult r = run({"trial", "run", "--config", (dir / "trial.json").string(), "--out", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("train pearson:"), std::string::npos);
  for (const char* f : {"report.json", "zscores.csv", "bias_correlation.csv", "feature_importance.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  json bad = read_json(dir / "trial.json");
  bad["oversample"] = 3;
  write_json(bad, dir / "bad.json");
  EXPECT_EQ(run({"trial", "run", "--config", (dir / "bad.json").string(), "--out", out.string()}).code, kExitUsage);
  write_text("{ not json", dir / "broken.json");
  EXPECT_EQ(run({"trial", "run", "--config", (dir / "broken.json").string(), "--out", out.string()}).code,
            kExitUsage);
}

TEST(Cli, ConsistencySelfComparisonIsPerfect) {
  TempDir dir("cli_cons");
  ASSERT_EQ(run({"phantom", "gen", "--n", "3", "--seed", "6", "--out", dir.path().string()}).code, 0);
  const std::string manifest = (dir / "manifest.json").string();
  const CliResult r = run({"consistency", "--a", manifest, "--b", manifest, "--out", (dir / "c").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string csv = slurp(dir / "c" / "consistency.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("class,dice_mean", 0), 0u);
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    EXPECT_EQ(std::stod(line.substr(first + 1, second - first - 1)), 1.0) << line;
    ++rows;
  }
  EXPECT_GT(rows, 10);
  EXPECT_EQ(run({"consistency", "--a", manifest, "--b", manifest, "--out", (dir / "c").string(), "--mode", "x"}).code,
            kExitUsage);
}

TEST(Cli, LossOfIdenticalVolumesIsZero) {
  TempDir dir("cli_loss");
  ASSERT_EQ(run({"phantom", "gen", "--n", "1", "--seed", "3", "--out", dir.path().string()}).code, 0);
  const std::string img = (dir / "S0000_image.ctv.json").string();
  const CliResult r = run({"loss", "--x", img, "--xhat", img});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(std::stod(r.out), 0.0);
}
