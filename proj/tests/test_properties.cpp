#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vct/cohort.hpp"
#include "vct/patch.hpp"
#include "vct/phantom.hpp"
#include "vct/skeleton.hpp"
#include "vct/stats.hpp"
#include "vct/trial.hpp"

using namespace vct;
using vct::testing::make_grid;

TEST(Property, WindowLossIsZeroExactlyOnAgreement) {
  SplitMix64 rng(101);
  for (int t = 0; t < 50; ++t) {
    const Grid g = make_grid(1 + static_cast<int>(rng.below(6)), 1 + static_cast<int>(rng.below(6)), 2);
    Volume x(g, 0.0f, DType::kFloat32, Unit::kHU);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(rng.uniform(-1000, 3000));
    EXPECT_EQ(multi_window_l1(x, x), 0.0);
    Volume y = x;
    const std::size_t k = static_cast<std::size_t>(rng.below(y.size()));
    y[k] += static_cast<float>(rng.uniform(0.5, 50));
    EXPECT_GT(multi_window_l1(x, y), 0.0);
    Volume z(g, 0.0f, DType::kFloat32, Unit::kHU);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = static_cast<float>(rng.uniform(-1000, 3000));
    EXPECT_GE(multi_window_l1(x, z), 0.0);
  }
}

TEST(Property, HeightIsSumOfSegments) {
  SplitMix64 rng(102);
  for (int t = 0; t < 5; ++t) {
    PhantomSpec s;
    s.spacing_mm = Eigen::Vector3d::Constant(4.0);
    s.height_mm = rng.uniform(1500, 1950);
    s.weight_kg = rng.uniform(55, 95);
    s.seed = rng.next();
    const Phantom p = generate_phantom(s);
    const HeightBreakdown h = measure_height(p.tissue, p.structures);
    EXPECT_EQ(h.total_mm, h.lower_body_mm + h.torso_mm + h.neck_mm + h.head_mm);
    const HeightBreakdown& truth = p.truth.height;
    EXPECT_EQ(truth.total_mm, truth.lower_body_mm + truth.torso_mm + truth.neck_mm + truth.head_mm);
  }
}

TEST(Property, TrialIntervalsContainPointEstimates) {
  SplitMix64 rng(103);
  std::vector<SubjectRecord> cohort;
  for (int i = 0; i < 240; ++i) {
    SubjectRecord s;
    s.id = subject_id("P", static_cast<std::size_t>(i));
    s.attributes = sample_attributes({}, rng);
    const auto [fat, muscle] = sample_composition(s.attributes, rng);
    s.report.body_volume_l = *s.attributes.weight_kg * (0.98 + 0.1 * fat);
    s.report.fat_pct = 100.0 * fat;
    s.report.muscle_pct = 100.0 * muscle;
    s.report.bone_density_hu = 900.0;
    cohort.push_back(s);
  }
  TrialConfig cfg;
  cfg.counts = {60, 20, 20};
  cfg.oversample_factor = 1;
  cfg.bootstrap.n_boot = 1000;
  cfg.seed = 4;
  const TrialReport r = run_trial(cohort, cfg);
  for (const TrialRow& row : r.rows) {
    if (row.mae && row.mae_ci) EXPECT_TRUE(row.mae_ci->contains(*row.mae)) << row.population << row.sample_type;
    if (row.z_vs_real && row.z_ci) EXPECT_TRUE(row.z_ci->contains(*row.z_vs_real)) << row.population << row.sample_type;
    if (row.sample_type == "real") {
      EXPECT_EQ(*row.z_vs_real, 0.0);
      EXPECT_EQ(*row.p_value, 1.0);
    }
  }
}

TEST(Property, ZScoreIsScaleInvariant) {
  SplitMix64 rng(104);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(10 + rng.below(10)), y(10 + rng.below(10));
    for (double& v : x) v = rng.normal(1, 2);
    for (double& v : y) v = rng.normal(0, 1);
    const double z = z_score(x, y);
    const double c = rng.uniform(0.1, 10);
    for (double& v : x) v *= c;
    for (double& v : y) v *= c;
    EXPECT_NEAR(z_score(x, y), z, 1e-9);
  }
}

TEST(Property, ImportanceWeightsAreOddsRatios) {
  SplitMix64 rng(105);
  for (int t = 0; t < 100; ++t) {
    const double p = rng.uniform(0.01, 0.99);
    const double prior = rng.uniform(0.1, 0.9);
    const std::vector<double> probs = {p};
    EXPECT_NEAR(importance_weights(probs, prior, 1 - prior)[0], p / (1 - p) * prior / (1 - prior), 1e-12);
  }
}
