#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vct/composition.hpp"
#include "vct/error.hpp"
#include "vct/rng.hpp"

using namespace vct;
using vct::testing::make_grid;

namespace {

LabelMap tissue_like(const Grid& g, Label fill) { return LabelMap(g, VoxelGrid<Label>::Storage::Constant(
    static_cast<Eigen::Index>(g.voxel_count()), fill), LabelKind::kTissue, tissue_class_table()); }

Mask full_mask(const Grid& g) { return Mask(g, std::uint8_t{1}); }

}  // namespace

TEST(AirAdjust, ThresholdIsInclusive) {
  Volume v(make_grid(3, 1, 1));
  v[0] = -950.0f;
  v[1] = -900.0f;
  v[2] = 40.0f;
  const Volume a = adjust_air_hu(v);
  EXPECT_EQ(a[0], -1000.0f);
  EXPECT_EQ(a[1], -1000.0f);
  EXPECT_EQ(a[2], 40.0f);
}

TEST(AirAdjust, IsIdempotent) {
  SplitMix64 rng(5);
  Volume v(make_grid(20, 10, 5));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(std::round(rng.uniform(-1024, 1500)));
  const Volume once = adjust_air_hu(v);
  const Volume twice = adjust_air_hu(once);
  EXPECT_TRUE((once.data() == twice.data()).all());
}

TEST(AirAdjust, RejectsDensityVolumes) {
  const Volume v(make_grid(2, 2, 2), 1.0f, DType::kFloat32, Unit::kDensity);
  EXPECT_THROW(adjust_air_hu(v), InvalidArgument);
}

TEST(Density, HandValues) {
  EXPECT_DOUBLE_EQ(hu_to_density(-1000.0), 0.0);
  EXPECT_DOUBLE_EQ(hu_to_density(0.0), 1.0);
  EXPECT_DOUBLE_EQ(hu_to_density(500.0), 1.5);
  EXPECT_THROW(hu_to_density(0.0, -1000.0), InvalidArgument);
}

TEST(Density, ReferenceIsFixedPoint) {
  for (double rho : {-999.0, -500.0, -100.0, 0.0, 40.0, 1200.0}) EXPECT_DOUBLE_EQ(hu_to_density(rho, rho), 1.0);
}

TEST(Density, AffineInHu) {
  const double a = hu_to_density(-200.0, 30.0), b = hu_to_density(100.0, 30.0), c = hu_to_density(400.0, 30.0);
  EXPECT_NEAR(b - a, c - b, 1e-15);
}

TEST(RegionMass, OneLitreOfWaterWeighsOneKilogram) {
  const Grid g = make_grid(100, 100, 100);
  const Volume v(g, 0.0f);
  EXPECT_NEAR(region_mass_g(v, full_mask(g)), 1000.0, 1e-9);
}

TEST(RegionMass, EmptyMaskAndAirAreMassless) {
  const Grid g = make_grid(4, 4, 4);
  EXPECT_EQ(region_mass_g(Volume(g, 0.0f), Mask(g)), 0.0);
  EXPECT_EQ(region_mass_g(Volume(g, -1000.0f), full_mask(g)), 0.0);
}

TEST(RegionMass, GridMismatchIsRejected) {
  EXPECT_THROW(region_mass_g(Volume(make_grid(2, 2, 2)), Mask(make_grid(2, 2, 3))), InvalidArgument);
}

TEST(RegionMass, IsAdditiveOverDisjointMasks) {
  SplitMix64 rng(9);
  const Grid g = make_grid(16, 12, 10);
  Volume v(g);
  Mask a(g), b(g), u(g);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<float>(std::round(rng.uniform(-1024, 2000)));
    const auto r = rng.below(3);
    a[i] = r == 1;
    b[i] = r == 2;
    u[i] = r != 0;
  }
  const double whole = region_mass_g(v, u);
  EXPECT_NEAR(region_mass_g(v, a) + region_mass_g(v, b), whole, 1e-9 * whole);
}

TEST(RegionMass, ScalesWithCubeOfSpacing) {
  SplitMix64 rng(10);
  Grid g = make_grid(8, 8, 8);
  Volume v(g);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(std::round(rng.uniform(-800, 800)));
  const double m1 = region_mass_g(v, full_mask(g));
  g.spacing *= 2.0;
  const Volume v2(g, v.data(), DType::kInt16, Unit::kHU);
  EXPECT_DOUBLE_EQ(region_mass_g(v2, full_mask(g)), 8.0 * m1);
}

TEST(Composition, AllFatBodyIsHundredPercent) {
  const Grid g = make_grid(5, 5, 5);
  const Volume v(g, -100.0f);
  const CompositionReport r = measure_composition(v, tissue_like(g, tissue::kFat));
  EXPECT_NEAR(r.fat_pct, 100.0, 1e-12);
  EXPECT_EQ(r.muscle_pct, 0.0);
  EXPECT_FALSE(r.bone_density_hu.has_value());
  EXPECT_NEAR(r.body_volume_l, 125e-6, 1e-18);
}

TEST(Composition, BoneDensityUsesRawHu) {
  const Grid g = make_grid(4, 1, 1);
  Volume v(g, 0.0f);
  v[2] = 700.0f;
  v[3] = 900.0f;
  LabelMap t = tissue_like(g, tissue::kBody);
  t[2] = tissue::kBone;
  t[3] = tissue::kBone;
  const CompositionReport r = measure_composition(v, t);
  ASSERT_TRUE(r.bone_density_hu.has_value());
  EXPECT_DOUBLE_EQ(*r.bone_density_hu, 800.0);
}

TEST(Composition, EmptyBodyIsDegenerate) {
  const Grid g = make_grid(3, 3, 3);
  EXPECT_THROW(measure_composition(Volume(g), tissue_like(g, 0)), DegenerateInput);
}

TEST(Composition, PercentagesArePartition) {
  SplitMix64 rng(12);
  const Grid g = make_grid(12, 12, 12);
  Volume v(g);
  LabelMap t = tissue_like(g, 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    t[i] = static_cast<Label>(rng.below(5));
    v[i] = static_cast<float>(std::round(rng.uniform(-200, 1200)));
  }
  const CompositionReport r = measure_composition(v, t);
  EXPECT_GE(r.fat_pct, 0.0);
  EXPECT_GE(r.muscle_pct, 0.0);
  EXPECT_LE(r.fat_pct + r.muscle_pct, 100.0);
  double tissue_sum = 0.0;
  for (const auto& [name, g_mass] : r.per_tissue_mass_g) {
    EXPECT_LE(g_mass, r.body_mass_kg * 1000.0 * (1 + 1e-12)) << name;
    tissue_sum += g_mass;
  }
  EXPECT_NEAR(tissue_sum, r.body_mass_kg * 1000.0, 1e-9 * tissue_sum);
}

TEST(Calibration, IdentityAndExactLine) {
  const std::vector<double> x = {1, 2, 4, 7, 11};
  const LinearCalibration id = fit_linear_calibration(x, x);
  EXPECT_NEAR(id.slope, 1.0, 1e-12);
  EXPECT_NEAR(id.intercept, 0.0, 1e-12);
  EXPECT_NEAR(id.r2, 1.0, 1e-12);
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 5);
  const LinearCalibration c = fit_linear_calibration(x, y);
  EXPECT_NEAR(c.slope, 2.0, 1e-12);
  EXPECT_NEAR(c.intercept, 5.0, 1e-12);
  EXPECT_NEAR(c.r2, 1.0, 1e-12);
}

TEST(Calibration, ConstantReferenceHasZeroR2) {
  const std::vector<double> x = {1, 2, 3}, y = {4, 4, 4};
  const LinearCalibration c = fit_linear_calibration(x, y);
  EXPECT_EQ(c.r2, 0.0);
  EXPECT_NEAR(c.intercept, 4.0, 1e-12);
}

TEST(Calibration, Errors) {
  const std::vector<double> a = {1, 2, 3}, b = {1, 2}, k = {2, 2, 2};
  EXPECT_THROW(fit_linear_calibration(a, b), InvalidArgument);
  EXPECT_THROW(fit_linear_calibration(k, a), DegenerateInput);
}

TEST(Calibration, Apply) {
  EXPECT_DOUBLE_EQ(apply_calibration({1.0, 0.0, 1.0}, 3.5), 3.5);
  EXPECT_DOUBLE_EQ(apply_calibration({2.0, 5.0, 1.0}, 3.0), 11.0);
  EXPECT_THROW(apply_calibration({}, std::numeric_limits<double>::quiet_NaN()), InvalidArgument);
}
