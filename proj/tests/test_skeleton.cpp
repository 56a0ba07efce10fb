#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vct/error.hpp"
#include "vct/phantom.hpp"
#include "vct/skeleton.hpp"

using namespace vct;
using vct::testing::make_grid;

namespace {

LabelMap structures(const Grid& g) { return LabelMap(g, LabelKind::kStructure, structure_class_table()); }

const Phantom& phantom4() {
  static const Phantom p = [] {
    PhantomSpec s;
    s.spacing_mm = {4, 4, 4};
    s.seed = 21;
    return generate_phantom(s);
  }();
  return p;
}

// Rotates a label map by 90 degrees about z: (x, y) -> (ny - 1 - y, x).
LabelMap rotate_z(const LabelMap& m) {
  const Grid& g = m.grid();
  Grid r = g;
  r.dims = {g.dims[1], g.dims[0], g.dims[2]};
  r.spacing = {g.spacing[1], g.spacing[0], g.spacing[2]};
  r.origin = {17.0, -40.0, g.origin[2] + 25.0};
  LabelMap out(r, m.kind(), m.class_table(), m.dtype());
  for (int z = 0; z < g.dims[2]; ++z) {
    for (int y = 0; y < g.dims[1]; ++y) {
      for (int x = 0; x < g.dims[0]; ++x) out(g.dims[1] - 1 - y, x, z) = m(x, y, z);
    }
  }
  return out;
}

LabelMap rescaled(const LabelMap& m, double s) {
  Grid g = m.grid();
  g.spacing *= s;
  g.origin *= s;
  return LabelMap(g, m.data(), m.kind(), m.class_table(), m.dtype());
}

double diag(const Grid& g) { return g.spacing.norm(); }

}  // namespace

TEST(Centroid, SingleVoxelAndPair) {
  LabelMap m = structures(make_grid(6, 6, 6));
  m(2, 3, 4) = structure::kC7;
  EXPECT_TRUE(mask_centroid(m, structure::kC7).isApprox(Eigen::Vector3d(2, 3, 4)));
  m(4, 1, 0) = structure::kC1;
  m(0, 5, 2) = structure::kC1;
  EXPECT_TRUE(mask_centroid(m, structure::kC1).isApprox(Eigen::Vector3d(2, 3, 1)));
  EXPECT_THROW(mask_centroid(m, structure::kC2), DegenerateInput);
}

TEST(PrincipalAxis, LineAndBox) {
  LabelMap line = structures(make_grid(3, 3, 50));
  for (int z = 0; z < 50; ++z) line(1, 1, z) = structure::kBone;
  EXPECT_TRUE(principal_axis(line, structure::kBone).isApprox(Eigen::Vector3d::UnitZ(), 1e-12));

  LabelMap box = structures(make_grid(12, 4, 4));
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 10; ++x) box(x, y, z) = structure::kBone;
  EXPECT_TRUE(principal_axis(box, structure::kBone).isApprox(Eigen::Vector3d::UnitX(), 1e-12));
}

TEST(PrincipalAxis, CubeAndTinySetsAreDegenerate) {
  LabelMap cube = structures(make_grid(4, 4, 4));
  for (std::size_t i = 0; i < cube.size(); ++i) cube[i] = structure::kBone;
  EXPECT_THROW(principal_axis(cube, structure::kBone), DegenerateInput);
  LabelMap two = structures(make_grid(4, 4, 4));
  two(0, 0, 0) = two(1, 0, 0) = structure::kBone;
  EXPECT_THROW(principal_axis(two, structure::kBone), DegenerateInput);
}

TEST(PrincipalAxis, SignRuleIsBitwiseStable) {
  LabelMap m = structures(make_grid(20, 20, 20));
  for (int k = 0; k < 15; ++k) m(2 + k, 3 + k / 2, 18 - k) = structure::kBone;
  const Eigen::Vector3d a = principal_axis(m, structure::kBone);
  const Eigen::Vector3d b = principal_axis(m, structure::kBone);
  EXPECT_EQ(a, b);
  EXPECT_GT(a[2], 0.0);
}

TEST(Basis, PhantomIsUprightAndOrthonormal) {
  const Phantom& p = phantom4();
  const Basis b = estimate_ras_basis(p.tissue, p.structures);
  EXPECT_NEAR(b.superior.dot(Eigen::Vector3d::UnitZ()), 1.0, 1e-3);
  EXPECT_NEAR(std::abs(b.left_right[0]), 1.0, 1e-3);
  Eigen::Matrix3d m;
  m << b.superior, b.left_right, b.anterior;
  EXPECT_TRUE((m.transpose() * m).isApprox(Eigen::Matrix3d::Identity(), 1e-12));
  EXPECT_NEAR((-b.left_right).cross(b.anterior).dot(b.superior), 1.0, 1e-12);
}

TEST(Basis, NeedsASymmetricPair) {
  LabelMap s = phantom4().structures;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Label v = s[i];
    if (v == structure::kHipRight || v == structure::kClavicleLeft || v == structure::kClavicleRight ||
        v == structure::kScapulaLeft || v == structure::kScapulaRight) {
      s[i] = 0;
    }
  }
  EXPECT_THROW(estimate_ras_basis(phantom4().tissue, s), DegenerateInput);
}

TEST(PelvisPlane, MatchesConstructionAndTranslates) {
  const Phantom& p = phantom4();
  const Basis b = estimate_ras_basis(p.tissue, p.structures);
  const Plane plane = pelvis_plane(p.structures, b);
  EXPECT_NEAR(plane.offset, p.truth.landmarks.at("pelvis")[2], 0.5 * p.structures.grid().spacing[2] + 1e-9);

  Grid g = p.structures.grid();
  const Eigen::Vector3d t(3.0, -8.0, 12.0);
  g.origin += t;
  const LabelMap moved(g, p.structures.data(), LabelKind::kStructure, structure_class_table());
  EXPECT_NEAR(pelvis_plane(moved, b).offset - plane.offset, t.dot(b.superior), 1e-9);

  EXPECT_THROW(pelvis_plane(structures(make_grid(3, 3, 3)), b), InvalidArgument);
}

TEST(LegLength, SymmetricPhantomLegsAgree) {
  const Phantom& p = phantom4();
  const Basis b = estimate_ras_basis(p.tissue, p.structures);
  const double l = leg_length_mm(Side::kLeft, p.structures, p.tissue, b);
  const double r = leg_length_mm(Side::kRight, p.structures, p.tissue, b);
  EXPECT_NEAR(l, r, 1e-6 * l);
  EXPECT_NEAR(l, p.truth.height.lower_body_mm, 2 * p.structures.grid().spacing.maxCoeff());
}

TEST(LegLength, BentKneeRecoversAnatomicalLength) {
  PhantomSpec s;
  s.spacing_mm = {4, 4, 4};
  s.seed = 21;
  s.knee_flexion_deg = 30.0;
  const Phantom bent = generate_phantom(s);
  const HeightBreakdown h = measure_height(bent.tissue, bent.structures);
  const double straight = phantom4().truth.height.lower_body_mm;
  EXPECT_NEAR(h.lower_body_mm, straight, 2 * diag(bent.structures.grid()));
  const Grid& g = bent.tissue.grid();
  double lowest = 1e300;
  for (std::size_t i = 0; i < bent.tissue.size(); ++i) {
    if (bent.tissue[i] != 0) lowest = std::min(lowest, g.world(g.coords(i))[2]);
  }
  const double vertical = bent.truth.landmarks.at("pelvis")[2] - lowest;
  EXPECT_GT(straight - vertical, 2 * diag(g));
}

TEST(Height, PhantomTotalWithinTolerance) {
  const Phantom& p = phantom4();
  const HeightBreakdown h = measure_height(p.tissue, p.structures);
  EXPECT_NEAR(h.total_mm, 1700.0, 2 * diag(p.structures.grid()));
  EXPECT_DOUBLE_EQ(h.total_mm, h.lower_body_mm + h.torso_mm + h.neck_mm + h.head_mm);
  ASSERT_TRUE(h.left_mm && h.right_mm);
  EXPECT_DOUBLE_EQ(h.lower_body_mm, std::max(*h.left_mm, *h.right_mm));
  for (double v : {h.lower_body_mm, h.torso_mm, h.neck_mm, h.head_mm}) EXPECT_GE(v, 0.0);
}

TEST(Height, MissingLandmarkIsNamed) {
  LabelMap s = phantom4().structures;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == structure::kC2) s[i] = 0;
  }
  try {
    measure_height(phantom4().tissue, s);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("C2"), std::string::npos) << e.what();
  }
}

TEST(Height, RigidMotionLeavesLengthsUnchanged) {
  const Phantom& p = phantom4();
  const HeightBreakdown h = measure_height(p.tissue, p.structures);
  const HeightBreakdown r = measure_height(rotate_z(p.tissue), rotate_z(p.structures));
  const double tol = 2 * diag(p.structures.grid());
  EXPECT_NEAR(r.total_mm, h.total_mm, tol);
  EXPECT_NEAR(r.lower_body_mm, h.lower_body_mm, tol);
  EXPECT_NEAR(r.torso_mm, h.torso_mm, tol);
  EXPECT_NEAR(r.neck_mm, h.neck_mm, tol);
  EXPECT_NEAR(r.head_mm, h.head_mm, tol);
}

TEST(Height, ScalesWithSpacing) {
  const Phantom& p = phantom4();
  const HeightBreakdown h = measure_height(p.tissue, p.structures);
  const HeightBreakdown s = measure_height(rescaled(p.tissue, 1.1), rescaled(p.structures, 1.1));
  EXPECT_NEAR(s.total_mm, 1.1 * h.total_mm, 1e-6 * h.total_mm);
}
