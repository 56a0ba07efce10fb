#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vct/error.hpp"
#include "vct/resample.hpp"
#include "vct/rng.hpp"
#include "vct/volume.hpp"
#include "vct/volume_io.hpp"

using namespace vct;
using vct::testing::make_grid;
using vct::testing::TempDir;

namespace {

Volume ramp(const Grid& g) {
  Volume v(g);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(static_cast<int>(i % 200) - 100);
  return v;
}

void write_ctv_header(const std::filesystem::path& header, const std::string& dims, const std::string& dtype,
                      const std::string& kind, const std::string& unit, const std::string& extra = "") {
  std::ofstream out(header);
  out << R"({"dims":)" << dims << R"(,"spacing_mm":[1,1,1],"origin_mm":[0,0,0],"orientation":"RAS","dtype":")"
      << dtype << R"(","byte_order":"little","kind":")" << kind << R"(","unit":")" << unit << '"' << extra
      << R"(,"data_file":")" << raw_name_for(header) << R"("})";
}

template <typename T>
void write_raw(const std::filesystem::path& path, const std::vector<T>& values) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(T)));
}

// Minimal single-file NIfTI-1 writer for int16 payloads.
void write_nifti(const std::filesystem::path& path, int nx, int ny, int nz, const float srow[3][4],
                 const std::vector<std::int16_t>& data) {
  std::vector<char> h(352, 0);
  auto put = [&](std::size_t off, auto v) { std::memcpy(h.data() + off, &v, sizeof v); };
  put(0, std::int32_t{348});
  const std::int16_t dim[8] = {3, static_cast<std::int16_t>(nx), static_cast<std::int16_t>(ny),
                               static_cast<std::int16_t>(nz), 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) put(40 + 2 * i, dim[i]);
  put(70, std::int16_t{4});
  put(72, std::int16_t{16});
  const float pixdim[8] = {1, std::fabs(srow[0][0]), std::fabs(srow[1][1]), std::fabs(srow[2][2]), 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) put(76 + 4 * i, pixdim[i]);
  put(108, 352.0f);
  put(252, std::int16_t{0});
  put(254, std::int16_t{1});
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) put(280 + 16 * r + 4 * c, srow[r][c]);
  }
  std::memcpy(h.data() + 344, "n+1\0", 4);
  std::ofstream out(path, std::ios::binary);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * 2));
}

}  // namespace

TEST(Grid, IndexAndCoordsAreInverse) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Grid g = make_grid(1 + static_cast<int>(rng.below(9)), 1 + static_cast<int>(rng.below(9)),
                             1 + static_cast<int>(rng.below(9)));
    for (std::size_t i = 0; i < g.voxel_count(); ++i) {
      const Eigen::Vector3i c = g.coords(i);
      ASSERT_TRUE(g.contains(c));
      ASSERT_EQ(g.index(c), i);
    }
  }
}

TEST(Grid, XIsFastestAxis) {
  const Grid g = make_grid(4, 3, 2);
  EXPECT_EQ(g.index(1, 0, 0), 1u);
  EXPECT_EQ(g.index(0, 1, 0), 4u);
  EXPECT_EQ(g.index(0, 0, 1), 12u);
}

TEST(Grid, VoxelVolume) {
  Grid g;
  g.spacing = {1.0, 1.0, 3.0};
  EXPECT_DOUBLE_EQ(voxel_volume_mm3(g), 3.0);
  g.spacing = {1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(voxel_volume_mm3(g), 1.0);
  g.spacing = {0.5, 0.5, 2.0};
  EXPECT_DOUBLE_EQ(voxel_volume_mm3(g), 0.5);
}

TEST(Grid, RejectsNonpositiveSpacing) {
  Grid g;
  g.spacing = {1.0, 0.0, 1.0};
  EXPECT_THROW(g.validate(), InvalidArgument);
  EXPECT_THROW(Volume{g}, InvalidArgument);
}

TEST(VolumeIo, ZeroInt16CubeLoads) {
  TempDir dir("vol");
  const auto header = dir / "zeros.ctv.json";
  write_ctv_header(header, "[2,2,2]", "int16", "image", "HU");
  write_raw(dir / "zeros.raw", std::vector<std::int16_t>(8, 0));
  const Volume v = load_volume(header);
  ASSERT_EQ(v.size(), 8u);
  EXPECT_TRUE((v.data() == 0.0f).all());
}

TEST(VolumeIo, LengthMismatchIsFormatError) {
  TempDir dir("vol");
  const auto header = dir / "short.ctv.json";
  write_ctv_header(header, "[3,3,3]", "int16", "image", "HU");
  write_raw(dir / "short.raw", std::vector<std::int16_t>(26, 0));
  EXPECT_THROW(load_volume(header), FormatError);
}

TEST(VolumeIo, MissingFileIsIoError) {
  TempDir dir("vol");
  EXPECT_THROW(load_volume(dir / "absent.ctv.json"), IoError);
}

TEST(VolumeIo, RoundTripInt16) {
  TempDir dir("vol");
  Grid g = make_grid(5, 4, 3, 1.5);
  g.origin = {-3.0, 2.0, 7.5};
  const Volume v = ramp(g);
  save_volume(v, dir / "ramp.ctv.json");
  const Volume r = load_volume(dir / "ramp.ctv.json");
  EXPECT_EQ(r.grid(), v.grid());
  EXPECT_EQ(r.dtype(), DType::kInt16);
  EXPECT_TRUE((r.data() == v.data()).all());
}

TEST(VolumeIo, RoundTripFloatDensityKeepsDtype) {
  TempDir dir("vol");
  Volume v(make_grid(3, 3, 3), 0.0f, DType::kFloat32, Unit::kDensity);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.9f + 0.01f * static_cast<float>(i);
  save_volume(v, dir / "rho.ctv.json");
  const Volume r = load_volume(dir / "rho.ctv.json");
  EXPECT_EQ(r.dtype(), DType::kFloat32);
  EXPECT_EQ(r.unit(), Unit::kDensity);
  EXPECT_TRUE((r.data() == v.data()).all());
}

TEST(VolumeIo, HuIsClampedOnLoad) {
  TempDir dir("vol");
  const auto header = dir / "hot.ctv.json";
  write_ctv_header(header, "[2,1,1]", "float32", "image", "HU");
  write_raw(dir / "hot.raw", std::vector<float>{5000.0f, -3000.0f});
  const Volume v = load_volume(header);
  EXPECT_EQ(v[0], kHuMax);
  EXPECT_EQ(v[1], kHuMin);
}

TEST(VolumeIo, SaveToUnwritablePathIsIoError) {
  TempDir dir("vol");
  { std::ofstream(dir / "file") << "x"; }
  const Volume v(make_grid(2, 2, 2));
  EXPECT_THROW(save_volume(v, dir.path() / "file" / "sub" / "v.ctv.json"), IoError);
}

TEST(LabelIo, ZeroMapKeepsKind) {
  TempDir dir("lab");
  const LabelMap m(make_grid(2, 2, 2), LabelKind::kStructure, structure_class_table());
  save_labelmap(m, dir / "s.ctv.json");
  const LabelMap r = load_labelmap(dir / "s.ctv.json");
  EXPECT_EQ(r.kind(), LabelKind::kStructure);
  EXPECT_EQ(r.class_table(), structure_class_table());
  EXPECT_TRUE((r.data() == 0).all());
}

TEST(LabelIo, UnknownIdIsFormatError) {
  TempDir dir("lab");
  const auto header = dir / "bad.ctv.json";
  write_ctv_header(header, "[2,1,1]", "uint8", "tissue", "label", R"(,"class_table":{"1":"body"})");
  write_raw(dir / "bad.raw", std::vector<std::uint8_t>{1, 99});
  EXPECT_THROW(load_labelmap(header), FormatError);
}

TEST(LabelIo, RoundTripUInt16) {
  TempDir dir("lab");
  LabelMap m(make_grid(4, 3, 2), LabelKind::kStructure, structure_class_table(), DType::kUInt16);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<Label>(i % 17);
  save_labelmap(m, dir / "m.ctv.json");
  const LabelMap r = load_labelmap(dir / "m.ctv.json");
  EXPECT_EQ(r.dtype(), DType::kUInt16);
  EXPECT_TRUE((r.data() == m.data()).all());
}

TEST(Nifti, IdentityAffineLoads) {
  TempDir dir("nii");
  const float srow[3][4] = {{2, 0, 0, -4}, {0, 2, 0, 1}, {0, 0, 3, 9}};
  std::vector<std::int16_t> data(3 * 2 * 2);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::int16_t>(10 * i);
  write_nifti(dir / "a.nii", 3, 2, 2, srow, data);
  const Volume v = load_volume(dir / "a.nii");
  EXPECT_EQ(v.grid().dims, Eigen::Vector3i(3, 2, 2));
  EXPECT_EQ(v.grid().spacing, Eigen::Vector3d(2, 2, 3));
  EXPECT_EQ(v.grid().origin, Eigen::Vector3d(-4, 1, 9));
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(v[i], data[i]);
}

TEST(Nifti, FlippedAxisIsReorientedToRas) {
  TempDir dir("nii");
  const float srow[3][4] = {{-2, 0, 0, 10}, {0, 1, 0, 0}, {0, 0, 1, 0}};
  const std::vector<std::int16_t> data = {1, 2, 3};
  write_nifti(dir / "lps.nii", 3, 1, 1, srow, data);
  const Volume v = load_volume(dir / "lps.nii");
  EXPECT_EQ(v.grid().spacing[0], 2.0);
  EXPECT_EQ(v.grid().origin[0], 6.0);
  EXPECT_EQ(v[0], 3.0f);
  EXPECT_EQ(v[2], 1.0f);
}

TEST(Nifti, ObliqueAffineIsRejected) {
  TempDir dir("nii");
  const float srow[3][4] = {{0.7f, 0.7f, 0, 0}, {-0.7f, 0.7f, 0, 0}, {0, 0, 1, 0}};
  write_nifti(dir / "obl.nii", 2, 2, 1, srow, std::vector<std::int16_t>(4, 0));
  EXPECT_THROW(load_volume(dir / "obl.nii"), FormatError);
}

TEST(Nifti, LabelKindHintSelectsTable) {
  TempDir dir("nii");
  const float srow[3][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}};
  write_nifti(dir / "t.nii", 2, 1, 1, srow, {0, 4});
  const LabelMap m = load_labelmap(dir / "t.nii", LabelKind::kTissue);
  EXPECT_EQ(m.kind(), LabelKind::kTissue);
  EXPECT_EQ(m[1], tissue::kBone);
}

TEST(Resample, OwnSpacingIsIdentity) {
  const Volume v = ramp(make_grid(4, 3, 5, 1.5));
  const Volume r = resample(v, v.grid().spacing);
  EXPECT_EQ(r.grid(), v.grid());
  EXPECT_TRUE((r.data() == v.data()).all());
}

TEST(Resample, TwoCubeUnchangedAtSameSpacing) {
  Volume v(make_grid(2, 2, 2));
  for (std::size_t i = 0; i < 8; ++i) v[i] = static_cast<float>(i);
  const Volume r = resample(v, Eigen::Vector3d::Ones(), Interp::kTrilinear);
  EXPECT_TRUE((r.data() == v.data()).all());
}

TEST(Resample, ConstantFieldStaysConstant) {
  const Volume v(make_grid(9, 7, 5), 100.0f);
  for (Interp mode : {Interp::kTrilinear, Interp::kNearest}) {
    const Volume r = resample(v, Eigen::Vector3d(2, 2, 2), mode);
    EXPECT_TRUE((r.data() == 100.0f).all());
  }
}

TEST(Resample, DimsAreCeiled) {
  const Grid g = resampled_grid(make_grid(9, 7, 5), Eigen::Vector3d(2, 2, 2));
  EXPECT_EQ(g.dims, Eigen::Vector3i(5, 4, 3));
}

TEST(Resample, LabelsRejectTrilinear) {
  const LabelMap m(make_grid(2, 2, 2), LabelKind::kTissue, tissue_class_table());
  EXPECT_THROW(resample(m, Eigen::Vector3d(2, 2, 2), Interp::kTrilinear), InvalidArgument);
}

TEST(Resample, NonpositiveTargetSpacingIsRejected) {
  const Volume v(make_grid(2, 2, 2));
  EXPECT_THROW(resample(v, Eigen::Vector3d(0, 1, 1)), InvalidArgument);
}

TEST(Resample, NearestNeverInventsLabels) {
  SplitMix64 rng(11);
  LabelMap m(make_grid(11, 9, 7), LabelKind::kTissue, tissue_class_table());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<Label>(rng.below(2) * 3);
  for (double s : {0.7, 1.3, 2.0, 3.1}) {
    const LabelMap r = resample(m, Eigen::Vector3d::Constant(s));
    for (std::size_t i = 0; i < r.size(); ++i) ASSERT_TRUE(r[i] == 0 || r[i] == 3);
  }
}
