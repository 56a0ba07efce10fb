#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "vct/error.hpp"

namespace vct {

using Label = std::uint16_t;

/// Regular voxel lattice in a fixed RAS frame: axis 0 increases toward the
/// patient's Right, axis 1 toward Anterior, axis 2 toward Superior.
/// Voxel (x, y, z) sits at origin + (x, y, z) * spacing (elementwise) and is
/// stored at linear index x + dims[0] * (y + dims[1] * z).
struct Grid {
  Eigen::Vector3i dims{1, 1, 1};
  Eigen::Vector3d spacing{1.0, 1.0, 1.0};
  Eigen::Vector3d origin{0.0, 0.0, 0.0};

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
  }
  std::size_t index(const Eigen::Vector3i& v) const { return index(v[0], v[1], v[2]); }

  Eigen::Vector3i coords(std::size_t i) const {
    const auto nx = static_cast<std::size_t>(dims[0]);
    const auto ny = static_cast<std::size_t>(dims[1]);
    return {static_cast<int>(i % nx), static_cast<int>((i / nx) % ny), static_cast<int>(i / (nx * ny))};
  }

  bool contains(const Eigen::Vector3i& v) const {
    return (v.array() >= 0).all() && (v.array() < dims.array()).all();
  }

  Eigen::Vector3d world(const Eigen::Vector3i& v) const {
    return origin + v.cast<double>().cwiseProduct(spacing);
  }
  Eigen::Vector3d world(int x, int y, int z) const { return world(Eigen::Vector3i(x, y, z)); }

  /// Nearest voxel to a world position (may be out of bounds).
  Eigen::Vector3i nearest(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d c = (p - origin).cwiseQuotient(spacing);
    return {static_cast<int>(std::floor(c[0] + 0.5)), static_cast<int>(std::floor(c[1] + 0.5)),
            static_cast<int>(std::floor(c[2] + 0.5))};
  }

  /// Throws InvalidArgument unless dims >= 1 and spacing > 0 on every axis.
  void validate() const;

  bool operator==(const Grid& o) const {
    return dims == o.dims && spacing == o.spacing && origin == o.origin;
  }
};

/// Product of the spacing components.
double voxel_volume_mm3(const Grid& grid);

/// Dense scalar field on a Grid.
template <typename Scalar>
class VoxelGrid {
 public:
  using scalar_type = Scalar;
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  VoxelGrid() = default;

  explicit VoxelGrid(const Grid& grid, Scalar fill = Scalar{0}) : grid_(grid) {
    grid_.validate();
    data_ = Storage::Constant(static_cast<Eigen::Index>(grid_.voxel_count()), fill);
  }

  VoxelGrid(const Grid& grid, Storage data) : grid_(grid), data_(std::move(data)) {
    grid_.validate();
    if (static_cast<std::size_t>(data_.size()) != grid_.voxel_count()) {
      throw InvalidArgument("voxel data length " + std::to_string(data_.size()) + " does not match grid of " +
                            std::to_string(grid_.voxel_count()) + " voxels");
    }
  }

  const Grid& grid() const { return grid_; }
  const Storage& data() const { return data_; }
  Storage& data() { return data_; }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }

  Scalar operator[](std::size_t i) const { return data_[static_cast<Eigen::Index>(i)]; }
  Scalar& operator[](std::size_t i) { return data_[static_cast<Eigen::Index>(i)]; }
  Scalar operator()(int x, int y, int z) const { return (*this)[grid_.index(x, y, z)]; }
  Scalar& operator()(int x, int y, int z) { return (*this)[grid_.index(x, y, z)]; }
  Scalar at(const Eigen::Vector3i& v) const { return (*this)[grid_.index(v)]; }

 protected:
  Grid grid_;
  Storage data_;
};

using Mask = VoxelGrid<std::uint8_t>;

enum class DType { kInt16, kUInt8, kUInt16, kFloat32 };
enum class Unit { kHU, kDensity, kLabel };

std::string to_string(DType t);
std::string to_string(Unit u);
DType parse_dtype(const std::string& s);
Unit parse_unit(const std::string& s);

/// CT image X: HU (or density) values with a declared storage type.
/// Values are held as float; int16 storage is exact for every HU value.
class Volume : public VoxelGrid<float> {
 public:
  Volume() = default;
  explicit Volume(const Grid& grid, float fill = 0.0f, DType dtype = DType::kInt16, Unit unit = Unit::kHU)
      : VoxelGrid<float>(grid, fill), dtype_(dtype), unit_(unit) {}
  Volume(const Grid& grid, Storage data, DType dtype, Unit unit)
      : VoxelGrid<float>(grid, std::move(data)), dtype_(dtype), unit_(unit) {}

  DType dtype() const { return dtype_; }
  Unit unit() const { return unit_; }

 private:
  DType dtype_ = DType::kInt16;
  Unit unit_ = Unit::kHU;
};

enum class LabelKind { kTissue, kStructure };

std::string to_string(LabelKind k);
LabelKind parse_label_kind(const std::string& s);

using ClassTable = std::map<int, std::string>;

/// Segmentation Y sharing a Volume's grid. 0 is background.
class LabelMap : public VoxelGrid<Label> {
 public:
  LabelMap() = default;
  LabelMap(const Grid& grid, LabelKind kind, ClassTable table, DType dtype = DType::kUInt8);
  LabelMap(const Grid& grid, Storage data, LabelKind kind, ClassTable table, DType dtype = DType::kUInt8);

  LabelKind kind() const { return kind_; }
  const ClassTable& class_table() const { return table_; }
  DType dtype() const { return dtype_; }

  /// Throws FormatError if a voxel id is neither 0 nor present in the class table.
  void validate_ids() const;

 private:
  LabelKind kind_ = LabelKind::kTissue;
  ClassTable table_;
  DType dtype_ = DType::kUInt8;
};

namespace tissue {
inline constexpr Label kBackground = 0;
inline constexpr Label kBody = 1;
inline constexpr Label kFat = 2;
inline constexpr Label kMuscle = 3;
inline constexpr Label kBone = 4;
}  // namespace tissue

namespace structure {
// Merged organ classes, in the row order of the anatomical-consistency table.
inline constexpr Label kBone = 1;
inline constexpr Label kSpleen = 2;
inline constexpr Label kKidney = 3;
inline constexpr Label kLiver = 4;
inline constexpr Label kLungUpperLobes = 5;
inline constexpr Label kLungLowerLobes = 6;
inline constexpr Label kLungMiddleLobe = 7;
inline constexpr Label kUrinaryBladder = 8;
inline constexpr Label kProstate = 9;
inline constexpr Label kHeart = 10;
inline constexpr Label kAorta = 11;
inline constexpr Label kGluteusMuscles = 12;
inline constexpr Label kAutochthonousMuscles = 13;
inline constexpr Label kIliopsoas = 14;
inline constexpr Label kBrain = 15;
inline constexpr Label kAppendicularBones = 16;
inline constexpr int kOrganCount = 16;

// Landmarks used by the height pipeline.
inline constexpr Label kC1 = 20;
inline constexpr Label kC2 = 21;
inline constexpr Label kC7 = 22;
inline constexpr Label kFemurLeft = 23;
inline constexpr Label kFemurRight = 24;
inline constexpr Label kTibiaLeft = 25;
inline constexpr Label kTibiaRight = 26;
inline constexpr Label kHipLeft = 27;
inline constexpr Label kHipRight = 28;
inline constexpr Label kClavicleLeft = 29;
inline constexpr Label kClavicleRight = 30;
inline constexpr Label kScapulaLeft = 31;
inline constexpr Label kScapulaRight = 32;
}  // namespace structure

const ClassTable& tissue_class_table();
const ClassTable& structure_class_table();
const ClassTable& default_class_table(LabelKind kind);

/// Binary mask of voxels carrying `id`.
Mask mask_of(const LabelMap& map, Label id);

/// Binary mask of every nonzero voxel.
Mask foreground_of(const LabelMap& map);

}  // namespace vct
