#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vct/volume.hpp"

namespace vct {

/// Exact integer moments of a voxel set, in index coordinates.
class VoxelMoments {
 public:
  void add(int x, int y, int z) {
    ++n_;
    s_[0] += x;
    s_[1] += y;
    s_[2] += z;
    ss_[0] += std::int64_t{x} * x;
    ss_[1] += std::int64_t{y} * y;
    ss_[2] += std::int64_t{z} * z;
    ss_[3] += std::int64_t{x} * y;
    ss_[4] += std::int64_t{x} * z;
    ss_[5] += std::int64_t{y} * z;
  }
  void merge(const VoxelMoments& o);

  std::int64_t count() const { return n_; }

  /// Mean world position. Throws DegenerateInput when empty.
  Eigen::Vector3d centroid(const Grid& grid) const;

  /// Population covariance of voxel world positions (mm^2).
  Eigen::Matrix3d covariance(const Grid& grid) const;

 private:
  std::int64_t n_ = 0;
  std::int64_t s_[3] = {0, 0, 0};
  std::int64_t ss_[6] = {0, 0, 0, 0, 0, 0};  // xx yy zz xy xz yz
};

/// Moments of every nonzero label in one pass over the map.
std::map<Label, VoxelMoments> label_moments(const LabelMap& map);

/// Moments of all nonzero voxels.
VoxelMoments foreground_moments(const LabelMap& map);

/// Unit eigenvector of the largest covariance eigenvalue, signed toward +z
/// (then +y, then +x when the preceding components vanish).
/// Throws DegenerateInput for fewer than 3 voxels or isotropic covariance.
Eigen::Vector3d principal_axis(const VoxelMoments& m, const Grid& grid);

Eigen::Vector3d mask_centroid(const LabelMap& map, Label id);
Eigen::Vector3d principal_axis(const LabelMap& map, Label id);

/// Patient frame. (-left_right, anterior, superior) is right-handed, so a
/// subject lying in the scanner's RAS frame gets left_right = (-1, 0, 0).
struct Basis {
  Eigen::Vector3d superior = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d left_right = -Eigen::Vector3d::UnitX();
  Eigen::Vector3d anterior = Eigen::Vector3d::UnitY();
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
};

/// superior from the body's principal axis; left_right from the mean
/// left-minus-right centroid offset of the hip, clavicle and scapula pairs.
Basis estimate_ras_basis(const LabelMap& body, const LabelMap& structures);

struct Plane {
  Eigen::Vector3d normal;
  double offset = 0.0;  // normal . p for points p on the plane
};

/// Plane normal to superior through the most superior femur voxel (both sides pooled).
Plane pelvis_plane(const LabelMap& structures, const Basis& basis);

enum class Side { kLeft, kRight };

struct LegLength {
  double upper_mm = 0.0;
  double lower_mm = 0.0;
  double total() const { return upper_mm + lower_mm; }
};

LegLength leg_length(Side side, const LabelMap& structures, const LabelMap& body, const Basis& basis);

inline double leg_length_mm(Side side, const LabelMap& structures, const LabelMap& body, const Basis& basis) {
  return leg_length(side, structures, body, basis).total();
}

struct HeightBreakdown {
  double lower_body_mm = 0.0;
  double torso_mm = 0.0;
  double neck_mm = 0.0;
  double head_mm = 0.0;
  double total_mm = 0.0;
  std::optional<double> left_mm;
  std::optional<double> right_mm;
};

/// Segment-wise standing height from a tissue (or any body) map and a
/// structure map carrying the landmark ids.
HeightBreakdown measure_height(const LabelMap& body, const LabelMap& structures);

}  // namespace vct
