#pragma once

#include "vct/volume.hpp"

namespace vct {

enum class Interp { kTrilinear, kNearest };

/// Output grid for a new spacing: same origin, dims = ceil(dims * spacing / target).
Grid resampled_grid(const Grid& grid, const Eigen::Vector3d& target_spacing);

/// Trilinear output is stored as float32; nearest keeps the input dtype.
/// Requesting the input spacing returns an exact copy.
Volume resample(const Volume& vol, const Eigen::Vector3d& target_spacing, Interp mode = Interp::kTrilinear);

/// Label maps only support nearest-neighbour interpolation.
LabelMap resample(const LabelMap& map, const Eigen::Vector3d& target_spacing, Interp mode = Interp::kNearest);

}  // namespace vct
