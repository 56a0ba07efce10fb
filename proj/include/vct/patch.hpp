#pragma once

#include <vector>

#include <Eigen/Core>

#include "vct/volume.hpp"

namespace vct {

struct PatchGrid {
  Eigen::Vector3i dims;
  Eigen::Vector3i patch_size;
  Eigen::Vector3i stride;
  std::vector<Eigen::Vector3i> origins;  // z-major, x fastest
};

/// stride = max(1, round(patch * (1 - overlap))) per axis. Origins step by
/// stride while the patch fits; one extra origin at dims - patch closes any gap.
PatchGrid plan_patches(const Eigen::Vector3i& dims, const Eigen::Vector3i& patch_size, double overlap_fraction);

struct Patch {
  Eigen::Vector3i origin;
  Eigen::Vector3i size;
  Eigen::ArrayXf values;  // x-fastest, size.prod() entries
};

enum class Blend { kUniform, kCenterWeighted };

/// Per-voxel blend weight inside a patch. Center weighting is a separable
/// triangle peaking at the patch centre, floored at 1e-3.
double blend_weight(const Eigen::Vector3i& local, const Eigen::Vector3i& size, Blend blend);

/// Cuts the patches of `plan` out of `vol`.
std::vector<Patch> extract_patches(const Volume& vol, const PatchGrid& plan);

/// Weighted average of overlapping patches on `grid`. Sums and weights are
/// accumulated in double in patch order, so the result does not depend on
/// `threads`.
Volume aggregate(const std::vector<Patch>& patches, const Grid& grid, Blend blend, int threads = 1);

/// Per-voxel sum of normalized blend weights (1 wherever covered).
Eigen::ArrayXd normalized_weight_sums(const PatchGrid& plan, Blend blend);

struct WindowLossConfig {
  double soft_min_hu = -150.0;
  double soft_max_hu = 250.0;
  double hard_min_hu = 250.0;
  double hard_max_hu = 3000.0;
  double lambda_soft = 1.0;
  double lambda_hard = 0.5;
  double lambda_other = 0.1;

  void validate() const;
  double lambda(double hu) const {
    if (hu >= soft_min_hu && hu < soft_max_hu) return lambda_soft;
    if (hu >= hard_min_hu && hu < hard_max_hu) return lambda_hard;
    return lambda_other;
  }
};

/// Mean over voxels of lambda(x) * |x - xhat|, the window chosen by the
/// reference voxel x.
double multi_window_l1(const Volume& x, const Volume& xhat, const WindowLossConfig& cfg = {});

}  // namespace vct
