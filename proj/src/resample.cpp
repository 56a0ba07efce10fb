#include "vct/resample.hpp"

#include <algorithm>
#include <array>

namespace vct {
namespace {

void check_target(const Eigen::Vector3d& target) {
  for (int i = 0; i < 3; ++i) {
    if (!(target[i] > 0.0) || !std::isfinite(target[i])) {
      throw InvalidArgument("target spacing must be positive and finite");
    }
  }
}

/// Source continuous index along each axis for every output index.
std::array<std::vector<double>, 3> source_coords(const Grid& in, const Grid& out) {
  std::array<std::vector<double>, 3> c;
  for (int a = 0; a < 3; ++a) {
    c[a].resize(static_cast<std::size_t>(out.dims[a]));
    for (int i = 0; i < out.dims[a]; ++i) {
      c[a][static_cast<std::size_t>(i)] = i * out.spacing[a] / in.spacing[a];
    }
  }
  return c;
}

template <typename Scalar>
typename VoxelGrid<Scalar>::Storage nearest(const VoxelGrid<Scalar>& in, const Grid& out) {
  const Grid& g = in.grid();
  const auto c = source_coords(g, out);
  std::array<std::vector<int>, 3> idx;
  for (int a = 0; a < 3; ++a) {
    idx[a].resize(c[a].size());
    for (std::size_t i = 0; i < c[a].size(); ++i) {
      idx[a][i] = std::clamp(static_cast<int>(std::floor(c[a][i] + 0.5)), 0, g.dims[a] - 1);
    }
  }
  typename VoxelGrid<Scalar>::Storage data(static_cast<Eigen::Index>(out.voxel_count()));
  Eigen::Index o = 0;
  for (int z = 0; z < out.dims[2]; ++z) {
    for (int y = 0; y < out.dims[1]; ++y) {
      for (int x = 0; x < out.dims[0]; ++x) {
        data[o++] = in(idx[0][static_cast<std::size_t>(x)], idx[1][static_cast<std::size_t>(y)],
                       idx[2][static_cast<std::size_t>(z)]);
      }
    }
  }
  return data;
}

struct Tap {
  int i0, i1;
  double t;
};

Volume::Storage trilinear(const Volume& in, const Grid& out) {
  const Grid& g = in.grid();
  const auto c = source_coords(g, out);
  std::array<std::vector<Tap>, 3> taps;
  for (int a = 0; a < 3; ++a) {
    for (double v : c[a]) {
      const int n = g.dims[a];
      const double cl = std::clamp(v, 0.0, static_cast<double>(n - 1));
      const int i0 = std::min(static_cast<int>(std::floor(cl)), n - 1);
      const int i1 = std::min(i0 + 1, n - 1);
      taps[a].push_back({i0, i1, cl - i0});
    }
  }
  // a + t * (b - a) keeps constant fields exact.
  auto lerp = [](double a, double b, double t) { return a + t * (b - a); };
  Volume::Storage data(static_cast<Eigen::Index>(out.voxel_count()));
  Eigen::Index o = 0;
  for (int z = 0; z < out.dims[2]; ++z) {
    const Tap& tz = taps[2][static_cast<std::size_t>(z)];
    for (int y = 0; y < out.dims[1]; ++y) {
      const Tap& ty = taps[1][static_cast<std::size_t>(y)];
      for (int x = 0; x < out.dims[0]; ++x) {
        const Tap& tx = taps[0][static_cast<std::size_t>(x)];
        const double c00 = lerp(in(tx.i0, ty.i0, tz.i0), in(tx.i1, ty.i0, tz.i0), tx.t);
        const double c10 = lerp(in(tx.i0, ty.i1, tz.i0), in(tx.i1, ty.i1, tz.i0), tx.t);
        const double c01 = lerp(in(tx.i0, ty.i0, tz.i1), in(tx.i1, ty.i0, tz.i1), tx.t);
        const double c11 = lerp(in(tx.i0, ty.i1, tz.i1), in(tx.i1, ty.i1, tz.i1), tx.t);
        const double c0 = lerp(c00, c10, ty.t);
        const double c1 = lerp(c01, c11, ty.t);
        data[o++] = static_cast<float>(lerp(c0, c1, tz.t));
      }
    }
  }
  return data;
}

}  // namespace

Grid resampled_grid(const Grid& grid, const Eigen::Vector3d& target) {
  grid.validate();
  check_target(target);
  Grid out = grid;
  for (int a = 0; a < 3; ++a) {
    const double extent = grid.dims[a] * grid.spacing[a] / target[a];
    out.dims[a] = std::max(1, static_cast<int>(std::ceil(extent - 1e-9)));
  }
  out.spacing = target;
  return out;
}

Volume resample(const Volume& vol, const Eigen::Vector3d& target, Interp mode) {
  const Grid out = resampled_grid(vol.grid(), target);
  if (target == vol.grid().spacing) return vol;
  if (mode == Interp::kNearest) return Volume(out, nearest(vol, out), vol.dtype(), vol.unit());
  return Volume(out, trilinear(vol, out), DType::kFloat32, vol.unit());
}

LabelMap resample(const LabelMap& map, const Eigen::Vector3d& target, Interp mode) {
  if (mode != Interp::kNearest) throw InvalidArgument("label maps can only be resampled with nearest interpolation");
  const Grid out = resampled_grid(map.grid(), target);
  if (target == map.grid().spacing) return map;
  return LabelMap(out, nearest(map, out), map.kind(), map.class_table(), map.dtype());
}

}  // namespace vct
