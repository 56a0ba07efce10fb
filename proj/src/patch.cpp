#include "vct/patch.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vct/parallel.hpp"

namespace vct {
namespace {

std::vector<int> axis_origins(int dim, int patch, int stride) {
  std::vector<int> o;
  for (int k = 0; k + patch <= dim; k += stride) o.push_back(k);
  if (o.back() + patch < dim) o.push_back(dim - patch);
  return o;
}

double tri(int i, int n) {
  const double c = 0.5 * (n - 1);
  const double half = 0.5 * n;
  return std::max(1e-3, 1.0 - std::abs(i - c) / half);
}

}  // namespace

PatchGrid plan_patches(const Eigen::Vector3i& dims, const Eigen::Vector3i& patch_size, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) throw InvalidArgument("overlap fraction must be in [0, 1)");
  PatchGrid g;
  g.dims = dims;
  g.patch_size = patch_size;
  std::array<std::vector<int>, 3> axes;
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 1 || patch_size[a] < 1) throw InvalidArgument("dims and patch size must be positive");
    if (patch_size[a] > dims[a]) throw InvalidArgument("patch is larger than the volume");
    g.stride[a] = std::max(1, static_cast<int>(std::lround(patch_size[a] * (1.0 - overlap))));
    axes[static_cast<std::size_t>(a)] = axis_origins(dims[a], patch_size[a], g.stride[a]);
  }
  for (int z : axes[2]) {
    for (int y : axes[1]) {
      for (int x : axes[0]) g.origins.emplace_back(x, y, z);
    }
  }
  return g;
}

double blend_weight(const Eigen::Vector3i& local, const Eigen::Vector3i& size, Blend blend) {
  if (blend == Blend::kUniform) return 1.0;
  return tri(local[0], size[0]) * tri(local[1], size[1]) * tri(local[2], size[2]);
}

std::vector<Patch> extract_patches(const Volume& vol, const PatchGrid& plan) {
  if (vol.grid().dims != plan.dims) throw InvalidArgument("patch plan does not match the volume");
  std::vector<Patch> out;
  out.reserve(plan.origins.size());
  const Eigen::Vector3i& s = plan.patch_size;
  for (const auto& o : plan.origins) {
    Patch p{o, s, Eigen::ArrayXf(static_cast<Eigen::Index>(s.prod()))};
    Eigen::Index k = 0;
    for (int z = 0; z < s[2]; ++z) {
      for (int y = 0; y < s[1]; ++y) {
        for (int x = 0; x < s[0]; ++x) p.values[k++] = vol(o[0] + x, o[1] + y, o[2] + z);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

Volume aggregate(const std::vector<Patch>& patches, const Grid& grid, Blend blend, int threads) {
  grid.validate();
  for (const auto& p : patches) {
    if ((p.size.array() < 1).any() || (p.origin.array() < 0).any() ||
        ((p.origin + p.size).array() > grid.dims.array()).any()) {
      throw InvalidArgument("patch lies outside the volume");
    }
    if (p.values.size() != p.size.prod()) throw InvalidArgument("patch value count does not match its size");
  }
  const std::size_t n = grid.voxel_count();
  std::vector<double> sum(n, 0.0), weight(n, 0.0);
  // Separable weights cached per patch size along each axis.
  auto axis_weights = [&](int len) {
    std::vector<double> w(static_cast<std::size_t>(len), 1.0);
    if (blend == Blend::kCenterWeighted) {
      for (int i = 0; i < len; ++i) w[static_cast<std::size_t>(i)] = tri(i, len);
    }
    return w;
  };

  // Each worker owns a contiguous range of z slices and visits patches in order.
  const int nz = grid.dims[2];
  const int workers = std::max(1, std::min(threads, nz));
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    const int z_lo = static_cast<int>(static_cast<long>(nz) * static_cast<long>(w) / workers);
    const int z_hi = static_cast<int>(static_cast<long>(nz) * static_cast<long>(w + 1) / workers);
    for (const auto& p : patches) {
      const int pz0 = std::max(z_lo, p.origin[2]);
      const int pz1 = std::min(z_hi, p.origin[2] + p.size[2]);
      if (pz0 >= pz1) continue;
      const auto wx = axis_weights(p.size[0]);
      const auto wy = axis_weights(p.size[1]);
      const auto wz = axis_weights(p.size[2]);
      for (int z = pz0; z < pz1; ++z) {
        const int lz = z - p.origin[2];
        for (int ly = 0; ly < p.size[1]; ++ly) {
          const double wyz = wy[static_cast<std::size_t>(ly)] * wz[static_cast<std::size_t>(lz)];
          const std::size_t out0 = grid.index(p.origin[0], p.origin[1] + ly, z);
          const Eigen::Index in0 = static_cast<Eigen::Index>(p.size[0]) * (ly + static_cast<Eigen::Index>(p.size[1]) * lz);
          for (int lx = 0; lx < p.size[0]; ++lx) {
            const double wt = wx[static_cast<std::size_t>(lx)] * wyz;
            sum[out0 + static_cast<std::size_t>(lx)] += wt * static_cast<double>(p.values[in0 + lx]);
            weight[out0 + static_cast<std::size_t>(lx)] += wt;
          }
        }
      }
    }
  });

  Volume out(grid, 0.0f, DType::kFloat32, Unit::kHU);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weight[i] > 0.0)) {
      const Eigen::Vector3i c = grid.coords(i);
      throw InvalidArgument("voxel (" + std::to_string(c[0]) + ", " + std::to_string(c[1]) + ", " +
                            std::to_string(c[2]) + ") is not covered by any patch");
    }
    out[i] = static_cast<float>(sum[i] / weight[i]);
  }
  return out;
}

Eigen::ArrayXd normalized_weight_sums(const PatchGrid& plan, Blend blend) {
  Grid g;
  g.dims = plan.dims;
  const std::size_t n = g.voxel_count();
  Eigen::ArrayXd total = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(n));
  auto visit = [&](auto&& fn) {
    for (const auto& o : plan.origins) {
      for (int z = 0; z < plan.patch_size[2]; ++z) {
        for (int y = 0; y < plan.patch_size[1]; ++y) {
          for (int x = 0; x < plan.patch_size[0]; ++x) {
            const Eigen::Vector3i local(x, y, z);
            fn(static_cast<Eigen::Index>(g.index(o + local)), blend_weight(local, plan.patch_size, blend));
          }
        }
      }
    }
  };
  visit([&](Eigen::Index i, double w) { total[i] += w; });
  Eigen::ArrayXd norm = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(n));
  visit([&](Eigen::Index i, double w) { norm[i] += w / total[i]; });
  return norm;
}

void WindowLossConfig::validate() const {
  if (!(soft_min_hu < soft_max_hu) || !(hard_min_hu < hard_max_hu)) {
    throw InvalidArgument("window ranges must satisfy min < max");
  }
  if (!(soft_max_hu <= hard_min_hu || hard_max_hu <= soft_min_hu)) {
    throw InvalidArgument("soft and hard windows overlap");
  }
  for (double l : {lambda_soft, lambda_hard, lambda_other}) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidArgument("window weights must be finite and >= 0");
  }
  if (!(lambda_soft > 0.0 || lambda_hard > 0.0 || lambda_other > 0.0)) {
    throw InvalidArgument("at least one window weight must be positive");
  }
}

double multi_window_l1(const Volume& x, const Volume& xhat, const WindowLossConfig& cfg) {
  cfg.validate();
  if (!(x.grid() == xhat.grid())) throw InvalidArgument("loss inputs do not share a grid");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = x[i];
    s += cfg.lambda(r) * std::abs(r - static_cast<double>(xhat[i]));
  }
  return s / static_cast<double>(x.size());
}

}  // namespace vct
