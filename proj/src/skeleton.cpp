#include "vct/skeleton.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

namespace vct {
namespace {

__extension__ typedef __int128 Int128;

const char* landmark_name(Label id) {
  switch (id) {
    case structure::kC1: return "C1";
    case structure::kC2: return "C2";
    case structure::kC7: return "C7";
    case structure::kFemurLeft: return "femur_left";
    case structure::kFemurRight: return "femur_right";
    case structure::kTibiaLeft: return "tibia_left";
    case structure::kTibiaRight: return "tibia_right";
    case structure::kHipLeft: return "hip_left";
    case structure::kHipRight: return "hip_right";
    case structure::kClavicleLeft: return "clavicle_left";
    case structure::kClavicleRight: return "clavicle_right";
    case structure::kScapulaLeft: return "scapula_left";
    case structure::kScapulaRight: return "scapula_right";
    default: return "structure";
  }
}

std::string missing(Label id) {
  return std::string("missing landmark ") + landmark_name(id) + " (id " + std::to_string(id) + ")";
}

/// Voxel lists for the landmark ids, gathered in one pass.
class LandmarkIndex {
 public:
  LandmarkIndex(const LabelMap& map, std::span<const Label> ids) : grid_(map.grid()) {
    std::vector<int> slot(65536, -1);
    for (std::size_t k = 0; k < ids.size(); ++k) slot[ids[k]] = static_cast<int>(k);
    lists_.resize(ids.size());
    ids_.assign(ids.begin(), ids.end());
    const auto& d = map.data();
    const Eigen::Index n = d.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Label v = d[i];
      if (v != 0 && slot[v] >= 0) lists_[static_cast<std::size_t>(slot[v])].push_back(static_cast<std::size_t>(i));
    }
  }

  const std::vector<std::size_t>& voxels(Label id) const {
    for (std::size_t k = 0; k < ids_.size(); ++k) {
      if (ids_[k] == id) return lists_[k];
    }
    static const std::vector<std::size_t> empty;
    return empty;
  }

  bool has(Label id) const { return !voxels(id).empty(); }

  VoxelMoments moments(Label id) const { return moments_of(voxels(id)); }

  VoxelMoments moments_of(const std::vector<std::size_t>& list) const {
    VoxelMoments m;
    for (std::size_t i : list) {
      const Eigen::Vector3i c = grid_.coords(i);
      m.add(c[0], c[1], c[2]);
    }
    return m;
  }

  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  std::vector<Label> ids_;
  std::vector<std::vector<std::size_t>> lists_;
};

constexpr std::array<Label, 13> kLandmarks = {
    structure::kC1,        structure::kC2,         structure::kC7,           structure::kFemurLeft,
    structure::kFemurRight, structure::kTibiaLeft,  structure::kTibiaRight,   structure::kHipLeft,
    structure::kHipRight,  structure::kClavicleLeft, structure::kClavicleRight, structure::kScapulaLeft,
    structure::kScapulaRight};

constexpr std::array<std::pair<Label, Label>, 3> kPairs = {{{structure::kHipLeft, structure::kHipRight},
                                                           {structure::kClavicleLeft, structure::kClavicleRight},
                                                           {structure::kScapulaLeft, structure::kScapulaRight}}};

Basis basis_from(const VoxelMoments& body, const LandmarkIndex& idx) {
  const Grid& g = idx.grid();
  Basis b;
  b.superior = principal_axis(body, g);
  b.origin = body.centroid(g);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  int pairs = 0;
  for (const auto& [l, r] : kPairs) {
    if (idx.has(l) && idx.has(r)) {
      sum += idx.moments(l).centroid(g) - idx.moments(r).centroid(g);
      ++pairs;
    }
  }
  if (pairs == 0) throw DegenerateInput("no complete symmetric pair (hips, clavicles, scapulae) available");
  Eigen::Vector3d lr = sum / pairs;
  lr -= lr.dot(b.superior) * b.superior;
  const double norm = lr.norm();
  if (!(norm > 1e-9)) throw DegenerateInput("left-right offset is parallel to the superior axis");
  b.left_right = lr / norm;
  b.anterior = b.left_right.cross(b.superior).normalized();
  return b;
}

double max_projection(const std::vector<std::size_t>& list, const Grid& g, const Eigen::Vector3d& dir) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i : list) best = std::max(best, dir.dot(g.world(g.coords(i))));
  return best;
}

double min_projection(const std::vector<std::size_t>& list, const Grid& g, const Eigen::Vector3d& dir) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : list) best = std::min(best, dir.dot(g.world(g.coords(i))));
  return best;
}

/// Largest 26-connected component of a voxel list; ties go to the component
/// holding the lowest linear index.
std::vector<std::size_t> largest_component(const std::vector<std::size_t>& list, const Grid& g) {
  if (list.empty()) return {};
  Eigen::Vector3i lo = g.coords(list.front());
  Eigen::Vector3i hi = lo;
  for (std::size_t i : list) {
    const Eigen::Vector3i c = g.coords(i);
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  const Eigen::Vector3i ext = hi - lo + Eigen::Vector3i::Ones();
  auto local = [&](const Eigen::Vector3i& c) {
    const Eigen::Vector3i d = c - lo;
    return static_cast<std::size_t>(d[0]) +
           static_cast<std::size_t>(ext[0]) * (static_cast<std::size_t>(d[1]) + static_cast<std::size_t>(ext[1]) * d[2]);
  };
  std::vector<int> comp(static_cast<std::size_t>(ext[0]) * ext[1] * ext[2], -2);  // -2 absent, -1 unvisited
  std::vector<std::size_t> sorted = list;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i : sorted) comp[local(g.coords(i))] = -1;

  std::vector<std::size_t> sizes;
  std::deque<Eigen::Vector3i> queue;
  for (std::size_t i : sorted) {
    const Eigen::Vector3i start = g.coords(i);
    if (comp[local(start)] != -1) continue;
    const int label = static_cast<int>(sizes.size());
    sizes.push_back(0);
    comp[local(start)] = label;
    queue.push_back(start);
    while (!queue.empty()) {
      const Eigen::Vector3i c = queue.front();
      queue.pop_front();
      ++sizes.back();
      for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const Eigen::Vector3i nb = c + Eigen::Vector3i(dx, dy, dz);
            if ((nb.array() < lo.array()).any() || (nb.array() > hi.array()).any()) continue;
            int& slot = comp[local(nb)];
            if (slot == -1) {
              slot = label;
              queue.push_back(nb);
            }
          }
        }
      }
    }
  }
  const auto best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<std::size_t> out;
  out.reserve(sizes[static_cast<std::size_t>(best)]);
  for (std::size_t i : sorted) {
    if (comp[local(g.coords(i))] == best) out.push_back(i);
  }
  return out;
}

bool inside(const LabelMap& body, const Eigen::Vector3d& p, bool& in_grid) {
  const Eigen::Vector3i v = body.grid().nearest(p);
  in_grid = body.grid().contains(v);
  return in_grid && body.at(v) != 0;
}

LegLength leg_from(Side side, const LandmarkIndex& idx, const LabelMap& body, const Basis& basis, double pelvis) {
  const Label femur_id = side == Side::kLeft ? structure::kFemurLeft : structure::kFemurRight;
  const Label tibia_id = side == Side::kLeft ? structure::kTibiaLeft : structure::kTibiaRight;
  if (!idx.has(femur_id)) throw InvalidArgument(missing(femur_id));
  if (!idx.has(tibia_id)) throw InvalidArgument(missing(tibia_id));
  const Grid& g = idx.grid();
  const Eigen::Vector3d& s = basis.superior;

  const auto& femur = idx.voxels(femur_id);
  const double femur_low = min_projection(femur, g, s);
  std::vector<std::size_t> below;
  for (std::size_t i : idx.voxels(tibia_id)) {
    if (s.dot(g.world(g.coords(i))) <= femur_low) below.push_back(i);
  }
  const auto tibia = largest_component(below, g);
  if (tibia.size() < 3) throw DegenerateInput(std::string("too few ") + landmark_name(tibia_id) + " voxels below the femur");
  const double knee = max_projection(tibia, g, s);

  LegLength out;
  const Eigen::Vector3d femur_axis = principal_axis(idx.moments(femur_id), g);
  const double cos_f = std::abs(femur_axis.dot(s));
  if (!(cos_f > 1e-6)) throw DegenerateInput("femur axis is perpendicular to the superior axis");
  out.upper_mm = std::max(0.0, (pelvis - knee) / cos_f);

  const VoxelMoments tm = idx.moments_of(tibia);
  Eigen::Vector3d axis = principal_axis(tm, g);
  if (axis.dot(s) > 0) axis = -axis;
  const double cos_t = axis.dot(s);
  if (!(std::abs(cos_t) > 1e-6)) throw DegenerateInput("tibia axis is perpendicular to the superior axis");
  const Eigen::Vector3d c = tm.centroid(g);
  const Eigen::Vector3d start = c + axis * ((knee - s.dot(c)) / cos_t);

  const double h = 0.5 * g.spacing.minCoeff();
  const auto max_steps = static_cast<long>(std::ceil(((g.dims.cast<double>().cwiseProduct(g.spacing)).norm() +
                                                      (start - g.origin).norm()) / h)) + 2;
  double last = -1.0;
  bool in_grid = true;
  for (long k = 0; k <= max_steps; ++k) {
    const double t = static_cast<double>(k) * h;
    if (!inside(body, start + t * axis, in_grid)) break;
    last = t;
  }
  if (last < 0) throw DegenerateInput(std::string("tibia axis does not intersect the body mask (") + landmark_name(tibia_id) + ")");
  out.lower_mm = last + 0.5 * h;
  return out;
}

}  // namespace

void VoxelMoments::merge(const VoxelMoments& o) {
  n_ += o.n_;
  for (int i = 0; i < 3; ++i) s_[i] += o.s_[i];
  for (int i = 0; i < 6; ++i) ss_[i] += o.ss_[i];
}

Eigen::Vector3d VoxelMoments::centroid(const Grid& grid) const {
  if (n_ == 0) throw DegenerateInput("centroid of an empty voxel set");
  Eigen::Vector3d mean;
  for (int i = 0; i < 3; ++i) mean[i] = static_cast<double>(s_[i]) / static_cast<double>(n_);
  return grid.origin + mean.cwiseProduct(grid.spacing);
}

Eigen::Matrix3d VoxelMoments::covariance(const Grid& grid) const {
  if (n_ == 0) throw DegenerateInput("covariance of an empty voxel set");
  // n^2 * cov = n * S_ab - S_a * S_b, evaluated exactly.
  auto central = [&](int a, int b, int k) {
    const Int128 v = Int128{n_} * ss_[k] - Int128{s_[a]} * s_[b];
    return static_cast<double>(v) / (static_cast<double>(n_) * static_cast<double>(n_)) * grid.spacing[a] *
           grid.spacing[b];
  };
  Eigen::Matrix3d c;
  c(0, 0) = central(0, 0, 0);
  c(1, 1) = central(1, 1, 1);
  c(2, 2) = central(2, 2, 2);
  c(0, 1) = c(1, 0) = central(0, 1, 3);
  c(0, 2) = c(2, 0) = central(0, 2, 4);
  c(1, 2) = c(2, 1) = central(1, 2, 5);
  return c;
}

std::map<Label, VoxelMoments> label_moments(const LabelMap& map) {
  std::vector<VoxelMoments> acc(65536);
  std::vector<char> seen(65536, 0);
  const Grid& g = map.grid();
  std::size_t i = 0;
  for (int z = 0; z < g.dims[2]; ++z) {
    for (int y = 0; y < g.dims[1]; ++y) {
      for (int x = 0; x < g.dims[0]; ++x, ++i) {
        const Label v = map[i];
        if (v == 0) continue;
        acc[v].add(x, y, z);
        seen[v] = 1;
      }
    }
  }
  std::map<Label, VoxelMoments> out;
  for (std::size_t id = 1; id < acc.size(); ++id) {
    if (seen[id]) out.emplace(static_cast<Label>(id), acc[id]);
  }
  return out;
}

VoxelMoments foreground_moments(const LabelMap& map) {
  VoxelMoments m;
  const Grid& g = map.grid();
  std::size_t i = 0;
  for (int z = 0; z < g.dims[2]; ++z) {
    for (int y = 0; y < g.dims[1]; ++y) {
      for (int x = 0; x < g.dims[0]; ++x, ++i) {
        if (map[i] != 0) m.add(x, y, z);
      }
    }
  }
  return m;
}

Eigen::Vector3d principal_axis(const VoxelMoments& m, const Grid& grid) {
  if (m.count() < 3) throw DegenerateInput("principal axis needs at least 3 voxels");
  const Eigen::Matrix3d cov = m.covariance(grid);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  if (es.info() != Eigen::Success) throw DegenerateInput("covariance eigen-decomposition failed");
  const Eigen::Vector3d ev = es.eigenvalues();  // ascending
  if (ev[2] - ev[0] <= 1e-9 * std::max(std::abs(ev[2]), std::numeric_limits<double>::min())) {
    throw DegenerateInput("isotropic covariance has no principal axis");
  }
  Eigen::Vector3d axis = es.eigenvectors().col(2).normalized();
  for (int k : {2, 1, 0}) {
    if (std::abs(axis[k]) > 1e-12) {
      if (axis[k] < 0) axis = -axis;
      break;
    }
  }
  return axis;
}

Eigen::Vector3d mask_centroid(const LabelMap& map, Label id) {
  const Label ids[] = {id};
  LandmarkIndex idx(map, ids);
  if (!idx.has(id)) throw DegenerateInput("class " + std::to_string(id) + " has no voxels");
  return idx.moments(id).centroid(map.grid());
}

Eigen::Vector3d principal_axis(const LabelMap& map, Label id) {
  const Label ids[] = {id};
  LandmarkIndex idx(map, ids);
  return principal_axis(idx.moments(id), map.grid());
}

Basis estimate_ras_basis(const LabelMap& body, const LabelMap& structures) {
  if (!(body.grid() == structures.grid())) throw InvalidArgument("body and structure maps must share a grid");
  LandmarkIndex idx(structures, kLandmarks);
  return basis_from(foreground_moments(body), idx);
}

Plane pelvis_plane(const LabelMap& structures, const Basis& basis) {
  const Label ids[] = {structure::kFemurLeft, structure::kFemurRight};
  LandmarkIndex idx(structures, ids);
  std::vector<std::size_t> pooled = idx.voxels(structure::kFemurLeft);
  const auto& right = idx.voxels(structure::kFemurRight);
  pooled.insert(pooled.end(), right.begin(), right.end());
  if (pooled.empty()) throw InvalidArgument("no femur voxels for the pelvis plane");
  return {basis.superior, max_projection(pooled, structures.grid(), basis.superior)};
}

LegLength leg_length(Side side, const LabelMap& structures, const LabelMap& body, const Basis& basis) {
  if (!(body.grid() == structures.grid())) throw InvalidArgument("body and structure maps must share a grid");
  LandmarkIndex idx(structures, kLandmarks);
  const Plane pelvis = pelvis_plane(structures, basis);
  return leg_from(side, idx, body, basis, pelvis.offset);
}

HeightBreakdown measure_height(const LabelMap& body, const LabelMap& structures) {
  if (!(body.grid() == structures.grid())) throw InvalidArgument("body and structure maps must share a grid");
  LandmarkIndex idx(structures, kLandmarks);
  for (Label id : {structure::kC1, structure::kC2, structure::kC7}) {
    if (!idx.has(id)) throw InvalidArgument(missing(id));
  }
  const bool left = idx.has(structure::kFemurLeft) && idx.has(structure::kTibiaLeft);
  const bool right = idx.has(structure::kFemurRight) && idx.has(structure::kTibiaRight);
  if (!left && !right) {
    throw InvalidArgument(idx.has(structure::kFemurLeft) || idx.has(structure::kFemurRight)
                              ? missing(idx.has(structure::kFemurLeft) ? structure::kTibiaLeft : structure::kTibiaRight)
                              : missing(structure::kFemurLeft));
  }
  const VoxelMoments bm = foreground_moments(body);
  if (bm.count() < 3) throw DegenerateInput("body mask has fewer than 3 voxels");
  const Basis basis = basis_from(bm, idx);
  const Grid& g = structures.grid();
  const Eigen::Vector3d& s = basis.superior;

  std::vector<std::size_t> femurs = idx.voxels(structure::kFemurLeft);
  const auto& fr = idx.voxels(structure::kFemurRight);
  femurs.insert(femurs.end(), fr.begin(), fr.end());
  const double pelvis = max_projection(femurs, g, s);

  HeightBreakdown hb;
  if (left) hb.left_mm = leg_from(Side::kLeft, idx, body, basis, pelvis).total();
  if (right) hb.right_mm = leg_from(Side::kRight, idx, body, basis, pelvis).total();
  hb.lower_body_mm = std::max(hb.left_mm.value_or(0.0), hb.right_mm.value_or(0.0));

  const Eigen::Vector3d c1 = idx.moments(structure::kC1).centroid(g);
  const Eigen::Vector3d c2 = idx.moments(structure::kC2).centroid(g);
  const Eigen::Vector3d c7 = idx.moments(structure::kC7).centroid(g);
  hb.torso_mm = std::max(0.0, s.dot(c7) - pelvis);
  hb.neck_mm = (c7 - c1).norm();

  const Eigen::Vector3d up = c1 - c2;
  if (!(up.norm() > 0)) throw DegenerateInput("C1 and C2 centroids coincide");
  const Eigen::Vector3d dir = up.normalized();
  const double h = 0.5 * g.spacing.minCoeff();
  double last = -1.0;
  bool in_grid = true;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * h;
    if (inside(body, c1 + t * dir, in_grid)) last = t;
    if (!in_grid) break;
  }
  if (last < 0) throw DegenerateInput("C1 centroid lies outside the body mask");
  hb.head_mm = last + 0.5 * h;
  hb.total_mm = hb.lower_body_mm + hb.torso_mm + hb.neck_mm + hb.head_mm;
  return hb;
}

}  // namespace vct
