#include "vct/phantom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include "vct/rng.hpp"

namespace vct {
namespace {

// Reference densities (g/cm^3) under water-normalized HU.
constexpr double kHuAir = -1000.0;
constexpr double kHuFat = -100.0;
constexpr double kHuMuscle = 50.0;
constexpr double kHuSoft = 40.0;
constexpr double kRhoFat = (kHuFat + 1000.0) / 1000.0;
constexpr double kRhoMuscle = (kHuMuscle + 1000.0) / 1000.0;
constexpr double kRhoSoft = (kHuSoft + 1000.0) / 1000.0;

constexpr std::uint8_t kSoft = 255;  // body voxel not yet given a tissue
constexpr int kMargin = 2;

enum class Rule : std::uint8_t { kBody, kOrgan, kBone };

/// Axis-aligned ellipsoid or a cylinder whose axis lies in the y-z plane.
struct Prim {
  bool cylinder = false;
  Eigen::Vector3d c = Eigen::Vector3d::Zero();  // ellipsoid centre or cylinder base point
  Eigen::Vector3d r = Eigen::Vector3d::Ones();  // ellipsoid semi-axes
  Eigen::Vector3d d = -Eigen::Vector3d::UnitZ();
  double len = 0.0;
  double radius = 0.0;
  double zlo = 0.0, zhi = 0.0;
  std::uint8_t code = kSoft;
  Rule rule = Rule::kBody;

  /// Inclusive world x-range of the row (y, z) inside the primitive.
  bool x_range(double y, double z, double& lo, double& hi) const {
    if (z < zlo || z > zhi) return false;
    if (!cylinder) {
      const double dy = (y - c[1]) / r[1], dz = (z - c[2]) / r[2];
      const double u = 1.0 - dy * dy - dz * dz;
      if (u < 0.0) return false;
      const double half = r[0] * std::sqrt(u);
      lo = c[0] - half;
      hi = c[0] + half;
      return true;
    }
    const double qy = y - c[1], qz = z - c[2];
    const double t = qy * d[1] + qz * d[2];
    if (t < 0.0 || t > len) return false;
    const double w = radius * radius - (qy * qy + qz * qz - t * t);
    if (w < 0.0) return false;
    const double half = std::sqrt(w);
    lo = c[0] - half;
    hi = c[0] + half;
    return true;
  }

  /// Per-row part of the depth evaluation; false when the row misses the primitive.
  bool row_term(double y, double z, double& term) const {
    if (z < zlo || z > zhi) return false;
    const double qy = y - c[1], qz = z - c[2];
    if (!cylinder) {
      term = (qy / r[1]) * (qy / r[1]) + (qz / r[2]) * (qz / r[2]);
      return term <= 1.0;
    }
    const double t = qy * d[1] + qz * d[2];
    if (t < 0.0 || t > len) return false;
    term = qy * qy + qz * qz - t * t;
    return term <= radius * radius;
  }

  /// Distance-like depth below the surface at x given the row term.
  double depth(double x, double term) const {
    const double dx = x - c[0];
    if (!cylinder) return (1.0 - std::sqrt((dx / r[0]) * (dx / r[0]) + term)) * r.minCoeff();
    return radius - std::sqrt(dx * dx + term);
  }
};

Prim ellipsoid(const Eigen::Vector3d& c, const Eigen::Vector3d& r, std::uint8_t code, Rule rule) {
  Prim p;
  p.c = c;
  p.r = r;
  p.zlo = c[2] - r[2];
  p.zhi = c[2] + r[2];
  p.code = code;
  p.rule = rule;
  return p;
}

Prim cylinder(const Eigen::Vector3d& base, const Eigen::Vector3d& dir, double len, double radius, std::uint8_t code,
              Rule rule) {
  Prim p;
  p.cylinder = true;
  p.c = base;
  p.d = dir.normalized();
  p.len = len;
  p.radius = radius;
  const Eigen::Vector3d end = base + len * p.d;
  const double spread = radius * std::sqrt(std::max(0.0, 1.0 - p.d[2] * p.d[2]));
  p.zlo = std::min(base[2], end[2]) - spread;
  p.zhi = std::max(base[2], end[2]) + spread;
  p.code = code;
  p.rule = rule;
  return p;
}

/// Organ placement relative to the torso: centre offsets and semi-axes as
/// fractions of the torso semi-axes.
struct OrganTemplate {
  Label id;
  double cx, cy, cz;
  double sx, sy, sz;
  bool male_only;
};

// clang-format off
constexpr OrganTemplate kOrgans[] = {
    {structure::kLungUpperLobes,        0.45,  0.00,  0.55, 0.30, 0.55, 0.22, false},
    {structure::kLungUpperLobes,       -0.45,  0.00,  0.55, 0.30, 0.55, 0.22, false},
    {structure::kLungLowerLobes,        0.45, -0.10,  0.22, 0.32, 0.60, 0.15, false},
    {structure::kLungLowerLobes,       -0.45, -0.10,  0.22, 0.32, 0.60, 0.15, false},
    {structure::kLungMiddleLobe,        0.45,  0.30,  0.36, 0.20, 0.25, 0.08, false},
    {structure::kHeart,                -0.15,  0.35,  0.30, 0.25, 0.30, 0.12, false},
    {structure::kLiver,                 0.40,  0.10, -0.05, 0.40, 0.55, 0.12, false},
    {structure::kSpleen,               -0.50, -0.20, -0.02, 0.15, 0.20, 0.07, false},
    {structure::kKidney,                0.35, -0.45, -0.20, 0.10, 0.12, 0.08, false},
    {structure::kKidney,               -0.35, -0.45, -0.20, 0.10, 0.12, 0.08, false},
    {structure::kUrinaryBladder,        0.00,  0.40, -0.75, 0.15, 0.20, 0.08, false},
    {structure::kProstate,              0.00,  0.20, -0.88, 0.06, 0.08, 0.03, true},
    {structure::kGluteusMuscles,        0.45, -0.55, -0.70, 0.25, 0.20, 0.12, false},
    {structure::kGluteusMuscles,       -0.45, -0.55, -0.70, 0.25, 0.20, 0.12, false},
    {structure::kAutochthonousMuscles,  0.15, -0.60,  0.00, 0.10, 0.15, 0.50, false},
    {structure::kAutochthonousMuscles, -0.15, -0.60,  0.00, 0.10, 0.15, 0.50, false},
    {structure::kIliopsoas,             0.25, -0.15, -0.55, 0.08, 0.10, 0.25, false},
    {structure::kIliopsoas,            -0.25, -0.15, -0.55, 0.08, 0.10, 0.25, false},
};
// clang-format on
constexpr std::size_t kOrganCount = std::size(kOrgans);

struct Jitter {
  std::array<Eigen::Vector3d, kOrganCount> shift;
  std::array<Eigen::Vector3d, kOrganCount> scale;
  Eigen::Vector3d brain_shift;
};

Jitter draw_jitter(SplitMix64& rng) {
  Jitter j;
  for (std::size_t i = 0; i < kOrganCount; ++i) {
    for (int a = 0; a < 3; ++a) j.shift[i][a] = rng.uniform(-0.05, 0.05);
    for (int a = 0; a < 3; ++a) j.scale[i][a] = rng.uniform(0.92, 1.08);
  }
  for (int a = 0; a < 3; ++a) j.brain_shift[a] = rng.uniform(-0.05, 0.05);
  return j;
}

bool is_muscle_organ(std::uint8_t code) {
  return code == structure::kGluteusMuscles || code == structure::kAutochthonousMuscles ||
         code == structure::kIliopsoas;
}

bool is_bone(std::uint8_t code) {
  return code == structure::kBone || code == structure::kAppendicularBones ||
         (code >= structure::kC1 && code <= structure::kScapulaRight);
}

/// Every length of the body for one girth scale.
struct Body {
  double H = 0.0, k = 1.0;
  double crown = 0.0, knee = 0.0, pelvis = 0.0;
  double torso_z = 0.0, ta = 0.0, tb = 0.0, tc = 0.0;
  double leg_x = 0.0, leg_r = 0.0;
  double neck_r = 0.0, head_r = 0.0;
  double half_x = 0.0, half_y = 0.0;
  std::vector<Prim> prims;  // in painting order
  std::size_t body_prims = 0;  // prims[0, body_prims) define the body shape
  std::array<std::pair<Label, double>, 3> markers;  // vertebra id, target z
};

double snap(double v, double s) { return std::round(v / s) * s; }

Body build_body(const PhantomSpec& spec, double k, const Jitter& jit, const Eigen::Vector3d& spacing) {
  Body b;
  const double H = spec.height_mm;
  const double sz = spacing[2];
  b.H = H;
  b.k = k;
  b.crown = snap(H, sz);
  b.knee = snap(0.285 * H, sz);
  b.pelvis = snap(0.53 * H, sz);
  b.torso_z = 0.665 * H;
  b.ta = 0.105 * H * k;
  b.tb = 0.078 * H * k;
  b.tc = 0.2 * H;
  b.leg_r = 0.042 * H * k;
  b.leg_x = std::max(0.055 * H, 1.02 * b.leg_r);
  b.neck_r = 0.028 * H * k;
  b.head_r = 0.065 * H;
  const double theta = spec.knee_flexion_deg * std::numbers::pi / 180.0;
  const Eigen::Vector3d down = -Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d shin(0.0, -std::sin(theta), -std::cos(theta));
  const Eigen::Vector3d head_c(0.0, 0.0, b.crown - b.head_r);
  const Eigen::Vector3d torso_c(0.0, 0.0, b.torso_z);
  const Eigen::Vector3d semi(b.ta, b.tb, b.tc);

  auto& P = b.prims;
  P.push_back(ellipsoid(torso_c, semi, kSoft, Rule::kBody));
  P.push_back(cylinder({0.0, 0.0, 0.90 * H}, down, 0.10 * H, b.neck_r, kSoft, Rule::kBody));
  P.push_back(ellipsoid(head_c, Eigen::Vector3d::Constant(b.head_r), kSoft, Rule::kBody));
  for (double sx : {-1.0, 1.0}) {
    const double x = sx * b.leg_x;
    const double top = b.pelvis + 0.04 * H;
    P.push_back(cylinder({x, 0.0, top}, down, top - b.knee, b.leg_r, kSoft, Rule::kBody));
    P.push_back(cylinder({x, 0.0, b.knee}, shin, b.knee, b.leg_r, kSoft, Rule::kBody));
  }
  b.body_prims = P.size();

  for (std::size_t i = 0; i < kOrganCount; ++i) {
    const OrganTemplate& o = kOrgans[i];
    if (o.male_only && spec.sex != Sex::kMale) continue;
    const Eigen::Vector3d rel = Eigen::Vector3d(o.cx, o.cy, o.cz) + jit.shift[i];
    const Eigen::Vector3d size = Eigen::Vector3d(o.sx, o.sy, o.sz).cwiseProduct(jit.scale[i]);
    P.push_back(ellipsoid(torso_c + rel.cwiseProduct(semi), size.cwiseProduct(semi), static_cast<std::uint8_t>(o.id),
                          Rule::kOrgan));
  }
  P.push_back(ellipsoid(head_c + Eigen::Vector3d(0.0, 0.0, 0.1 * b.head_r) + jit.brain_shift * b.head_r,
                        Eigen::Vector3d::Constant(0.75 * b.head_r), structure::kBrain, Rule::kOrgan));

  const double bone_r = 0.0075 * H;
  P.push_back(cylinder({0.0, 0.0, 0.86 * H}, down, 0.36 * H, 0.012 * H, structure::kBone, Rule::kBone));
  for (int s = 0; s < 2; ++s) {
    const double x = (s == 0 ? -1.0 : 1.0) * b.leg_x;  // patient left is -x
    const auto tibia = static_cast<std::uint8_t>(s == 0 ? structure::kTibiaLeft : structure::kTibiaRight);
    P.push_back(cylinder({x, 0.0, b.knee}, shin, b.knee - 0.045 * H, bone_r, tibia, Rule::kBone));
  }
  for (int s = 0; s < 2; ++s) {
    const double x = (s == 0 ? -1.0 : 1.0) * b.leg_x;
    const auto femur = static_cast<std::uint8_t>(s == 0 ? structure::kFemurLeft : structure::kFemurRight);
    P.push_back(cylinder({x, 0.0, b.pelvis}, down, b.pelvis - b.knee, bone_r, femur, Rule::kBone));
  }
  for (int s = 0; s < 2; ++s) {
    const double sx = s == 0 ? -1.0 : 1.0;
    P.push_back(ellipsoid({sx * b.leg_x, 0.75 * b.leg_r, b.knee + 0.01 * H}, Eigen::Vector3d::Constant(0.012 * H),
                          structure::kAppendicularBones, Rule::kBone));
    P.push_back(ellipsoid(torso_c + Eigen::Vector3d(sx * 0.25 * b.ta, 0.0, -0.65 * b.tc),
                          Eigen::Vector3d::Constant(0.015 * H),
                          static_cast<std::uint8_t>(s == 0 ? structure::kHipLeft : structure::kHipRight), Rule::kBone));
    P.push_back(ellipsoid(torso_c + Eigen::Vector3d(sx * 0.3 * b.ta, 0.3 * b.tb, 0.8 * b.tc),
                          Eigen::Vector3d(0.2 * b.ta, 0.06 * b.tb, 0.04 * b.tc),
                          static_cast<std::uint8_t>(s == 0 ? structure::kClavicleLeft : structure::kClavicleRight),
                          Rule::kBone));
    P.push_back(ellipsoid(torso_c + Eigen::Vector3d(sx * 0.4 * b.ta, -0.55 * b.tb, 0.55 * b.tc),
                          Eigen::Vector3d(0.15 * b.ta, 0.05 * b.tb, 0.15 * b.tc),
                          static_cast<std::uint8_t>(s == 0 ? structure::kScapulaLeft : structure::kScapulaRight),
                          Rule::kBone));
  }
  b.markers = {{{structure::kC7, 0.82 * H}, {structure::kC2, 0.865 * H}, {structure::kC1, 0.875 * H}}};

  const double reach_y = b.knee * std::sin(theta) + b.leg_r;
  b.half_x = std::max({b.ta, b.leg_x + b.leg_r, b.neck_r, b.head_r});
  b.half_y = std::max({b.tb, reach_y, b.leg_r, b.neck_r, b.head_r});
  return b;
}

Grid grid_for(const Body& b, const Eigen::Vector3d& s) {
  Grid g;
  g.spacing = s;
  const int hx = static_cast<int>(std::ceil(b.half_x / s[0])) + kMargin;
  const int hy = static_cast<int>(std::ceil(b.half_y / s[1])) + kMargin;
  g.dims = {2 * hx + 1, 2 * hy + 1, static_cast<int>(std::lround(b.crown / s[2])) + 2 * kMargin};
  g.origin = {-hx * s[0], -hy * s[1], -(kMargin - 0.5) * s[2]};
  return g;
}

/// Voxel-centre index range covered by a world interval along x.
bool index_range(const Grid& g, double lo, double hi, int& i0, int& i1) {
  i0 = std::max(0, static_cast<int>(std::ceil((lo - g.origin[0]) / g.spacing[0])));
  i1 = std::min(g.dims[0] - 1, static_cast<int>(std::floor((hi - g.origin[0]) / g.spacing[0])));
  return i0 <= i1;
}

Eigen::Vector3i marker_voxel(const Grid& g, double z) {
  return g.nearest(Eigen::Vector3d(0.0, 0.0, z));
}

/// Paints structure codes: 0 air, kSoft body, else a structure id.
std::vector<std::uint8_t> rasterize(const Body& b, const Grid& g) {
  std::vector<std::uint8_t> buf(g.voxel_count(), 0);
  for (int z = 0; z < g.dims[2]; ++z) {
    const double wz = g.origin[2] + z * g.spacing[2];
    for (int y = 0; y < g.dims[1]; ++y) {
      const double wy = g.origin[1] + y * g.spacing[1];
      std::uint8_t* row = buf.data() + g.index(0, y, z);
      for (const Prim& p : b.prims) {
        double lo, hi;
        int i0, i1;
        if (!p.x_range(wy, wz, lo, hi) || !index_range(g, lo, hi, i0, i1)) continue;
        switch (p.rule) {
          case Rule::kBody:
            for (int i = i0; i <= i1; ++i) {
              if (row[i] == 0) row[i] = kSoft;
            }
            break;
          case Rule::kOrgan:
            for (int i = i0; i <= i1; ++i) {
              if (row[i] == kSoft) row[i] = p.code;
            }
            break;
          case Rule::kBone:
            for (int i = i0; i <= i1; ++i) {
              if (row[i] != 0) row[i] = p.code;
            }
            break;
        }
      }
    }
  }
  for (const auto& [id, z] : b.markers) {
    const Eigen::Vector3i c = marker_voxel(g, z);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Eigen::Vector3i v = c + Eigen::Vector3i(dx, dy, 0);
        if (!g.contains(v)) continue;
        auto& cell = buf[g.index(v)];
        if (cell != 0) cell = static_cast<std::uint8_t>(id);
      }
    }
  }
  return buf;
}

struct Counts {
  std::size_t soft = 0, organ = 0, muscle_organ = 0, bone = 0;
};

Counts count(const std::vector<std::uint8_t>& buf) {
  std::array<std::size_t, 256> h{};
  for (std::uint8_t v : buf) ++h[v];
  Counts c;
  for (int code = 1; code < 256; ++code) {
    const auto n = h[static_cast<std::size_t>(code)];
    if (n == 0) continue;
    const auto u = static_cast<std::uint8_t>(code);
    if (u == kSoft) {
      c.soft += n;
    } else if (is_bone(u)) {
      c.bone += n;
    } else if (is_muscle_organ(u)) {
      c.muscle_organ += n;
    } else {
      c.organ += n;
    }
  }
  return c;
}

/// Total mass (g) that makes fat and muscle hit their fractions exactly.
double solved_mass_g(const Counts& c, const PhantomSpec& spec, double rho_bone, double voxel_cm3) {
  const double f = spec.fat_fraction, m = spec.muscle_fraction;
  const double denom = 1.0 - f - m + kRhoSoft * f / kRhoFat + kRhoSoft * m / kRhoMuscle;
  const double fixed = kRhoSoft * static_cast<double>(c.soft + c.organ + c.muscle_organ) +
                       rho_bone * static_cast<double>(c.bone);
  return fixed * voxel_cm3 / denom;
}

}  // namespace

void PhantomSpec::validate() const {
  if (!(height_mm >= 800.0 && height_mm <= 2200.0)) throw InvalidArgument("phantom height must be in [800, 2200] mm");
  if (!(weight_kg > 0.0) || !std::isfinite(weight_kg)) throw InvalidArgument("phantom weight must be positive");
  if (!(fat_fraction >= 0.05 && fat_fraction <= 0.6)) throw InvalidArgument("fat fraction must be in [0.05, 0.6]");
  if (!(muscle_fraction >= 0.0) || fat_fraction + muscle_fraction > 0.9) {
    throw InvalidArgument("muscle fraction must be >= 0 with fat + muscle <= 0.9");
  }
  if (!std::isfinite(age_years)) throw InvalidArgument("age must be finite");
  if (!(knee_flexion_deg >= 0.0 && knee_flexion_deg <= 60.0)) {
    throw InvalidArgument("knee flexion must be in [0, 60] degrees");
  }
  for (int i = 0; i < 3; ++i) {
    if (!(spacing_mm[i] > 0.0) || !std::isfinite(spacing_mm[i])) throw InvalidArgument("spacing must be positive");
  }
}

double bone_hu_for_age(double age_years) { return std::round(std::clamp(1100.0 - 5.0 * age_years, 400.0, 1200.0)); }

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  const Jitter jit = draw_jitter(rng);
  const double bone_hu = bone_hu_for_age(spec.age_years);
  const double rho_bone = (bone_hu + 1000.0) / 1000.0;
  const double target_g = spec.weight_kg * 1000.0;

  // Girth search on a coarse grid, then refine on the output grid.
  const Eigen::Vector3d coarse = spec.spacing_mm.cwiseMax(Eigen::Vector3d::Constant(6.0));
  auto mass_at = [&](double k, const Eigen::Vector3d& s, std::vector<std::uint8_t>* keep, Body* body, Grid* grid) {
    Body b = build_body(spec, k, jit, s);
    Grid g = grid_for(b, s);
    auto buf = rasterize(b, g);
    const double m = solved_mass_g(count(buf), spec, rho_bone, voxel_volume_mm3(g) / 1000.0);
    if (keep) *keep = std::move(buf);
    if (body) *body = std::move(b);
    if (grid) *grid = g;
    return m;
  };
  constexpr double kMinScale = 0.4, kMaxScale = 3.0;
  auto check_scale = [&](double k) {
    if (!(k >= kMinScale && k <= kMaxScale)) {
      throw InvalidArgument("infeasible phantom: weight " + std::to_string(spec.weight_kg) + " kg at height " +
                            std::to_string(spec.height_mm) + " mm needs girth scale " + std::to_string(k));
    }
  };
  double k = 1.0;
  for (int it = 0; it < 12; ++it) {
    const double m = mass_at(k, coarse, nullptr, nullptr, nullptr);
    const double ratio = target_g / m;
    if (std::abs(ratio - 1.0) < 0.002) break;
    k = std::clamp(k * std::sqrt(ratio), kMinScale * 0.5, kMaxScale * 2.0);
  }
  check_scale(k);

  std::vector<std::uint8_t> buf;
  Body body;
  Grid g;
  for (int it = 0; it < 3; ++it) {
    const double m = mass_at(k, spec.spacing_mm, &buf, &body, &g);
    const double ratio = target_g / m;
    if (std::abs(ratio - 1.0) < 0.005) break;
    k *= std::sqrt(ratio);
    check_scale(k);
  }

  const double voxel_cm3 = voxel_volume_mm3(g) / 1000.0;
  const Counts c = count(buf);
  const double mass = solved_mass_g(c, spec, rho_bone, voxel_cm3);
  const auto n_fat = static_cast<std::int64_t>(std::llround(spec.fat_fraction * mass / (kRhoFat * voxel_cm3)));
  const auto n_mus = static_cast<std::int64_t>(
      std::llround(spec.muscle_fraction * mass / (kRhoMuscle * voxel_cm3) - static_cast<double>(c.muscle_organ)));
  if (n_mus < 0 || n_fat < 0 || static_cast<std::size_t>(n_fat + n_mus) > c.soft) {
    throw InvalidArgument("infeasible phantom: fat/muscle fractions do not fit the soft-tissue volume");
  }

  // Order soft voxels by depth below the skin (ties by index): the shallowest
  // become fat, the next layer muscle.
  std::vector<std::uint64_t> keys;
  keys.reserve(c.soft);
  std::vector<std::pair<const Prim*, double>> active;
  for (int z = 0; z < g.dims[2]; ++z) {
    const double wz = g.origin[2] + z * g.spacing[2];
    for (int y = 0; y < g.dims[1]; ++y) {
      const double wy = g.origin[1] + y * g.spacing[1];
      active.clear();
      double term;
      for (std::size_t i = 0; i < body.body_prims; ++i) {
        if (body.prims[i].row_term(wy, wz, term)) active.emplace_back(&body.prims[i], term);
      }
      if (active.empty()) continue;
      const std::size_t base = g.index(0, y, z);
      for (int x = 0; x < g.dims[0]; ++x) {
        if (buf[base + static_cast<std::size_t>(x)] != kSoft) continue;
        const double wx = g.origin[0] + x * g.spacing[0];
        double depth = 0.0;
        for (const auto& [prim, t] : active) depth = std::max(depth, prim->depth(wx, t));
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(depth));
        keys.push_back((std::uint64_t{bits} << 32) | (base + static_cast<std::size_t>(x)));
      }
    }
  }
  const auto fat_end = keys.begin() + n_fat;
  const auto mus_end = fat_end + n_mus;
  if (n_fat > 0 && fat_end != keys.end()) std::nth_element(keys.begin(), fat_end, keys.end());
  if (n_mus > 0 && mus_end != keys.end()) std::nth_element(fat_end, mus_end, keys.end());

  Phantom ph{Volume(g, static_cast<float>(kHuAir), DType::kInt16, Unit::kHU),
             LabelMap(g, LabelKind::kTissue, tissue_class_table()),
             LabelMap(g, LabelKind::kStructure, structure_class_table()), {}};
  float* hu = ph.image.data().data();
  Label* tis = ph.tissue.data().data();
  Label* str = ph.structures.data().data();
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const std::uint8_t v = buf[i];
    if (v == 0) continue;
    if (v == kSoft) {
      hu[i] = static_cast<float>(kHuSoft);
      tis[i] = tissue::kBody;
    } else if (is_bone(v)) {
      hu[i] = static_cast<float>(bone_hu);
      tis[i] = tissue::kBone;
      str[i] = v;
    } else if (is_muscle_organ(v)) {
      hu[i] = static_cast<float>(kHuMuscle);
      tis[i] = tissue::kMuscle;
      str[i] = v;
    } else {
      hu[i] = static_cast<float>(kHuSoft);
      tis[i] = tissue::kBody;
      str[i] = v;
    }
  }
  constexpr std::uint64_t kIndexMask = 0xffffffffULL;
  for (auto it = keys.begin(); it != fat_end; ++it) {
    const std::size_t i = *it & kIndexMask;
    hu[i] = static_cast<float>(kHuFat);
    tis[i] = tissue::kFat;
  }
  for (auto it = fat_end; it != mus_end; ++it) {
    const std::size_t i = *it & kIndexMask;
    hu[i] = static_cast<float>(kHuMuscle);
    tis[i] = tissue::kMuscle;
  }

  // Truth from the voxel counts that were written.
  const auto n_muscle_total = static_cast<double>(n_mus) + static_cast<double>(c.muscle_organ);
  const double n_other = static_cast<double>(c.soft + c.organ) - static_cast<double>(n_fat + n_mus);
  const double fat_g = kRhoFat * static_cast<double>(n_fat) * voxel_cm3;
  const double muscle_g = kRhoMuscle * n_muscle_total * voxel_cm3;
  const double body_g = fat_g + muscle_g + kRhoSoft * n_other * voxel_cm3 +
                        rho_bone * static_cast<double>(c.bone) * voxel_cm3;
  PhantomTruth& t = ph.truth;
  t.body_mass_g = body_g;
  t.fat_pct = 100.0 * fat_g / body_g;
  t.muscle_pct = 100.0 * muscle_g / body_g;
  t.bone_density_hu = bone_hu;
  t.body_volume_mm3 = static_cast<double>(c.soft + c.organ + c.muscle_organ + c.bone) * voxel_volume_mm3(g);
  t.girth_scale = body.k;

  std::map<Label, Eigen::Vector3d> marker_pos;
  for (const auto& [id, z] : body.markers) marker_pos[id] = g.world(marker_voxel(g, z));
  const double c1 = marker_pos[structure::kC1][2];
  const double c7 = marker_pos[structure::kC7][2];
  HeightBreakdown& h = t.height;
  h.left_mm = body.pelvis;
  h.right_mm = body.pelvis;
  h.lower_body_mm = body.pelvis;
  h.torso_mm = c7 - body.pelvis;
  h.neck_mm = c1 - c7;
  h.head_mm = body.crown - c1;
  h.total_mm = body.crown;
  t.landmarks["C1"] = marker_pos[structure::kC1];
  t.landmarks["C2"] = marker_pos[structure::kC2];
  t.landmarks["C7"] = marker_pos[structure::kC7];
  t.landmarks["pelvis"] = {0.0, 0.0, body.pelvis};
  t.landmarks["knee_left"] = {-body.leg_x, 0.0, body.knee};
  t.landmarks["knee_right"] = {body.leg_x, 0.0, body.knee};
  t.landmarks["crown"] = {0.0, 0.0, body.crown};
  return ph;
}

}  // namespace vct
