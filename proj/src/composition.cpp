#include "vct/composition.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vct/log.hpp"

namespace vct {
namespace {

void require_hu(const Volume& vol) {
  if (vol.unit() != Unit::kHU) throw InvalidArgument("expected a volume in HU");
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw InvalidArgument("volume and label map do not share a grid");
}

}  // namespace

void DensityConfig::validate() const {
  if (!(default_hu_rho > -1000.0)) throw InvalidArgument("reference HU must exceed -1000");
  for (const auto& [id, rho] : hu_rho_per_tissue) {
    if (!(rho > -1000.0)) throw InvalidArgument("reference HU for tissue " + std::to_string(id) + " must exceed -1000");
  }
  if (!std::isfinite(air_threshold_hu) || !std::isfinite(air_floor_hu)) {
    throw InvalidArgument("air threshold and floor must be finite");
  }
}

Volume adjust_air_hu(const Volume& vol, const DensityConfig& cfg) {
  require_hu(vol);
  Volume out = vol;
  const auto thr = static_cast<float>(cfg.air_threshold_hu);
  const auto floor = static_cast<float>(cfg.air_floor_hu);
  out.data() = (vol.data() <= thr).select(floor, vol.data());
  return out;
}

double hu_to_density(double hu, double hu_rho) {
  if (!(hu_rho > -1000.0)) throw InvalidArgument("reference HU must exceed -1000");
  return (hu + 1000.0) / (hu_rho + 1000.0);
}

double region_mass_g(const Volume& vol, const Mask& mask, const DensityConfig& cfg) {
  require_hu(vol);
  require_same_grid(vol.grid(), mask.grid());
  cfg.validate();
  const double denom = cfg.default_hu_rho + 1000.0;
  const double thr = cfg.air_threshold_hu;
  double sum = 0.0;
  const std::size_t n = vol.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    const double hu = vol[i] <= thr ? cfg.air_floor_hu : double{vol[i]};
    sum += (hu + 1000.0) / denom;
  }
  return sum * voxel_volume_mm3(vol.grid()) / 1000.0;
}

double region_mass_g(const Volume& vol, const LabelMap& tissue, std::span<const Label> ids, const DensityConfig& cfg) {
  require_hu(vol);
  require_same_grid(vol.grid(), tissue.grid());
  cfg.validate();
  std::vector<double> denom(65536, 0.0);
  for (Label id : ids) denom[id] = cfg.hu_rho(id) + 1000.0;
  const double thr = cfg.air_threshold_hu;
  double sum = 0.0;
  const std::size_t n = vol.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = denom[tissue[i]];
    if (d == 0.0) continue;
    const double hu = vol[i] <= thr ? cfg.air_floor_hu : double{vol[i]};
    sum += (hu + 1000.0) / d;
  }
  return sum * voxel_volume_mm3(vol.grid()) / 1000.0;
}

CompositionReport measure_composition(const Volume& vol, const LabelMap& tissue, const DensityConfig& cfg) {
  require_hu(vol);
  require_same_grid(vol.grid(), tissue.grid());
  if (tissue.kind() != LabelKind::kTissue) throw InvalidArgument("composition needs a tissue label map");
  cfg.validate();

  constexpr int kIds = 5;
  double denom[kIds];
  for (int id = 0; id < kIds; ++id) denom[id] = cfg.hu_rho(id) + 1000.0;
  const double thr = cfg.air_threshold_hu;

  double body = 0.0;
  double per[kIds] = {0, 0, 0, 0, 0};
  double bone_hu = 0.0;
  std::size_t bone_n = 0;
  std::size_t body_n = 0;
  const std::size_t n = vol.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Label t = tissue[i];
    if (t == 0) continue;
    if (t >= kIds) throw FormatError("tissue id " + std::to_string(t) + " outside 0..4");
    const double raw = vol[i];
    const double hu = raw <= thr ? cfg.air_floor_hu : raw;
    const double rho = (hu + 1000.0) / denom[t];
    body += rho;
    per[t] += rho;
    ++body_n;
    if (t == tissue::kBone) {
      bone_hu += raw;
      ++bone_n;
    }
  }
  if (body_n == 0 || !(body > 0.0)) throw DegenerateInput("empty body mask: composition is undefined");

  const double scale = voxel_volume_mm3(vol.grid()) / 1000.0;
  CompositionReport r;
  r.body_mass_kg = body * scale / 1000.0;
  r.fat_pct = 100.0 * per[tissue::kFat] / body;
  r.muscle_pct = 100.0 * per[tissue::kMuscle] / body;
  if (bone_n > 0) r.bone_density_hu = bone_hu / static_cast<double>(bone_n);
  r.body_volume_l = static_cast<double>(body_n) * voxel_volume_mm3(vol.grid()) / 1e6;
  const ClassTable& names = tissue.class_table();
  for (int id = 1; id < kIds; ++id) {
    const auto it = names.find(id);
    r.per_tissue_mass_g[it != names.end() ? it->second : std::to_string(id)] = per[id] * scale;
  }
  return r;
}

LinearCalibration fit_linear_calibration(std::span<const double> measured, std::span<const double> reference) {
  if (measured.size() != reference.size()) throw InvalidArgument("calibration inputs differ in length");
  if (measured.size() < 3) throw InvalidArgument("calibration needs at least 3 pairs");
  const double n = static_cast<double>(measured.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    if (!std::isfinite(measured[i]) || !std::isfinite(reference[i])) {
      throw InvalidArgument("calibration inputs must be finite");
    }
    mx += measured[i];
    my += reference[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double dx = measured[i] - mx;
    const double dy = reference[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw DegenerateInput("measured values have zero variance");
  LinearCalibration cal;
  cal.slope = sxy / sxx;
  cal.intercept = my - cal.slope * mx;
  if (syy > 0.0) {
    cal.r2 = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  } else {
    warn("reference values are constant; r2 set to 0");
    cal.slope = 0.0;
    cal.intercept = my;
    cal.r2 = 0.0;
  }
  return cal;
}

double apply_calibration(const LinearCalibration& cal, double x) {
  if (!std::isfinite(x)) throw InvalidArgument("calibration input must be finite");
  return cal.slope * x + cal.intercept;
}

}  // namespace vct
