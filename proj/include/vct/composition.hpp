#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "vct/skeleton.hpp"
#include "vct/volume.hpp"

namespace vct {

struct DensityConfig {
  double default_hu_rho = 0.0;
  std::map<int, double> hu_rho_per_tissue;  // overrides by tissue id
  double air_threshold_hu = -900.0;
  double air_floor_hu = -1000.0;

  double hu_rho(int tissue_id) const {
    const auto it = hu_rho_per_tissue.find(tissue_id);
    return it == hu_rho_per_tissue.end() ? default_hu_rho : it->second;
  }

  /// Throws InvalidArgument if any reference HU is <= -1000.
  void validate() const;
};

struct CompositionReport {
  double body_mass_kg = 0.0;
  double fat_pct = 0.0;
  double muscle_pct = 0.0;
  std::optional<double> bone_density_hu;  // empty when there are no bone voxels
  double body_volume_l = 0.0;
  std::map<std::string, double> per_tissue_mass_g;
  std::optional<HeightBreakdown> height;
};

struct LinearCalibration {
  double slope = 1.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

/// Voxels at or below the air threshold are set to the air floor.
Volume adjust_air_hu(const Volume& vol, const DensityConfig& cfg = {});

/// (hu + 1000) / (hu_rho + 1000), in g/cm^3.
double hu_to_density(double hu, double hu_rho = 0.0);

/// Mass in grams of the masked voxels using the uniform reference HU.
double region_mass_g(const Volume& vol, const Mask& mask, const DensityConfig& cfg = {});

/// Mass in grams of voxels whose tissue id is in `ids`, each using its own reference HU.
double region_mass_g(const Volume& vol, const LabelMap& tissue, std::span<const Label> ids,
                     const DensityConfig& cfg = {});

/// Body mass over all nonzero tissue voxels; fat and muscle as percentages of it.
CompositionReport measure_composition(const Volume& vol, const LabelMap& tissue, const DensityConfig& cfg = {});

LinearCalibration fit_linear_calibration(std::span<const double> measured, std::span<const double> reference);

double apply_calibration(const LinearCalibration& cal, double x);

}  // namespace vct
