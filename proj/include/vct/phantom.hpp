#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Core>

#include "vct/skeleton.hpp"
#include "vct/volume.hpp"

namespace vct {

enum class Sex { kMale, kFemale };

struct PhantomSpec {
  double height_mm = 1700.0;
  double weight_kg = 70.0;
  double fat_fraction = 0.25;
  double muscle_fraction = 0.35;
  Sex sex = Sex::kMale;
  double age_years = 40.0;
  Eigen::Vector3d spacing_mm{2.0, 2.0, 2.0};
  std::uint64_t seed = 0;
  /// Posterior rotation of both lower legs about the knee, degrees.
  double knee_flexion_deg = 0.0;

  void validate() const;
};

/// Ground truth obtained by counting the voxels the generator wrote.
struct PhantomTruth {
  double body_mass_g = 0.0;
  double fat_pct = 0.0;
  double muscle_pct = 0.0;
  double bone_density_hu = 0.0;
  double body_volume_mm3 = 0.0;
  HeightBreakdown height;
  std::map<std::string, Eigen::Vector3d> landmarks;  // world mm
  double girth_scale = 1.0;
};

struct Phantom {
  Volume image;
  LabelMap tissue;
  LabelMap structures;
  PhantomTruth truth;
};

/// bone_hu = 1100 - 5 * age, clamped to [400, 1200] and rounded.
double bone_hu_for_age(double age_years);

/// Builds an upright body along +z with the sole at z = 0 and the crown at
/// the spec height snapped to the slice grid. Girth is scaled to reach the
/// target weight; subcutaneous fat and muscle shells realize the fractions.
/// Throws InvalidArgument when the spec cannot be realized.
Phantom generate_phantom(const PhantomSpec& spec);

}  // namespace vct
