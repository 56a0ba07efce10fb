#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vct/volume.hpp"

namespace vct {

/// 2|A and B| / (|A| + |B|); 1 when both masks are empty.
double dice(const Mask& a, const Mask& b);

/// Dice per class id present in either map.
std::map<Label, double> per_class_dice(const LabelMap& a, const LabelMap& b);

/// Class centroids normalized per axis to the body's bounding box of voxel
/// centres (0 at the low face, 1 at the high face; 0.5 on a flat axis).
std::map<Label, Eigen::Vector3d> relative_centroids(const LabelMap& structures, const LabelMap& body);

/// Per-subject organ measurements feeding the cohort comparison.
struct SubjectAnatomy {
  std::map<Label, double> volume_ml;
  std::map<Label, Eigen::Vector3d> centroid;  // relative, in [0, 1]^3
};

SubjectAnatomy measure_anatomy(const LabelMap& structures, const LabelMap& body);

/// Pearson correlation of matched quantiles of two unpaired samples, using
/// min(n1, n2) evenly spaced type-7 quantiles.
double qq_correlation(std::span<const double> a, std::span<const double> b);

struct ConsistencyRow {
  Label id = 0;
  std::string name;
  std::optional<double> dice_mean;
  std::optional<double> dice_std;
  std::optional<double> volume_corr;
  std::optional<double> centroid_r;
  std::optional<double> centroid_a;
  std::optional<double> centroid_s;
};

struct ConsistencyTable {
  std::vector<ConsistencyRow> rows;
  ConsistencyRow average;

  /// Recomputes the footer: means over classes with defined values, and for
  /// dice_std the sample SD of the per-class dice means.
  void update_average();
};

/// Q-Q correlations of organ volumes and relative centroids between two
/// cohorts. Classes with fewer than 3 samples on either side are omitted
/// with a warning. `names` labels the rows.
ConsistencyTable cohort_consistency(std::span<const SubjectAnatomy> a, std::span<const SubjectAnatomy> b,
                                    const ClassTable& names);

/// Fills dice_mean / dice_std from per-pair per-class dice maps, adding rows
/// for classes that only have dice values.
void add_paired_dice(ConsistencyTable& table, std::span<const std::map<Label, double>> per_pair,
                     const ClassTable& names);

}  // namespace vct
