#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vct/composition.hpp"
#include "vct/phantom.hpp"
#include "vct/rng.hpp"

namespace vct {

/// Raw patient attributes; an empty field is unavailable.
struct Attributes {
  std::optional<Sex> sex;
  std::optional<double> age_years;
  std::optional<double> height_cm;
  std::optional<double> weight_kg;
};

/// Categorical attribute tuple: sex "M" | "F" | "none", decade bins such as
/// "50-60" (half-open) or "none".
struct AttributeBins {
  std::string sex = "none";
  std::string age = "none";
  std::string height = "none";
  std::string weight = "none";

  bool operator==(const AttributeBins&) const = default;
};

std::string to_string(Sex s);
Sex parse_sex(const std::string& s);

/// "[k*10, (k+1)*10)" label for a raw value, "none" when missing.
std::string decade_bin(std::optional<double> value);

/// Bounds of a decade label; empty for "none". Throws InvalidArgument on malformed labels.
std::optional<std::pair<double, double>> bin_bounds(const std::string& label);

/// Midpoint of a decade label; empty for "none".
std::optional<double> bin_midpoint(const std::string& label);

AttributeBins bin_attributes(const Attributes& raw);

struct TruncatedNormal {
  double mean = 0.0;
  double sd = 1.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Attribute samplers for phantom cohorts. Height and weight are drawn
/// jointly with correlation `height_weight_corr`.
struct AttributeDistribution {
  double p_male = 0.5;
  TruncatedNormal age{50.0, 15.0, 20.0, 90.0};
  TruncatedNormal height_male{176.0, 7.0, 140.0, 210.0};
  TruncatedNormal height_female{163.0, 6.5, 140.0, 210.0};
  TruncatedNormal weight_male{82.0, 13.0, 40.0, 150.0};
  TruncatedNormal weight_female{68.0, 12.0, 40.0, 150.0};
  double height_weight_corr = 0.5;

  void validate() const;
};

/// Draws from a normal restricted to [lo, hi] by rejection.
double sample_truncated(const TruncatedNormal& d, SplitMix64& rng);

Attributes sample_attributes(const AttributeDistribution& dist, SplitMix64& rng);

/// Raw values drawn uniformly inside each bin; "none" falls back to `dist`.
Attributes sample_within_bins(const AttributeBins& bins, const AttributeDistribution& dist, SplitMix64& rng);

/// Fat and muscle fractions for a subject. Fat rises with weight and falls
/// with a latent fitness term that favours young and male subjects; muscle
/// moves against fat.
std::pair<double, double> sample_composition(const Attributes& a, SplitMix64& rng);

/// Complete phantom spec for an attribute tuple; the phantom seed and the
/// composition come from `rng`.
PhantomSpec spec_for(const Attributes& a, const Eigen::Vector3d& spacing, SplitMix64& rng);

struct GeneratedSubject {
  Attributes attributes;
  PhantomSpec spec;
  Phantom phantom;
};

/// Generates a phantom for attributes produced by `draw`, retrying
/// infeasible draws up to 100 times before throwing InvalidArgument.
GeneratedSubject generate_with_retry(const std::function<Attributes(SplitMix64&)>& draw,
                                     const Eigen::Vector3d& spacing, SplitMix64& rng);

struct Subject {
  std::string id;
  std::string image;  // paths relative to the manifest directory
  std::string tissue;
  std::string structure;
  Attributes attributes;
  std::string population = "unsplit";  // "ID" | "OOD" | "unsplit"
  PhantomSpec spec;
  PhantomTruth truth;
};

struct CohortManifest {
  std::vector<Subject> subjects;
  std::uint64_t seed = 0;
  Eigen::Vector3d spacing_mm{4.0, 4.0, 4.0};
};

struct CohortOptions {
  int n = 1;
  std::uint64_t seed = 0;
  Eigen::Vector3d spacing_mm{4.0, 4.0, 4.0};
  AttributeDistribution dist;
  int threads = 1;
  std::string id_prefix = "S";
};

/// Subject `index` of the cohort described by `opt`, drawn from
/// SplitMix64(subject_seed(opt.seed, index)). Nothing is written.
GeneratedSubject generate_subject(const CohortOptions& opt, std::size_t index);

/// Subject index i draws everything from SplitMix64(subject_seed(seed, i)), so
/// the result does not depend on the thread count. Writes three CTV pairs per
/// subject into `out_dir` and returns the manifest (not written).
CohortManifest generate_cohort(const CohortOptions& opt, const std::filesystem::path& out_dir);

std::string subject_id(const std::string& prefix, std::size_t index);

/// Loads a subject's image and tissue/structure maps and measures composition
/// and height.
CompositionReport measure_subject(const Subject& s, const std::filesystem::path& base, const DensityConfig& cfg = {});

}  // namespace vct
