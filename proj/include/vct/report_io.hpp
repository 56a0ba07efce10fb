#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "vct/anatomy_metrics.hpp"
#include "vct/cohort.hpp"
#include "vct/composition.hpp"
#include "vct/patch.hpp"
#include "vct/trial.hpp"

namespace vct {

using nlohmann::json;

json to_json(const HeightBreakdown& h);
HeightBreakdown height_from_json(const json& j);

json to_json(const CompositionReport& r);
CompositionReport composition_from_json(const json& j);

json to_json(const Attributes& a);
Attributes attributes_from_json(const json& j);
json to_json(const AttributeBins& b);

json to_json(const PhantomSpec& s);
PhantomSpec phantom_spec_from_json(const json& j);
json to_json(const PhantomTruth& t);
PhantomTruth phantom_truth_from_json(const json& j);

json to_json(const CohortManifest& m);
CohortManifest manifest_from_json(const json& j);

/// Throws IoError when unreadable, FormatError on malformed content.
json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline. Throws IoError.
void write_json(const json& j, const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

CohortManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const CohortManifest& m, const std::filesystem::path& path);

/// Cohort measurement table with columns subject_id, body_mass_kg, fat_pct,
/// muscle_pct, bone_density_hu, body_volume_l, height_mm. Missing values are
/// empty cells. Numbers round-trip exactly.
std::string cohort_csv(const std::vector<std::pair<std::string, CompositionReport>>& rows);
std::map<std::string, CompositionReport> read_cohort_csv(const std::filesystem::path& path);

/// Columns class, dice_mean, dice_std, volume_corr, centroid_R, centroid_A,
/// centroid_S and a closing "Average" row.
std::string consistency_csv(const ConsistencyTable& t);

DensityConfig density_config_from_json(const json& j);
WindowLossConfig window_loss_config_from_json(const json& j);
AttributeDistribution attribute_distribution_from_json(const json& j);

/// Trial settings; unknown keys are rejected. Predictions for an external
/// predictor are loaded separately.
TrialConfig trial_config_from_json(const json& j);
json to_json(const TrialConfig& c);

/// subject_id,y_hat
std::map<std::string, double> read_predictions_csv(const std::filesystem::path& path);

json to_json(const TrialReport& r);
std::string zscore_table_csv(const TrialReport& r);
std::string bias_corr_csv(const TrialReport& r);
std::string feature_importance_csv(const TrialReport& r);

}  // namespace vct
