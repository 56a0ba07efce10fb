#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vct/cohort.hpp"
#include "vct/composition.hpp"
#include "vct/forest.hpp"
#include "vct/stats.hpp"

namespace vct {

enum class Task { kBfp, kMmp };

std::string to_string(Task t);
Task parse_task(const std::string& s);

/// Ground-truth target of a task: fat_pct for BFP, muscle_pct for MMP.
double task_target(const CompositionReport& r, Task task);

/// Named scalar of a report: body_volume, body_mass, fat_pct, muscle_pct, bone_density.
double report_feature(const CompositionReport& r, const std::string& name);

/// One measured subject as the trial sees it.
struct SubjectRecord {
  std::string id;
  Attributes attributes;
  CompositionReport report;
};

enum class BoundarySide { kAbove, kBelow };

std::string to_string(BoundarySide s);
BoundarySide parse_boundary_side(const std::string& s);

/// Line y = slope * x + intercept in (x_feature, y_feature) space. A point is
/// above when y > slope * x + intercept, below otherwise.
struct BiasBoundary {
  std::string x_feature = "body_volume";
  std::string y_feature = "muscle_pct";
  double slope = -0.16;
  double intercept = 49.2;
  BoundarySide id_side = BoundarySide::kBelow;

  void validate() const;
  BoundarySide side_of(const CompositionReport& r) const;
  bool in_id(const CompositionReport& r) const { return side_of(r) == id_side; }
  BoundarySide ood_side() const {
    return id_side == BoundarySide::kAbove ? BoundarySide::kBelow : BoundarySide::kAbove;
  }

  /// Defaults per task: the BFP split cuts muscle_pct against body volume, the
  /// MMP split cuts fat_pct against body volume.
  static BiasBoundary defaults(Task task);
};

struct SplitCounts {
  int train = 175;
  int id = 60;
  int ood = 60;
};

struct BiasedSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> id_test;
  std::vector<std::size_t> ood_test;
  std::size_t id_side_count = 0;
  std::size_t ood_side_count = 0;
  double train_pearson = 0.0;  // Pearson(x_feature, task target) on train
};

/// Shuffles each side with the seed, then takes train and ID test from the ID
/// side and OOD test from the other. Throws InvalidArgument when a side is short.
BiasedSplit build_biased_split(std::span<const SubjectRecord> cohort, const BiasBoundary& boundary, Task task,
                               const SplitCounts& counts, std::uint64_t seed);

/// Indices of the subjects on `side`, in input order. Warns when empty.
std::vector<std::size_t> rebias(std::span<const SubjectRecord> subjects, const BiasBoundary& boundary,
                                BoundarySide side);

struct GenerationRequest {
  AttributeBins bins;
  std::uint64_t seed = 0;
  std::size_t source = 0;  // index of the subject whose attributes are repeated
};

/// Repeats every attribute tuple `factor` times. Request k gets
/// stream_seed(seed, k).
std::vector<GenerationRequest> oversample_attributes(std::span<const AttributeBins> attrs, int factor,
                                                     std::uint64_t seed);

/// Generates and measures one synthetic subject for a request.
SubjectRecord synthesize_subject(const GenerationRequest& req, const AttributeDistribution& dist,
                                 const Eigen::Vector3d& spacing, const std::string& id,
                                 const DensityConfig& density = {});

/// Forest encoding of an attribute tuple: sex one-hot, age/height/weight bin
/// midpoints (0 when missing) and one missing-indicator per binned attribute.
std::vector<double> encode_attributes(const AttributeBins& a);
const std::vector<std::string>& attribute_feature_names();

struct OodClassifier {
  Forest forest;
  double holdout_accuracy = 0.0;
};

/// Stratified 80/20 holdout for the accuracy, then a refit on every row.
OodClassifier fit_ood_classifier(std::span<const AttributeBins> id_attrs, std::span<const AttributeBins> ood_attrs,
                                 ForestParams params);

struct WeightedEstimate {
  double mae = 0.0;
  Interval ci;
  std::vector<double> weights;
};

WeightedEstimate weighted_degradation_estimate(std::span<const double> id_errors,
                                               std::span<const AttributeBins> id_attrs, const Forest& classifier,
                                               double prior_id, double prior_ood, const BootstrapOptions& boot);

enum class PredictorKind { kShortcutLinear, kOracleNoise, kExternal };

std::string to_string(PredictorKind k);
PredictorKind parse_predictor_kind(const std::string& s);

struct PredictorSpec {
  PredictorKind kind = PredictorKind::kShortcutLinear;
  double sigma = 0.5;                          // oracle_noise
  std::uint64_t seed = 0;                      // oracle_noise
  std::map<std::string, double> predictions;  // external, by subject id
};

/// Stand-in for the downstream model.
class Predictor {
 public:
  explicit Predictor(PredictorSpec spec) : spec_(std::move(spec)) {}

  /// shortcut_linear: least squares of the target on body volume.
  void fit(std::span<const SubjectRecord> train, Task task);
  double predict(const SubjectRecord& s) const;

  bool trained() const { return trained_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  PredictorSpec spec_;
  Task task_ = Task::kBfp;
  bool trained_ = false;
  double alpha_ = 0.0;
  double beta_ = 0.0;
};

enum class Verdict { kAcceptable, kIndeterminate, kDegraded };

std::string to_string(Verdict v);

/// acceptable below 2, degraded above 3, indeterminate in between.
Verdict verdict_for(double mae);

struct TrialRow {
  std::string population;  // "ID" | "OOD"
  std::string attr_dist;
  std::string sample_type;  // real | real_weighted | synthetic | synthetic_rebias
  std::size_t n = 0;
  std::optional<double> mae;
  std::optional<Interval> mae_ci;
  std::optional<double> z_vs_real;
  std::optional<Interval> z_ci;
  std::optional<double> p_value;
  std::optional<Verdict> verdict;
};

/// Error samples of one sample type: features in attribution order and |error|.
struct ErrorSamples {
  std::string sample_type;
  Eigen::MatrixXd features;
  Eigen::VectorXd abs_error;
};

struct AttributionType {
  std::string sample_type;
  std::size_t n = 0;
  std::vector<std::optional<double>> corr;  // Pearson(feature, |error|), per kept feature
  std::vector<double> importance;           // random-forest importances, sum 1
  double rf_mae = 0.0;                      // holdout MAE of the error regressor
  std::optional<double> importance_corr;    // Pearson with the first type's importances
};

struct Attribution {
  std::vector<std::string> features;  // kept features
  std::vector<std::string> dropped;   // constant columns
  std::vector<AttributionType> types;
  std::vector<std::optional<double>> corr_p;  // first vs second type, Fisher z, per feature
};

/// The eight attribution features: sex, age, height, weight, body fat %,
/// bone density, muscle mass %, body volume.
const std::vector<std::string>& attribution_feature_names();
std::vector<double> attribution_features(const SubjectRecord& s);

/// Needs at least 30 rows per sample type. Constant columns (in any type) are
/// dropped with a warning.
Attribution attribute_errors(const std::vector<std::string>& names, std::span<const ErrorSamples> sets,
                             const ForestParams& params);

struct TrialConfig {
  Task task = Task::kBfp;
  BiasBoundary boundary;
  SplitCounts counts;
  int oversample_factor = 2;
  PredictorSpec predictor;
  std::uint64_t seed = 7;
  BootstrapOptions bootstrap;
  AttributeDistribution dist;
  Eigen::Vector3d synthetic_spacing_mm{4.0, 4.0, 4.0};
  DensityConfig density;
  int threads = 1;

  void validate() const;
};

struct TrialReport {
  Task task = Task::kBfp;
  BiasBoundary boundary;
  SplitCounts counts;
  double train_pearson = 0.0;
  std::size_t id_side_count = 0;
  std::size_t ood_side_count = 0;
  double classifier_accuracy = 0.0;
  double shortcut_alpha = 0.0;
  double shortcut_beta = 0.0;
  std::vector<TrialRow> rows;
  Attribution attribution;

  /// Row lookup; throws InvalidArgument when absent.
  const TrialRow& row(const std::string& population, const std::string& sample_type) const;
};

/// Split, fit the predictor on train, score real and synthetic test sets,
/// estimate the weighted baseline and attribute the errors.
TrialReport run_trial(std::span<const SubjectRecord> cohort, const TrialConfig& cfg);

}  // namespace vct
