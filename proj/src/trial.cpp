#include "vct/trial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vct/log.hpp"
#include "vct/parallel.hpp"

namespace vct {
namespace {

constexpr std::size_t kMinAttributionRows = 30;

// Sub-stream indices of the trial seed.
enum Stream : std::uint64_t {
  kSplitStream = 1,
  kSynthIdStream = 2,
  kSynthOodStream = 3,
  kClassifierStream = 4,
  kBootstrapStream = 5,
  kAttributionStream = 6,
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> column(std::span<const SubjectRecord> s, std::span<const std::size_t> idx,
                           const std::function<double(const SubjectRecord&)>& f) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(f(s[i]));
  return out;
}

std::vector<double> abs_errors(std::span<const SubjectRecord> s, const Predictor& p, Task task) {
  std::vector<double> e;
  e.reserve(s.size());
  for (const SubjectRecord& r : s) e.push_back(std::abs(task_target(r.report, task) - p.predict(r)));
  return e;
}

template <typename T>
std::vector<T> pick(std::span<const T> v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

BootstrapOptions boot_stream(const BootstrapOptions& base, std::uint64_t seed, std::uint64_t index) {
  BootstrapOptions b = base;
  b.seed = stream_seed(stream_seed(seed, kBootstrapStream), index);
  return b;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

bool constant(const Eigen::VectorXd& v) { return v.size() == 0 || (v.array() == v[0]).all(); }

}  // namespace

std::string to_string(Task t) { return t == Task::kBfp ? "bfp" : "mmp"; }

Task parse_task(const std::string& s) {
  if (s == "bfp") return Task::kBfp;
  if (s == "mmp") return Task::kMmp;
  throw InvalidArgument("unknown task '" + s + "' (expected bfp or mmp)");
}

double task_target(const CompositionReport& r, Task task) { return task == Task::kBfp ? r.fat_pct : r.muscle_pct; }

double report_feature(const CompositionReport& r, const std::string& name) {
  if (name == "body_volume") return r.body_volume_l;
  if (name == "body_mass") return r.body_mass_kg;
  if (name == "fat_pct") return r.fat_pct;
  if (name == "muscle_pct") return r.muscle_pct;
  if (name == "bone_density") {
    if (!r.bone_density_hu) throw DegenerateInput("bone density is missing");
    return *r.bone_density_hu;
  }
  throw InvalidArgument("unknown report feature '" + name + "'");
}

std::string to_string(BoundarySide s) { return s == BoundarySide::kAbove ? "above" : "below"; }

BoundarySide parse_boundary_side(const std::string& s) {
  if (s == "above") return BoundarySide::kAbove;
  if (s == "below") return BoundarySide::kBelow;
  throw InvalidArgument("unknown boundary side '" + s + "' (expected above or below)");
}

void BiasBoundary::validate() const {
  if (!std::isfinite(slope) || !std::isfinite(intercept)) throw InvalidArgument("boundary must be finite");
  const CompositionReport probe;
  report_feature(probe, x_feature);
  report_feature(probe, y_feature);
}

BoundarySide BiasBoundary::side_of(const CompositionReport& r) const {
  const double x = report_feature(r, x_feature);
  const double y = report_feature(r, y_feature);
  return y > slope * x + intercept ? BoundarySide::kAbove : BoundarySide::kBelow;
}

BiasBoundary BiasBoundary::defaults(Task task) {
  BiasBoundary b;
  if (task == Task::kMmp) {
    b.y_feature = "fat_pct";
    b.slope = 0.35;
    b.intercept = 2.0;
    b.id_side = BoundarySide::kAbove;
  }
  return b;
}

BiasedSplit build_biased_split(std::span<const SubjectRecord> cohort, const BiasBoundary& boundary, Task task,
                               const SplitCounts& counts, std::uint64_t seed) {
  boundary.validate();
  if (counts.train < 3 || counts.id < 1 || counts.ood < 1) {
    throw InvalidArgument("split counts must be train >= 3, id >= 1, ood >= 1");
  }
  std::vector<std::size_t> id_side, ood_side;
  for (std::size_t i = 0; i < cohort.size(); ++i) (boundary.in_id(cohort[i].report) ? id_side : ood_side).push_back(i);
  const auto need_id = static_cast<std::size_t>(counts.train + counts.id);
  const auto need_ood = static_cast<std::size_t>(counts.ood);
  if (id_side.size() < need_id) {
    throw InvalidArgument("ID side has " + std::to_string(id_side.size()) + " subjects, split needs " +
                          std::to_string(need_id));
  }
  if (ood_side.size() < need_ood) {
    throw InvalidArgument("OOD side has " + std::to_string(ood_side.size()) + " subjects, split needs " +
                          std::to_string(need_ood));
  }
  BiasedSplit s;
  s.id_side_count = id_side.size();
  s.ood_side_count = ood_side.size();
  SplitMix64 rng(seed);
  rng.shuffle(std::span<std::size_t>(id_side));
  rng.shuffle(std::span<std::size_t>(ood_side));
  s.train.assign(id_side.begin(), id_side.begin() + counts.train);
  s.id_test.assign(id_side.begin() + counts.train, id_side.begin() + static_cast<std::ptrdiff_t>(need_id));
  s.ood_test.assign(ood_side.begin(), ood_side.begin() + counts.ood);
  const auto x = column(cohort, s.train, [&](const SubjectRecord& r) { return report_feature(r.report, boundary.x_feature); });
  const auto y = column(cohort, s.train, [&](const SubjectRecord& r) { return task_target(r.report, task); });
  s.train_pearson = pearson(x, y);
  return s;
}

std::vector<std::size_t> rebias(std::span<const SubjectRecord> subjects, const BiasBoundary& boundary,
                                BoundarySide side) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    if (boundary.side_of(subjects[i].report) == side) kept.push_back(i);
  }
  if (kept.empty()) warn("re-biasing kept no subjects on the " + to_string(side) + " side");
  return kept;
}

std::vector<GenerationRequest> oversample_attributes(std::span<const AttributeBins> attrs, int factor,
                                                     std::uint64_t seed) {
  if (factor < 1) throw InvalidArgument("oversample factor must be at least 1");
  std::vector<GenerationRequest> out;
  out.reserve(attrs.size() * static_cast<std::size_t>(factor));
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    for (int r = 0; r < factor; ++r) {
      out.push_back({attrs[i], stream_seed(seed, out.size()), i});
    }
  }
  return out;
}

SubjectRecord synthesize_subject(const GenerationRequest& req, const AttributeDistribution& dist,
                                 const Eigen::Vector3d& spacing, const std::string& id, const DensityConfig& density) {
  SplitMix64 rng(req.seed);
  auto draw = [&](SplitMix64& r) { return sample_within_bins(req.bins, dist, r); };
  GeneratedSubject g = generate_with_retry(draw, spacing, rng);
  SubjectRecord s;
  s.id = id;
  s.attributes = g.attributes;
  s.report = measure_composition(g.phantom.image, g.phantom.tissue, density);
  return s;
}

const std::vector<std::string>& attribute_feature_names() {
  static const std::vector<std::string> names = {"sex_M",    "sex_F",       "age",         "height",
                                                 "weight",   "age_none",    "height_none", "weight_none"};
  return names;
}

std::vector<double> encode_attributes(const AttributeBins& a) {
  const auto age = bin_midpoint(a.age);
  const auto height = bin_midpoint(a.height);
  const auto weight = bin_midpoint(a.weight);
  return {a.sex == "M" ? 1.0 : 0.0,   a.sex == "F" ? 1.0 : 0.0,    age.value_or(0.0),
          height.value_or(0.0),       weight.value_or(0.0),        age ? 0.0 : 1.0,
          height ? 0.0 : 1.0,         weight ? 0.0 : 1.0};
}

OodClassifier fit_ood_classifier(std::span<const AttributeBins> id_attrs, std::span<const AttributeBins> ood_attrs,
                                 ForestParams params) {
  if (id_attrs.empty() || ood_attrs.empty()) throw InvalidArgument("OOD classifier needs both ID and OOD subjects");
  const std::size_t n = id_attrs.size() + ood_attrs.size();
  const std::size_t p = attribute_feature_names().size();
  std::vector<std::vector<double>> rows;
  rows.reserve(n);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (const auto& a : id_attrs) {
    y[static_cast<Eigen::Index>(rows.size())] = 0.0;
    rows.push_back(encode_attributes(a));
  }
  for (const auto& a : ood_attrs) {
    y[static_cast<Eigen::Index>(rows.size())] = 1.0;
    rows.push_back(encode_attributes(a));
  }
  const Eigen::MatrixXd X = to_matrix(rows, p);

  // Stratified holdout: 20% of each class, chosen by a seeded shuffle.
  SplitMix64 rng(stream_seed(params.seed, 0));
  std::vector<bool> held(n, false);
  std::size_t offset = 0;
  for (std::size_t count : {id_attrs.size(), ood_attrs.size()}) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), offset);
    rng.shuffle(std::span<std::size_t>(idx));
    const auto n_test = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(count)));
    for (std::size_t k = 0; k < n_test; ++k) held[idx[k]] = true;
    offset += count;
  }
  std::vector<Eigen::Index> train_rows, test_rows;
  for (std::size_t i = 0; i < n; ++i) (held[i] ? test_rows : train_rows).push_back(static_cast<Eigen::Index>(i));

  OodClassifier out;
  const auto min_rows = static_cast<std::size_t>(2 * params.min_samples_leaf);
  if (!test_rows.empty() && train_rows.size() >= min_rows) {
    const Forest holdout =
        Forest::fit(X(train_rows, Eigen::all), y(train_rows), ForestKind::kClassifier, params, attribute_feature_names());
    std::size_t correct = 0;
    for (Eigen::Index i : test_rows) {
      const bool pred_ood = holdout.predict_proba(Eigen::VectorXd(X.row(i).transpose())) >= 0.5;
      if (pred_ood == (y[i] == 1.0)) ++correct;
    }
    out.holdout_accuracy = static_cast<double>(correct) / static_cast<double>(test_rows.size());
  } else {
    warn("too few subjects for a classifier holdout; accuracy reported as 0");
  }
  out.forest = Forest::fit(X, y, ForestKind::kClassifier, params, attribute_feature_names());
  return out;
}

WeightedEstimate weighted_degradation_estimate(std::span<const double> id_errors,
                                               std::span<const AttributeBins> id_attrs, const Forest& classifier,
                                               double prior_id, double prior_ood, const BootstrapOptions& boot) {
  if (id_errors.size() != id_attrs.size()) throw InvalidArgument("errors and attributes differ in length");
  std::vector<double> p_ood;
  p_ood.reserve(id_attrs.size());
  for (const auto& a : id_attrs) p_ood.push_back(classifier.predict_proba(std::span<const double>(encode_attributes(a))));
  WeightedEstimate out;
  out.weights = importance_weights(p_ood, prior_id, prior_ood);
  out.mae = weighted_mae(id_errors, out.weights);
  out.ci = bootstrap_weighted_mae_ci(id_errors, out.weights, boot);
  return out;
}

std::string to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::kShortcutLinear:
      return "shortcut_linear";
    case PredictorKind::kOracleNoise:
      return "oracle_noise";
    case PredictorKind::kExternal:
      return "external";
  }
  return "?";
}

PredictorKind parse_predictor_kind(const std::string& s) {
  if (s == "shortcut_linear") return PredictorKind::kShortcutLinear;
  if (s == "oracle_noise") return PredictorKind::kOracleNoise;
  if (s == "external") return PredictorKind::kExternal;
  throw InvalidArgument("unknown predictor '" + s + "'");
}

void Predictor::fit(std::span<const SubjectRecord> train, Task task) {
  task_ = task;
  if (spec_.kind == PredictorKind::kShortcutLinear) {
    if (train.size() < 2) throw InvalidArgument("shortcut predictor needs at least 2 training subjects");
    std::vector<double> x, y;
    for (const auto& s : train) {
      x.push_back(s.report.body_volume_l);
      y.push_back(task_target(s.report, task));
    }
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw DegenerateInput("body volume is constant on the training split");
    alpha_ = sxy / sxx;
    beta_ = my - alpha_ * mx;
  } else if (spec_.kind == PredictorKind::kOracleNoise) {
    if (!(spec_.sigma >= 0.0)) throw InvalidArgument("oracle noise sigma must be >= 0");
  }
  trained_ = true;
}

double Predictor::predict(const SubjectRecord& s) const {
  if (!trained_) throw InvalidArgument("predictor used before fit");
  switch (spec_.kind) {
    case PredictorKind::kShortcutLinear:
      return alpha_ * s.report.body_volume_l + beta_;
    case PredictorKind::kOracleNoise: {
      SplitMix64 rng(stream_seed(spec_.seed, fnv1a(s.id)));
      return task_target(s.report, task_) + rng.normal(0.0, spec_.sigma);
    }
    case PredictorKind::kExternal: {
      const auto it = spec_.predictions.find(s.id);
      if (it == spec_.predictions.end()) throw InvalidArgument("no external prediction for subject " + s.id);
      return it->second;
    }
  }
  return 0.0;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kAcceptable:
      return "acceptable";
    case Verdict::kIndeterminate:
      return "indeterminate";
    case Verdict::kDegraded:
      return "degraded";
  }
  return "?";
}

Verdict verdict_for(double mae) {
  if (mae < 2.0) return Verdict::kAcceptable;
  if (mae > 3.0) return Verdict::kDegraded;
  return Verdict::kIndeterminate;
}

const std::vector<std::string>& attribution_feature_names() {
  static const std::vector<std::string> names = {"sex",     "age",          "height",     "weight",
                                                 "fat_pct", "bone_density", "muscle_pct", "body_volume"};
  return names;
}

std::vector<double> attribution_features(const SubjectRecord& s) {
  const AttributeBins b = bin_attributes(s.attributes);
  const double sex = b.sex == "M" ? 1.0 : (b.sex == "F" ? 0.0 : 0.5);
  return {sex,
          bin_midpoint(b.age).value_or(0.0),
          bin_midpoint(b.height).value_or(0.0),
          bin_midpoint(b.weight).value_or(0.0),
          s.report.fat_pct,
          s.report.bone_density_hu.value_or(0.0),
          s.report.muscle_pct,
          s.report.body_volume_l};
}

Attribution attribute_errors(const std::vector<std::string>& names, std::span<const ErrorSamples> sets,
                             const ForestParams& params) {
  if (sets.empty()) throw InvalidArgument("attribution needs at least one sample type");
  for (const auto& s : sets) {
    if (s.features.cols() != static_cast<Eigen::Index>(names.size()) || s.features.rows() != s.abs_error.size()) {
      throw InvalidArgument("attribution features do not match names or errors for " + s.sample_type);
    }
    if (static_cast<std::size_t>(s.abs_error.size()) < kMinAttributionRows) {
      throw InvalidArgument("attribution needs at least 30 subjects per sample type; " + s.sample_type + " has " +
                            std::to_string(s.abs_error.size()));
    }
  }
  Attribution out;
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    const bool flat = std::any_of(sets.begin(), sets.end(), [&](const ErrorSamples& s) {
      return constant(s.features.col(c));
    });
    if (flat) {
      warn("attribution feature '" + names[j] + "' is constant and was dropped");
      out.dropped.push_back(names[j]);
    } else {
      keep.push_back(c);
      out.features.push_back(names[j]);
    }
  }
  if (keep.empty()) throw DegenerateInput("every attribution feature is constant");

  for (std::size_t t = 0; t < sets.size(); ++t) {
    const ErrorSamples& s = sets[t];
    const Eigen::MatrixXd X = s.features(Eigen::all, keep);
    const Eigen::VectorXd& e = s.abs_error;
    AttributionType a;
    a.sample_type = s.sample_type;
    a.n = static_cast<std::size_t>(e.size());
    const bool flat_error = constant(e);
    if (flat_error) warn("absolute errors of " + s.sample_type + " are constant; correlations omitted");
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (flat_error) {
        a.corr.emplace_back();
        continue;
      }
      const Eigen::VectorXd col = X.col(j);
      a.corr.emplace_back(pearson(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                                  std::span<const double>(e.data(), static_cast<std::size_t>(e.size()))));
    }

    // Holdout MAE of the error regressor on a seeded 20% split, importances
    // from a refit on every row.
    ForestParams p = params;
    p.seed = stream_seed(params.seed, t);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(e.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    SplitMix64 rng(stream_seed(p.seed, 0));
    rng.shuffle(std::span<Eigen::Index>(order));
    const auto n_test = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(order.size())));
    std::vector<Eigen::Index> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<Eigen::Index> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    const Forest holdout = Forest::fit(X(train, Eigen::all), e(train), ForestKind::kRegressor, p, out.features);
    double abs_sum = 0.0;
    for (Eigen::Index i : test) abs_sum += std::abs(holdout.predict(Eigen::VectorXd(X.row(i).transpose())) - e[i]);
    a.rf_mae = test.empty() ? 0.0 : abs_sum / static_cast<double>(test.size());
    a.importance = Forest::fit(X, e, ForestKind::kRegressor, p, out.features).feature_importance();
    out.types.push_back(std::move(a));
  }

  const auto& first = out.types.front().importance;
  for (auto& a : out.types) {
    if (constant(Eigen::Map<const Eigen::VectorXd>(first.data(), static_cast<Eigen::Index>(first.size()))) ||
        constant(Eigen::Map<const Eigen::VectorXd>(a.importance.data(), static_cast<Eigen::Index>(a.importance.size())))) {
      warn("importance vector of " + a.sample_type + " is constant; correlation omitted");
      continue;
    }
    a.importance_corr = pearson(first, a.importance);
  }
  if (out.types.size() >= 2) {
    const auto& r = out.types[0];
    const auto& s = out.types[1];
    for (std::size_t j = 0; j < out.features.size(); ++j) {
      if (r.corr[j] && s.corr[j]) {
        out.corr_p.emplace_back(fisher_z_p(*r.corr[j], r.n, *s.corr[j], s.n));
      } else {
        out.corr_p.emplace_back();
      }
    }
  }
  return out;
}

void TrialConfig::validate() const {
  boundary.validate();
  if (oversample_factor < 1) throw InvalidArgument("oversample_factor must be at least 1");
  if (bootstrap.n_boot < 1 || !(bootstrap.level > 0.0 && bootstrap.level < 1.0)) {
    throw InvalidArgument("bootstrap needs n_boot >= 1 and level in (0, 1)");
  }
  dist.validate();
  density.validate();
  for (int i = 0; i < 3; ++i) {
    if (!(synthetic_spacing_mm[i] > 0.0)) throw InvalidArgument("synthetic spacing must be positive");
  }
}

const TrialRow& TrialReport::row(const std::string& population, const std::string& sample_type) const {
  for (const auto& r : rows) {
    if (r.population == population && r.sample_type == sample_type) return r;
  }
  throw InvalidArgument("no trial row " + population + "/" + sample_type);
}

TrialReport run_trial(std::span<const SubjectRecord> cohort, const TrialConfig& cfg) {
  cfg.validate();
  const BiasedSplit split =
      build_biased_split(cohort, cfg.boundary, cfg.task, cfg.counts, stream_seed(cfg.seed, kSplitStream));

  TrialReport rep;
  rep.task = cfg.task;
  rep.boundary = cfg.boundary;
  rep.counts = cfg.counts;
  rep.train_pearson = split.train_pearson;
  rep.id_side_count = split.id_side_count;
  rep.ood_side_count = split.ood_side_count;

  const auto train = pick(cohort, split.train);
  Predictor predictor(cfg.predictor);
  predictor.fit(train, cfg.task);
  rep.shortcut_alpha = predictor.alpha();
  rep.shortcut_beta = predictor.beta();

  const auto real_id = pick(cohort, split.id_test);
  const auto real_ood = pick(cohort, split.ood_test);
  const auto e_real_id = abs_errors(real_id, predictor, cfg.task);
  const auto e_real_ood = abs_errors(real_ood, predictor, cfg.task);

  auto bins_of = [](const std::vector<SubjectRecord>& v) {
    std::vector<AttributeBins> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(bin_attributes(s.attributes));
    return out;
  };
  const auto bins_id = bins_of(real_id);
  const auto bins_ood = bins_of(real_ood);

  auto synthesize = [&](const std::vector<AttributeBins>& bins, std::uint64_t stream, const std::string& prefix) {
    const auto req = oversample_attributes(bins, cfg.oversample_factor, stream_seed(cfg.seed, stream));
    std::vector<SubjectRecord> out(req.size());
    parallel_for(req.size(), cfg.threads, [&](std::size_t i) {
      out[i] = synthesize_subject(req[i], cfg.dist, cfg.synthetic_spacing_mm, subject_id(prefix, i), cfg.density);
    });
    return out;
  };
  const auto syn_id = synthesize(bins_id, kSynthIdStream, "SYN-ID-");
  const auto syn_ood = synthesize(bins_ood, kSynthOodStream, "SYN-OOD-");
  const auto e_syn_id = abs_errors(syn_id, predictor, cfg.task);
  const auto e_syn_ood = abs_errors(syn_ood, predictor, cfg.task);
  const auto e_reb_id = pick<double>(e_syn_id, rebias(syn_id, cfg.boundary, cfg.boundary.id_side));
  const auto e_reb_ood = pick<double>(e_syn_ood, rebias(syn_ood, cfg.boundary, cfg.boundary.ood_side()));

  ForestParams cls = ForestParams::classifier_defaults();
  cls.seed = stream_seed(cfg.seed, kClassifierStream);
  cls.threads = cfg.threads;
  const OodClassifier classifier = fit_ood_classifier(bins_id, bins_ood, cls);
  rep.classifier_accuracy = classifier.holdout_accuracy;
  const double total = static_cast<double>(split.id_side_count + split.ood_side_count);
  std::uint64_t boot_index = 0;
  const WeightedEstimate weighted = weighted_degradation_estimate(
      e_real_id, bins_id, classifier.forest, static_cast<double>(split.id_side_count) / total,
      static_cast<double>(split.ood_side_count) / total, boot_stream(cfg.bootstrap, cfg.seed, boot_index++));

  auto base_row = [&](const std::string& pop, const std::string& dist, const std::string& type,
                      const std::vector<double>& e) {
    TrialRow r;
    r.population = pop;
    r.attr_dist = dist;
    r.sample_type = type;
    r.n = e.size();
    if (e.empty()) {
      warn("trial row " + pop + "/" + type + " has no subjects");
      return r;
    }
    r.mae = mae(e);
    r.verdict = verdict_for(*r.mae);
    if (e.size() >= 2) {
      r.mae_ci = bootstrap_ci(e, Statistic::kMean, boot_stream(cfg.bootstrap, cfg.seed, boot_index++));
    }
    return r;
  };
  auto compare_row = [&](TrialRow r, const std::vector<double>& e, const std::vector<double>& real) {
    if (e.size() < 2 || real.size() < 2) return r;
    const double z = z_score(e, real);
    r.z_vs_real = z;
    r.z_ci = bootstrap_z_ci(e, real, boot_stream(cfg.bootstrap, cfg.seed, boot_index++));
    r.p_value = z_test_p(z);
    return r;
  };
  for (const auto& [pop, real, syn, reb] :
       {std::tuple{"ID", &e_real_id, &e_syn_id, &e_reb_id}, std::tuple{"OOD", &e_real_ood, &e_syn_ood, &e_reb_ood}}) {
    TrialRow real_row = base_row(pop, pop, "real", *real);
    real_row.z_vs_real = 0.0;
    real_row.z_ci = Interval{0.0, 0.0};
    real_row.p_value = 1.0;
    rep.rows.push_back(real_row);
    if (std::string(pop) == "OOD") {
      TrialRow w;
      w.population = "OOD";
      w.attr_dist = "ID";
      w.sample_type = "real_weighted";
      w.n = e_real_id.size();
      w.mae = weighted.mae;
      w.mae_ci = weighted.ci;
      w.verdict = verdict_for(weighted.mae);
      rep.rows.push_back(w);
    }
    rep.rows.push_back(compare_row(base_row(pop, pop, "synthetic", *syn), *syn, *real));
    rep.rows.push_back(compare_row(base_row(pop, pop, "synthetic_rebias", *reb), *reb, *real));
  }

  std::vector<std::vector<double>> real_rows, syn_rows;
  std::vector<double> real_err, syn_err;
  for (std::size_t i = 0; i < real_id.size(); ++i) {
    real_rows.push_back(attribution_features(real_id[i]));
    real_err.push_back(e_real_id[i]);
  }
  for (std::size_t i = 0; i < real_ood.size(); ++i) {
    real_rows.push_back(attribution_features(real_ood[i]));
    real_err.push_back(e_real_ood[i]);
  }
  for (std::size_t i = 0; i < syn_id.size(); ++i) {
    syn_rows.push_back(attribution_features(syn_id[i]));
    syn_err.push_back(e_syn_id[i]);
  }
  for (std::size_t i = 0; i < syn_ood.size(); ++i) {
    syn_rows.push_back(attribution_features(syn_ood[i]));
    syn_err.push_back(e_syn_ood[i]);
  }
  const auto& names = attribution_feature_names();
  const std::vector<ErrorSamples> sets = {
      {"real", to_matrix(real_rows, names.size()), Eigen::Map<const Eigen::VectorXd>(real_err.data(), static_cast<Eigen::Index>(real_err.size()))},
      {"synthetic", to_matrix(syn_rows, names.size()), Eigen::Map<const Eigen::VectorXd>(syn_err.data(), static_cast<Eigen::Index>(syn_err.size()))}};
  ForestParams reg = ForestParams::regressor_defaults();
  reg.seed = stream_seed(cfg.seed, kAttributionStream);
  reg.threads = cfg.threads;
  rep.attribution = attribute_errors(names, sets, reg);
  return rep;
}

}  // namespace vct
