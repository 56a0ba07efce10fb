#include "vct/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace vct {
namespace {

json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> num_or_null(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json vec3(const Eigen::Vector3d& v) { return json::array({v[0], v[1], v[2]}); }

Eigen::Vector3d vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json interval(const std::optional<Interval>& i) {
  return i ? json::array({i->lo, i->hi}) : json(nullptr);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw InvalidArgument("unknown key '" + item.key() + "' in " + where);
  }
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Exact round trip for data tables.
std::string exact(double v) { return fmt("%.17g", v); }
// Readable precision for report tables.
std::string short_num(double v) { return fmt("%.6g", v); }
std::string short_num(const std::optional<double>& v) { return v ? short_num(*v) : ""; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_csv_line(line) != header) throw FormatError("unexpected header in " + path.string());
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw FormatError("wrong cell count in " + path.string() + ": " + line);
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("bad number '" + s + "'");
  }
}

const std::vector<std::string> kCohortHeader = {"subject_id", "body_mass_kg",  "fat_pct",  "muscle_pct",
                                                "bone_density_hu", "body_volume_l", "height_mm"};

}  // namespace

json to_json(const HeightBreakdown& h) {
  return {{"lower_body_mm", h.lower_body_mm},
          {"torso_mm", h.torso_mm},
          {"neck_mm", h.neck_mm},
          {"head_mm", h.head_mm},
          {"total_mm", h.total_mm},
          {"per_leg", {{"left_mm", opt_num(h.left_mm)}, {"right_mm", opt_num(h.right_mm)}}}};
}

HeightBreakdown height_from_json(const json& j) {
  HeightBreakdown h;
  h.lower_body_mm = j.at("lower_body_mm").get<double>();
  h.torso_mm = j.at("torso_mm").get<double>();
  h.neck_mm = j.at("neck_mm").get<double>();
  h.head_mm = j.at("head_mm").get<double>();
  h.total_mm = j.at("total_mm").get<double>();
  if (j.contains("per_leg")) {
    h.left_mm = num_or_null(j.at("per_leg"), "left_mm");
    h.right_mm = num_or_null(j.at("per_leg"), "right_mm");
  }
  return h;
}

json to_json(const CompositionReport& r) {
  json j = {{"body_mass_kg", r.body_mass_kg},
            {"fat_pct", r.fat_pct},
            {"muscle_pct", r.muscle_pct},
            {"bone_density_hu", opt_num(r.bone_density_hu)},
            {"body_volume_l", r.body_volume_l},
            {"per_tissue_mass_g", r.per_tissue_mass_g}};
  j["height"] = r.height ? to_json(*r.height) : json(nullptr);
  return j;
}

CompositionReport composition_from_json(const json& j) {
  CompositionReport r;
  r.body_mass_kg = j.at("body_mass_kg").get<double>();
  r.fat_pct = j.at("fat_pct").get<double>();
  r.muscle_pct = j.at("muscle_pct").get<double>();
  r.bone_density_hu = num_or_null(j, "bone_density_hu");
  r.body_volume_l = j.at("body_volume_l").get<double>();
  if (j.contains("per_tissue_mass_g")) r.per_tissue_mass_g = j.at("per_tissue_mass_g").get<std::map<std::string, double>>();
  if (j.contains("height") && !j.at("height").is_null()) r.height = height_from_json(j.at("height"));
  return r;
}

json to_json(const Attributes& a) {
  return {{"sex", a.sex ? to_string(*a.sex) : "none"},
          {"age_years", opt_num(a.age_years)},
          {"height_cm", opt_num(a.height_cm)},
          {"weight_kg", opt_num(a.weight_kg)}};
}

Attributes attributes_from_json(const json& j) {
  Attributes a;
  const std::string sex = j.value("sex", "none");
  if (sex != "none") a.sex = parse_sex(sex);
  a.age_years = num_or_null(j, "age_years");
  a.height_cm = num_or_null(j, "height_cm");
  a.weight_kg = num_or_null(j, "weight_kg");
  return a;
}

json to_json(const AttributeBins& b) {
  return {{"sex", b.sex}, {"age", b.age}, {"height", b.height}, {"weight", b.weight}};
}

json to_json(const PhantomSpec& s) {
  return {{"height_mm", s.height_mm},
          {"weight_kg", s.weight_kg},
          {"fat_fraction", s.fat_fraction},
          {"muscle_fraction", s.muscle_fraction},
          {"sex", to_string(s.sex)},
          {"age_years", s.age_years},
          {"spacing_mm", vec3(s.spacing_mm)},
          {"seed", s.seed},
          {"knee_flexion_deg", s.knee_flexion_deg}};
}

PhantomSpec phantom_spec_from_json(const json& j) {
  PhantomSpec s;
  s.height_mm = j.value("height_mm", s.height_mm);
  s.weight_kg = j.value("weight_kg", s.weight_kg);
  s.fat_fraction = j.value("fat_fraction", s.fat_fraction);
  s.muscle_fraction = j.value("muscle_fraction", s.muscle_fraction);
  if (j.contains("sex")) s.sex = parse_sex(j.at("sex").get<std::string>());
  s.age_years = j.value("age_years", s.age_years);
  if (j.contains("spacing_mm")) s.spacing_mm = vec3_from(j.at("spacing_mm"));
  s.seed = j.value("seed", s.seed);
  s.knee_flexion_deg = j.value("knee_flexion_deg", s.knee_flexion_deg);
  return s;
}

json to_json(const PhantomTruth& t) {
  json lm = json::object();
  for (const auto& [name, p] : t.landmarks) lm[name] = vec3(p);
  return {{"body_mass_g", t.body_mass_g},
          {"fat_pct", t.fat_pct},
          {"muscle_pct", t.muscle_pct},
          {"bone_density_hu", t.bone_density_hu},
          {"body_volume_mm3", t.body_volume_mm3},
          {"height_breakdown", to_json(t.height)},
          {"landmarks", lm},
          {"girth_scale", t.girth_scale}};
}

PhantomTruth phantom_truth_from_json(const json& j) {
  PhantomTruth t;
  t.body_mass_g = j.at("body_mass_g").get<double>();
  t.fat_pct = j.at("fat_pct").get<double>();
  t.muscle_pct = j.at("muscle_pct").get<double>();
  t.bone_density_hu = j.at("bone_density_hu").get<double>();
  t.body_volume_mm3 = j.at("body_volume_mm3").get<double>();
  t.height = height_from_json(j.at("height_breakdown"));
  if (j.contains("landmarks")) {
    for (const auto& item : j.at("landmarks").items()) t.landmarks[item.key()] = vec3_from(item.value());
  }
  t.girth_scale = j.value("girth_scale", 1.0);
  return t;
}

json to_json(const CohortManifest& m) {
  json subjects = json::array();
  for (const Subject& s : m.subjects) {
    subjects.push_back({{"id", s.id},
                        {"image", s.image},
                        {"tissue", s.tissue},
                        {"structure", s.structure},
                        {"attributes", to_json(s.attributes)},
                        {"categories", to_json(bin_attributes(s.attributes))},
                        {"population", s.population},
                        {"phantom", to_json(s.spec)},
                        {"truth", to_json(s.truth)}});
  }
  return {{"subjects", subjects}, {"seed", m.seed}, {"spacing_mm", vec3(m.spacing_mm)}};
}

CohortManifest manifest_from_json(const json& j) {
  try {
    CohortManifest m;
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("spacing_mm")) m.spacing_mm = vec3_from(j.at("spacing_mm"));
    for (const json& e : j.at("subjects")) {
      Subject s;
      s.id = e.at("id").get<std::string>();
      s.image = e.at("image").get<std::string>();
      s.tissue = e.at("tissue").get<std::string>();
      s.structure = e.at("structure").get<std::string>();
      s.attributes = attributes_from_json(e.at("attributes"));
      s.population = e.value("population", "unsplit");
      if (s.population != "ID" && s.population != "OOD" && s.population != "unsplit") {
        throw FormatError("subject " + s.id + " has unknown population '" + s.population + "'");
      }
      if (e.contains("phantom")) s.spec = phantom_spec_from_json(e.at("phantom"));
      if (e.contains("truth")) s.truth = phantom_truth_from_json(e.at("truth"));
      m.subjects.push_back(std::move(s));
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const json& j, const std::filesystem::path& path) { write_text(j.dump(2) + "\n", path); }

CohortManifest read_manifest(const std::filesystem::path& path) { return manifest_from_json(read_json(path)); }

void write_manifest(const CohortManifest& m, const std::filesystem::path& path) { write_json(to_json(m), path); }

std::string cohort_csv(const std::vector<std::pair<std::string, CompositionReport>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < kCohortHeader.size(); ++i) out += (i ? "," : "") + kCohortHeader[i];
  out += "\n";
  for (const auto& [id, r] : rows) {
    out += id + "," + exact(r.body_mass_kg) + "," + exact(r.fat_pct) + "," + exact(r.muscle_pct) + "," +
           (r.bone_density_hu ? exact(*r.bone_density_hu) : "") + "," + exact(r.body_volume_l) + "," +
           (r.height ? exact(r.height->total_mm) : "") + "\n";
  }
  return out;
}

std::map<std::string, CompositionReport> read_cohort_csv(const std::filesystem::path& path) {
  std::map<std::string, CompositionReport> out;
  for (const auto& c : read_csv(path, kCohortHeader)) {
    CompositionReport r;
    r.body_mass_kg = parse_double(c[1]);
    r.fat_pct = parse_double(c[2]);
    r.muscle_pct = parse_double(c[3]);
    if (!c[4].empty()) r.bone_density_hu = parse_double(c[4]);
    r.body_volume_l = parse_double(c[5]);
    if (!c[6].empty()) {
      HeightBreakdown h;
      h.total_mm = parse_double(c[6]);
      r.height = h;
    }
    if (!out.emplace(c[0], r).second) throw FormatError("duplicate subject " + c[0] + " in " + path.string());
  }
  return out;
}

std::string consistency_csv(const ConsistencyTable& t) {
  std::string out = "class,dice_mean,dice_std,volume_corr,centroid_R,centroid_A,centroid_S\n";
  auto line = [&](const ConsistencyRow& r) {
    out += r.name + "," + short_num(r.dice_mean) + "," + short_num(r.dice_std) + "," + short_num(r.volume_corr) + "," +
           short_num(r.centroid_r) + "," + short_num(r.centroid_a) + "," + short_num(r.centroid_s) + "\n";
  };
  for (const auto& r : t.rows) line(r);
  line(t.average);
  return out;
}

DensityConfig density_config_from_json(const json& j) {
  check_keys(j, {"default_hu_rho", "hu_rho_per_tissue", "air_threshold_hu", "air_floor_hu"}, "density config");
  DensityConfig c;
  c.default_hu_rho = j.value("default_hu_rho", c.default_hu_rho);
  if (j.contains("hu_rho_per_tissue")) {
    for (const auto& item : j.at("hu_rho_per_tissue").items()) {
      c.hu_rho_per_tissue[std::stoi(item.key())] = item.value().get<double>();
    }
  }
  c.air_threshold_hu = j.value("air_threshold_hu", c.air_threshold_hu);
  c.air_floor_hu = j.value("air_floor_hu", c.air_floor_hu);
  c.validate();
  return c;
}

WindowLossConfig window_loss_config_from_json(const json& j) {
  check_keys(j, {"soft_range_hu", "hard_range_hu", "lambda_soft", "lambda_hard", "lambda_other"}, "loss config");
  WindowLossConfig c;
  if (j.contains("soft_range_hu")) {
    c.soft_min_hu = j.at("soft_range_hu").at(0).get<double>();
    c.soft_max_hu = j.at("soft_range_hu").at(1).get<double>();
  }
  if (j.contains("hard_range_hu")) {
    c.hard_min_hu = j.at("hard_range_hu").at(0).get<double>();
    c.hard_max_hu = j.at("hard_range_hu").at(1).get<double>();
  }
  c.lambda_soft = j.value("lambda_soft", c.lambda_soft);
  c.lambda_hard = j.value("lambda_hard", c.lambda_hard);
  c.lambda_other = j.value("lambda_other", c.lambda_other);
  c.validate();
  return c;
}

namespace {

TruncatedNormal truncated_from_json(const json& j, TruncatedNormal d, const std::string& where) {
  check_keys(j, {"mean", "sd", "lo", "hi"}, where);
  d.mean = j.value("mean", d.mean);
  d.sd = j.value("sd", d.sd);
  d.lo = j.value("lo", d.lo);
  d.hi = j.value("hi", d.hi);
  return d;
}

}  // namespace

AttributeDistribution attribute_distribution_from_json(const json& j) {
  check_keys(j,
             {"p_male", "age", "height_male", "height_female", "weight_male", "weight_female", "height_weight_corr"},
             "attribute distribution");
  AttributeDistribution d;
  d.p_male = j.value("p_male", d.p_male);
  if (j.contains("age")) d.age = truncated_from_json(j.at("age"), d.age, "age");
  if (j.contains("height_male")) d.height_male = truncated_from_json(j.at("height_male"), d.height_male, "height_male");
  if (j.contains("height_female")) {
    d.height_female = truncated_from_json(j.at("height_female"), d.height_female, "height_female");
  }
  if (j.contains("weight_male")) d.weight_male = truncated_from_json(j.at("weight_male"), d.weight_male, "weight_male");
  if (j.contains("weight_female")) {
    d.weight_female = truncated_from_json(j.at("weight_female"), d.weight_female, "weight_female");
  }
  d.height_weight_corr = j.value("height_weight_corr", d.height_weight_corr);
  d.validate();
  return d;
}

TrialConfig trial_config_from_json(const json& j) {
  check_keys(j,
             {"task", "boundary", "counts", "oversample_factor", "predictor", "seed", "bootstrap",
              "synthetic_spacing_mm", "attribute_distribution", "density", "threads", "manifest", "measurements"},
             "trial config");
  TrialConfig c;
  if (j.contains("task")) c.task = parse_task(j.at("task").get<std::string>());
  c.boundary = BiasBoundary::defaults(c.task);
  if (j.contains("boundary")) {
    const json& b = j.at("boundary");
    check_keys(b, {"x_feature", "y_feature", "slope", "intercept", "id_side"}, "boundary");
    c.boundary.x_feature = b.value("x_feature", c.boundary.x_feature);
    c.boundary.y_feature = b.value("y_feature", c.boundary.y_feature);
    c.boundary.slope = b.value("slope", c.boundary.slope);
    c.boundary.intercept = b.value("intercept", c.boundary.intercept);
    if (b.contains("id_side")) c.boundary.id_side = parse_boundary_side(b.at("id_side").get<std::string>());
  }
  if (j.contains("counts")) {
    const json& n = j.at("counts");
    check_keys(n, {"train", "id", "ood"}, "counts");
    c.counts.train = n.value("train", c.counts.train);
    c.counts.id = n.value("id", c.counts.id);
    c.counts.ood = n.value("ood", c.counts.ood);
  }
  c.oversample_factor = j.value("oversample_factor", c.oversample_factor);
  if (j.contains("predictor")) {
    const json& p = j.at("predictor");
    check_keys(p, {"kind", "sigma", "seed", "predictions_csv"}, "predictor");
    c.predictor.kind = parse_predictor_kind(p.value("kind", std::string("shortcut_linear")));
    c.predictor.sigma = p.value("sigma", c.predictor.sigma);
    c.predictor.seed = p.value("seed", c.predictor.seed);
    if (c.predictor.kind == PredictorKind::kExternal && !p.contains("predictions_csv")) {
      throw InvalidArgument("external predictor needs predictions_csv");
    }
  }
  if (!j.contains("seed")) throw InvalidArgument("trial config needs a seed");
  c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("bootstrap")) {
    const json& b = j.at("bootstrap");
    check_keys(b, {"n_boot", "level"}, "bootstrap");
    c.bootstrap.n_boot = b.value("n_boot", c.bootstrap.n_boot);
    c.bootstrap.level = b.value("level", c.bootstrap.level);
  }
  if (j.contains("synthetic_spacing_mm")) c.synthetic_spacing_mm = vec3_from(j.at("synthetic_spacing_mm"));
  if (j.contains("attribute_distribution")) c.dist = attribute_distribution_from_json(j.at("attribute_distribution"));
  if (j.contains("density")) c.density = density_config_from_json(j.at("density"));
  c.threads = j.value("threads", c.threads);
  c.validate();
  return c;
}

json to_json(const TrialConfig& c) {
  return {{"task", to_string(c.task)},
          {"boundary",
           {{"x_feature", c.boundary.x_feature},
            {"y_feature", c.boundary.y_feature},
            {"slope", c.boundary.slope},
            {"intercept", c.boundary.intercept},
            {"id_side", to_string(c.boundary.id_side)}}},
          {"counts", {{"train", c.counts.train}, {"id", c.counts.id}, {"ood", c.counts.ood}}},
          {"oversample_factor", c.oversample_factor},
          {"predictor", {{"kind", to_string(c.predictor.kind)}, {"sigma", c.predictor.sigma}, {"seed", c.predictor.seed}}},
          {"seed", c.seed},
          {"bootstrap", {{"n_boot", c.bootstrap.n_boot}, {"level", c.bootstrap.level}}},
          {"synthetic_spacing_mm", vec3(c.synthetic_spacing_mm)}};
}

std::map<std::string, double> read_predictions_csv(const std::filesystem::path& path) {
  std::map<std::string, double> out;
  for (const auto& c : read_csv(path, {"subject_id", "y_hat"})) {
    if (!out.emplace(c[0], parse_double(c[1])).second) {
      throw FormatError("duplicate subject " + c[0] + " in " + path.string());
    }
  }
  return out;
}

json to_json(const TrialReport& r) {
  json rows = json::array();
  for (const TrialRow& row : r.rows) {
    rows.push_back({{"population", row.population},
                    {"attr_dist", row.attr_dist},
                    {"sample_type", row.sample_type},
                    {"n", row.n},
                    {"mae", opt_num(row.mae)},
                    {"mae_ci", interval(row.mae_ci)},
                    {"z_vs_real", opt_num(row.z_vs_real)},
                    {"z_ci", interval(row.z_ci)},
                    {"p_value", opt_num(row.p_value)},
                    {"verdict", row.verdict ? json(to_string(*row.verdict)) : json(nullptr)}});
  }
  const Attribution& a = r.attribution;
  json types = json::array();
  for (const AttributionType& t : a.types) {
    json corr = json::object(), imp = json::object();
    for (std::size_t k = 0; k < a.features.size(); ++k) {
      corr[a.features[k]] = opt_num(t.corr[k]);
      imp[a.features[k]] = t.importance[k];
    }
    types.push_back({{"sample_type", t.sample_type},
                     {"n", t.n},
                     {"error_correlation", corr},
                     {"feature_importance", imp},
                     {"rf_mae", t.rf_mae},
                     {"importance_correlation", opt_num(t.importance_corr)}});
  }
  json corr_p = json::object();
  for (std::size_t k = 0; k < a.corr_p.size(); ++k) corr_p[a.features[k]] = opt_num(a.corr_p[k]);
  json verdicts = json::object();
  for (const char* pop : {"ID", "OOD"}) {
    const TrialRow& real = r.row(pop, "real");
    verdicts[pop] = real.verdict ? json(to_string(*real.verdict)) : json(nullptr);
  }
  return {{"task", to_string(r.task)},
          {"boundary",
           {{"x_feature", r.boundary.x_feature},
            {"y_feature", r.boundary.y_feature},
            {"slope", r.boundary.slope},
            {"intercept", r.boundary.intercept},
            {"id_side", to_string(r.boundary.id_side)}}},
          {"counts", {{"train", r.counts.train}, {"id", r.counts.id}, {"ood", r.counts.ood}}},
          {"train_pearson", r.train_pearson},
          {"id_side_count", r.id_side_count},
          {"ood_side_count", r.ood_side_count},
          {"classifier_holdout_accuracy", r.classifier_accuracy},
          {"shortcut", {{"alpha", r.shortcut_alpha}, {"beta", r.shortcut_beta}}},
          {"rows", rows},
          {"verdicts", verdicts},
          {"attribution",
           {{"features", a.features},
            {"dropped", a.dropped},
            {"types", types},
            {"correlation_difference_p", corr_p}}}};
}

std::string zscore_table_csv(const TrialReport& r) {
  std::string out = "population,attr_dist,sample_type,n,mae,mae_ci_lo,mae_ci_hi,z,z_ci_lo,z_ci_hi,p_value,verdict\n";
  for (const TrialRow& row : r.rows) {
    out += row.population + "," + row.attr_dist + "," + row.sample_type + "," + std::to_string(row.n) + "," +
           short_num(row.mae) + "," + (row.mae_ci ? short_num(row.mae_ci->lo) + "," + short_num(row.mae_ci->hi) : ",") +
           "," + short_num(row.z_vs_real) + "," +
           (row.z_ci ? short_num(row.z_ci->lo) + "," + short_num(row.z_ci->hi) : ",") + "," +
           short_num(row.p_value) + "," + (row.verdict ? to_string(*row.verdict) : "") + "\n";
  }
  return out;
}

std::string bias_corr_csv(const TrialReport& r) {
  const Attribution& a = r.attribution;
  std::string out = "attribute";
  for (const auto& t : a.types) out += "," + t.sample_type;
  out += ",p_value\n";
  for (std::size_t k = 0; k < a.features.size(); ++k) {
    out += a.features[k];
    for (const auto& t : a.types) out += "," + short_num(t.corr[k]);
    out += "," + (k < a.corr_p.size() ? short_num(a.corr_p[k]) : std::string()) + "\n";
  }
  return out;
}

std::string feature_importance_csv(const TrialReport& r) {
  const Attribution& a = r.attribution;
  std::string out = "attribute";
  for (const auto& t : a.types) out += "," + t.sample_type;
  out += "\n";
  for (std::size_t k = 0; k < a.features.size(); ++k) {
    out += a.features[k];
    for (const auto& t : a.types) out += "," + short_num(t.importance[k]);
    out += "\n";
  }
  out += "correlation";
  for (std::size_t t = 0; t < a.types.size(); ++t) out += "," + (t == 0 ? std::string() : short_num(a.types[t].importance_corr));
  out += "\nrf_error_mae";
  for (const auto& t : a.types) out += "," + short_num(t.rf_mae);
  out += "\n";
  return out;
}

}  // namespace vct
