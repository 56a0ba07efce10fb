#include "vct/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "vct/anatomy_metrics.hpp"
#include "vct/cohort.hpp"
#include "vct/error.hpp"
#include "vct/log.hpp"
#include "vct/parallel.hpp"
#include "vct/patch.hpp"
#include "vct/report_io.hpp"
#include "vct/trial.hpp"
#include "vct/volume_io.hpp"

namespace vct {
namespace {

namespace fs = std::filesystem;

/// Routes library warnings to the command's error stream for its lifetime.
class WarningScope {
 public:
  explicit WarningScope(std::ostream& err)
      : previous_(set_warning_handler([&err](const std::string& m) { err << "warning: " << m << '\n'; })) {}
  ~WarningScope() { set_warning_handler(std::move(previous_)); }
  WarningScope(const WarningScope&) = delete;
  WarningScope& operator=(const WarningScope&) = delete;

 private:
  WarningHandler previous_;
};

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

struct PhantomArgs {
  std::optional<int> n;
  std::optional<std::uint64_t> seed;
  std::optional<double> spacing;
  std::optional<int> threads;
  std::string out;
  std::string config;
};

int cmd_phantom_gen(const PhantomArgs& a, std::ostream& out) {
  CohortOptions opt;
  bool have_seed = false;
  if (!a.config.empty()) {
    const json j = read_json(a.config);
    for (const auto& item : j.items()) {
      const std::string& k = item.key();
      if (k != "n" && k != "seed" && k != "spacing_mm" && k != "threads" && k != "attribute_distribution" &&
          k != "id_prefix") {
        throw InvalidArgument("unknown key '" + k + "' in phantom config");
      }
    }
    opt.n = j.value("n", opt.n);
    if (j.contains("seed")) {
      opt.seed = j.at("seed").get<std::uint64_t>();
      have_seed = true;
    }
    if (j.contains("spacing_mm")) {
      const json& s = j.at("spacing_mm");
      opt.spacing_mm = s.is_array() ? Eigen::Vector3d(s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>())
                                    : Eigen::Vector3d::Constant(s.get<double>());
    }
    opt.threads = j.value("threads", opt.threads);
    if (j.contains("attribute_distribution")) opt.dist = attribute_distribution_from_json(j.at("attribute_distribution"));
    opt.id_prefix = j.value("id_prefix", opt.id_prefix);
  }
  if (a.n) opt.n = *a.n;
  if (a.seed) {
    opt.seed = *a.seed;
    have_seed = true;
  }
  if (a.spacing) opt.spacing_mm = Eigen::Vector3d::Constant(*a.spacing);
  if (a.threads) opt.threads = *a.threads;
  if (!have_seed) throw InvalidArgument("a seed is required (--seed or config)");
  if (opt.n < 1) throw InvalidArgument("--n must be at least 1");
  if (!(opt.spacing_mm.array() > 0.0).all()) throw InvalidArgument("spacing must be positive");

  const fs::path dir(a.out);
  make_dir(dir);
  const CohortManifest m = generate_cohort(opt, dir);
  write_manifest(m, dir / "manifest.json");
  out << "wrote " << m.subjects.size() << " subjects to " << (dir / "manifest.json").string() << '\n';
  return kExitOk;
}

struct MeasureArgs {
  std::string manifest;
  std::string out;
  std::string config;
  int threads = 1;
};

int cmd_measure(const MeasureArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path manifest_path(a.manifest);
  const CohortManifest m = read_manifest(manifest_path);
  if (m.subjects.empty()) throw InvalidArgument("manifest has no subjects");
  DensityConfig density;
  if (!a.config.empty()) density = density_config_from_json(read_json(a.config));

  const fs::path base = manifest_path.parent_path();
  const fs::path dir(a.out);
  make_dir(dir);

  const std::size_t n = m.subjects.size();
  std::vector<std::optional<CompositionReport>> reports(n);
  std::vector<std::string> failures(n);
  parallel_for(n, a.threads, [&](std::size_t i) {
    try {
      reports[i] = measure_subject(m.subjects[i], base, density);
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  std::vector<std::pair<std::string, CompositionReport>> rows;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& id = m.subjects[i].id;
    if (!reports[i]) {
      err << "error: subject " << id << ": " << failures[i] << '\n';
      ++failed;
      continue;
    }
    write_json(to_json(*reports[i]), dir / (id + "_composition.json"));
    rows.emplace_back(id, *reports[i]);
  }
  write_text(cohort_csv(rows), dir / "cohort.csv");
  out << "measured " << rows.size() << " of " << n << " subjects\n";
  return failed ? kExitPartial : kExitOk;
}

struct TrialArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

int cmd_trial_run(const TrialArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path config_path(a.config);
  const json j = read_json(config_path);
  TrialConfig cfg = trial_config_from_json(j);
  if (a.seed) cfg.seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  cfg.validate();
  if (!j.contains("manifest") || !j.contains("measurements")) {
    throw InvalidArgument("trial config needs 'manifest' and 'measurements'");
  }
  const fs::path base = config_path.parent_path();
  if (cfg.predictor.kind == PredictorKind::kExternal) {
    cfg.predictor.predictions =
        read_predictions_csv(resolve(base, j.at("predictor").at("predictions_csv").get<std::string>()));
  }
  const CohortManifest m = read_manifest(resolve(base, j.at("manifest").get<std::string>()));
  const auto measured = read_cohort_csv(resolve(base, j.at("measurements").get<std::string>()));

  std::vector<SubjectRecord> cohort;
  std::size_t missing = 0;
  for (const Subject& s : m.subjects) {
    const auto it = measured.find(s.id);
    if (it == measured.end()) {
      err << "error: subject " << s.id << " has no measurement\n";
      ++missing;
      continue;
    }
    cohort.push_back({s.id, s.attributes, it->second});
  }

  WarningScope warnings(err);
  const TrialReport report = run_trial(cohort, cfg);

  const fs::path dir(a.out);
  make_dir(dir);
  write_json(to_json(report), dir / "report.json");
  write_text(zscore_table_csv(report), dir / "zscores.csv");
  write_text(bias_corr_csv(report), dir / "bias_correlation.csv");
  write_text(feature_importance_csv(report), dir / "feature_importance.csv");

  char line[128];
  std::snprintf(line, sizeof line, "train pearson: %.3f\n", report.train_pearson);
  out << line;
  for (const char* pop : {"ID", "OOD"}) {
    const TrialRow& row = report.row(pop, "real");
    std::snprintf(line, sizeof line, "%s: %s (MAE %.3f)\n", pop, to_string(*row.verdict).c_str(), *row.mae);
    out << line;
  }
  return missing ? kExitPartial : kExitOk;
}

struct ConsistencyArgs {
  std::string a;
  std::string b;
  std::string out;
  std::string mode = "paired";
  int threads = 1;
};

struct LoadedSubject {
  LabelMap structures;
  LabelMap tissue;
};

std::vector<LoadedSubject> load_labels(const fs::path& manifest_path, int threads) {
  const CohortManifest m = read_manifest(manifest_path);
  if (m.subjects.empty()) throw InvalidArgument(manifest_path.string() + " has no subjects");
  const fs::path base = manifest_path.parent_path();
  std::vector<std::optional<LoadedSubject>> slots(m.subjects.size());
  parallel_for(slots.size(), threads, [&](std::size_t i) {
    const Subject& s = m.subjects[i];
    slots[i] = LoadedSubject{load_labelmap(base / s.structure, LabelKind::kStructure),
                             load_labelmap(base / s.tissue, LabelKind::kTissue)};
  });
  std::vector<LoadedSubject> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// The table reports the merged organ classes only, not landmark markers.
template <typename Map>
void keep_organs(Map& m) {
  std::erase_if(m, [](const auto& kv) { return kv.first > structure::kOrganCount; });
}

int cmd_consistency(const ConsistencyArgs& a, std::ostream& out, std::ostream& err) {
  if (a.mode != "paired" && a.mode != "cohort") throw InvalidArgument("--mode must be paired or cohort");
  const std::vector<LoadedSubject> sa = load_labels(a.a, a.threads);
  const std::vector<LoadedSubject> sb = load_labels(a.b, a.threads);
  const bool paired = a.mode == "paired";
  if (paired && sa.size() != sb.size()) throw InvalidArgument("paired mode needs equally sized manifests");

  WarningScope warnings(err);
  std::vector<SubjectAnatomy> anat_a(sa.size()), anat_b(sb.size());
  auto anatomy = [](const LoadedSubject& s) {
    SubjectAnatomy out = measure_anatomy(s.structures, s.tissue);
    keep_organs(out.volume_ml);
    keep_organs(out.centroid);
    return out;
  };
  parallel_for(sa.size(), a.threads, [&](std::size_t i) { anat_a[i] = anatomy(sa[i]); });
  parallel_for(sb.size(), a.threads, [&](std::size_t i) { anat_b[i] = anatomy(sb[i]); });
  const ClassTable& names = structure_class_table();
  ConsistencyTable table = cohort_consistency(anat_a, anat_b, names);
  if (paired) {
    std::vector<std::map<Label, double>> per_pair(sa.size());
    parallel_for(sa.size(), a.threads, [&](std::size_t i) {
      if (!(sa[i].structures.grid() == sb[i].structures.grid())) {
        throw InvalidArgument("pair " + std::to_string(i) + " has mismatched grids");
      }
      per_pair[i] = per_class_dice(sa[i].structures, sb[i].structures);
      keep_organs(per_pair[i]);
    });
    add_paired_dice(table, per_pair, names);
  }

  const fs::path dir(a.out);
  make_dir(dir);
  write_text(consistency_csv(table), dir / "consistency.csv");
  out << "compared " << sa.size() << " and " << sb.size() << " subjects (" << a.mode << ")\n";
  return kExitOk;
}

struct LossArgs {
  std::string x;
  std::string xhat;
  std::string config;
};

int cmd_loss(const LossArgs& a, std::ostream& out) {
  WindowLossConfig cfg;
  if (!a.config.empty()) cfg = window_loss_config_from_json(read_json(a.config));
  const Volume x = load_volume(a.x);
  const Volume xhat = load_volume(a.xhat);
  out << g17(multi_window_l1(x, xhat, cfg)) << '\n';
  return kExitOk;
}

int guarded(const std::function<int()>& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: invalid configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitPartial;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Virtual clinical trial toolkit", "vct"};
  app.require_subcommand(1);

  PhantomArgs pa;
  CLI::App* phantom = app.add_subcommand("phantom", "Procedural phantom cohorts");
  phantom->require_subcommand(1);
  CLI::App* gen = phantom->add_subcommand("gen", "Generate a seeded phantom cohort");
  gen->add_option("--n", pa.n, "Number of subjects");
  gen->add_option("--seed", pa.seed, "Cohort seed");
  gen->add_option("--out", pa.out, "Output directory")->required();
  gen->add_option("--config", pa.config, "JSON config");
  gen->add_option("--spacing", pa.spacing, "Isotropic voxel spacing in mm");
  gen->add_option("--threads", pa.threads, "Worker threads");

  MeasureArgs ma;
  CLI::App* measure = app.add_subcommand("measure", "Measure body composition of a cohort");
  measure->add_option("--manifest", ma.manifest, "Cohort manifest")->required();
  measure->add_option("--out", ma.out, "Output directory")->required();
  measure->add_option("--config", ma.config, "Density config JSON");
  measure->add_option("--threads", ma.threads, "Worker threads");

  TrialArgs ta;
  CLI::App* trial = app.add_subcommand("trial", "Virtual clinical trials");
  trial->require_subcommand(1);
  CLI::App* run = trial->add_subcommand("run", "Run a biased-split trial");
  run->add_option("--config", ta.config, "Trial config JSON")->required();
  run->add_option("--out", ta.out, "Output directory")->required();
  run->add_option("--seed", ta.seed, "Override the config seed");
  run->add_option("--threads", ta.threads, "Worker threads");

  ConsistencyArgs ca;
  CLI::App* consistency = app.add_subcommand("consistency", "Anatomical consistency of two cohorts");
  consistency->add_option("--a", ca.a, "First manifest")->required();
  consistency->add_option("--b", ca.b, "Second manifest")->required();
  consistency->add_option("--out", ca.out, "Output directory")->required();
  consistency->add_option("--mode", ca.mode, "paired or cohort");
  consistency->add_option("--threads", ca.threads, "Worker threads");

  LossArgs la;
  CLI::App* loss = app.add_subcommand("loss", "Multi-window L1 loss between two volumes");
  loss->add_option("--x", la.x, "Reference volume")->required();
  loss->add_option("--xhat", la.xhat, "Estimated volume")->required();
  loss->add_option("--config", la.config, "Loss config JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (gen->parsed()) return guarded([&] { return cmd_phantom_gen(pa, out); }, err);
  if (measure->parsed()) return guarded([&] { return cmd_measure(ma, out, err); }, err);
  if (run->parsed()) return guarded([&] { return cmd_trial_run(ta, out, err); }, err);
  if (consistency->parsed()) return guarded([&] { return cmd_consistency(ca, out, err); }, err);
  if (loss->parsed()) return guarded([&] { return cmd_loss(la, out); }, err);
  err << app.help();
  return kExitUsage;
}

}  // namespace vct
