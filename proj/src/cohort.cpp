#include "vct/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "vct/parallel.hpp"
#include "vct/skeleton.hpp"
#include "vct/volume_io.hpp"

namespace vct {
namespace {

constexpr int kMaxDraws = 100;

double uniform_in(const std::pair<double, double>& b, SplitMix64& rng) { return rng.uniform(b.first, b.second); }

}  // namespace

std::string to_string(Sex s) { return s == Sex::kMale ? "M" : "F"; }

Sex parse_sex(const std::string& s) {
  if (s == "M") return Sex::kMale;
  if (s == "F") return Sex::kFemale;
  throw InvalidArgument("unknown sex '" + s + "' (expected M or F)");
}

std::string decade_bin(std::optional<double> value) {
  if (!value) return "none";
  if (!std::isfinite(*value)) throw InvalidArgument("attribute value must be finite");
  const auto k = static_cast<long>(std::floor(*value / 10.0));
  return std::to_string(k * 10) + "-" + std::to_string((k + 1) * 10);
}

std::optional<std::pair<double, double>> bin_bounds(const std::string& label) {
  if (label == "none") return std::nullopt;
  long lo = 0, hi = 0;
  char tail = 0;
  if (std::sscanf(label.c_str(), "%ld-%ld%c", &lo, &hi, &tail) != 2 || hi - lo != 10 || lo % 10 != 0) {
    throw InvalidArgument("malformed attribute bin '" + label + "'");
  }
  return std::pair<double, double>(static_cast<double>(lo), static_cast<double>(hi));
}

std::optional<double> bin_midpoint(const std::string& label) {
  const auto b = bin_bounds(label);
  if (!b) return std::nullopt;
  return 0.5 * (b->first + b->second);
}

AttributeBins bin_attributes(const Attributes& raw) {
  AttributeBins b;
  b.sex = raw.sex ? to_string(*raw.sex) : "none";
  b.age = decade_bin(raw.age_years);
  b.height = decade_bin(raw.height_cm);
  b.weight = decade_bin(raw.weight_kg);
  return b;
}

void AttributeDistribution::validate() const {
  if (!(p_male >= 0.0 && p_male <= 1.0)) throw InvalidArgument("p_male must be in [0, 1]");
  for (const TruncatedNormal* d : {&age, &height_male, &height_female, &weight_male, &weight_female}) {
    if (!(d->sd > 0.0) || !(d->lo < d->hi)) throw InvalidArgument("truncated normal needs sd > 0 and lo < hi");
  }
  if (!(height_weight_corr > -1.0 && height_weight_corr < 1.0)) {
    throw InvalidArgument("height-weight correlation must be in (-1, 1)");
  }
}

double sample_truncated(const TruncatedNormal& d, SplitMix64& rng) {
  for (int i = 0; i < kMaxDraws; ++i) {
    const double v = rng.normal(d.mean, d.sd);
    if (v >= d.lo && v <= d.hi) return v;
  }
  throw InvalidArgument("truncated normal draw failed after 100 attempts");
}

Attributes sample_attributes(const AttributeDistribution& dist, SplitMix64& rng) {
  Attributes a;
  a.sex = rng.bernoulli(dist.p_male) ? Sex::kMale : Sex::kFemale;
  a.age_years = sample_truncated(dist.age, rng);
  const bool male = *a.sex == Sex::kMale;
  const TruncatedNormal& h = male ? dist.height_male : dist.height_female;
  const TruncatedNormal& w = male ? dist.weight_male : dist.weight_female;
  const double rho = dist.height_weight_corr;
  for (int i = 0; i < kMaxDraws; ++i) {
    const double zh = rng.normal();
    const double zw = rho * zh + std::sqrt(1.0 - rho * rho) * rng.normal();
    const double hv = h.mean + h.sd * zh;
    const double wv = w.mean + w.sd * zw;
    if (hv >= h.lo && hv <= h.hi && wv >= w.lo && wv <= w.hi) {
      a.height_cm = hv;
      a.weight_kg = wv;
      return a;
    }
  }
  throw InvalidArgument("height/weight draw failed after 100 attempts");
}

Attributes sample_within_bins(const AttributeBins& bins, const AttributeDistribution& dist, SplitMix64& rng) {
  const Attributes marginal = sample_attributes(dist, rng);
  Attributes a;
  a.sex = bins.sex == "none" ? marginal.sex : std::optional<Sex>(parse_sex(bins.sex));
  const auto age = bin_bounds(bins.age);
  const auto height = bin_bounds(bins.height);
  const auto weight = bin_bounds(bins.weight);
  a.age_years = age ? uniform_in(*age, rng) : *marginal.age_years;
  a.height_cm = height ? uniform_in(*height, rng) : *marginal.height_cm;
  a.weight_kg = weight ? uniform_in(*weight, rng) : *marginal.weight_kg;
  return a;
}

std::pair<double, double> sample_composition(const Attributes& a, SplitMix64& rng) {
  const bool male = a.sex.value_or(Sex::kFemale) == Sex::kMale;
  const double age = a.age_years.value_or(50.0);
  const double weight = a.weight_kg.value_or(75.0);
  const double fitness = 1.0 / (1.0 + std::exp((age - 40.0) / 0.5)) * (male ? 1.0 : 0.7) + rng.normal(0.0, 0.06);
  const double fat = std::clamp(29.0 + 0.35 * (weight - 75.0) - 5.0 * fitness + rng.normal(0.0, 0.8), 5.0, 60.0);
  const double muscle = std::clamp(36.0 - 0.45 * (fat - 29.0) + 3.0 * fitness + rng.normal(0.0, 0.8), 10.0, 90.0 - fat);
  return {fat / 100.0, muscle / 100.0};
}

PhantomSpec spec_for(const Attributes& a, const Eigen::Vector3d& spacing, SplitMix64& rng) {
  if (!a.sex || !a.age_years || !a.height_cm || !a.weight_kg) {
    throw InvalidArgument("phantom generation needs every raw attribute");
  }
  PhantomSpec s;
  s.sex = *a.sex;
  s.age_years = *a.age_years;
  s.height_mm = *a.height_cm * 10.0;
  s.weight_kg = *a.weight_kg;
  s.spacing_mm = spacing;
  const auto [fat, muscle] = sample_composition(a, rng);
  s.fat_fraction = fat;
  s.muscle_fraction = muscle;
  s.seed = rng.next();
  return s;
}

GeneratedSubject generate_with_retry(const std::function<Attributes(SplitMix64&)>& draw,
                                     const Eigen::Vector3d& spacing, SplitMix64& rng) {
  std::string last;
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    Attributes a = draw(rng);
    PhantomSpec spec = spec_for(a, spacing, rng);
    try {
      Phantom p = generate_phantom(spec);
      return {std::move(a), spec, std::move(p)};
    } catch (const InvalidArgument& e) {
      last = e.what();
    }
  }
  throw InvalidArgument("no feasible attribute draw after 100 attempts: " + last);
}

std::string subject_id(const std::string& prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return prefix + buf;
}

GeneratedSubject generate_subject(const CohortOptions& opt, std::size_t index) {
  SplitMix64 rng(subject_seed(opt.seed, index));
  auto draw = [&](SplitMix64& r) { return sample_attributes(opt.dist, r); };
  return generate_with_retry(draw, opt.spacing_mm, rng);
}

CohortManifest generate_cohort(const CohortOptions& opt, const std::filesystem::path& out_dir) {
  if (opt.n < 1) throw InvalidArgument("cohort size must be at least 1");
  opt.dist.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  CohortManifest m;
  m.seed = opt.seed;
  m.spacing_mm = opt.spacing_mm;
  m.subjects.resize(static_cast<std::size_t>(opt.n));
  parallel_for(m.subjects.size(), opt.threads, [&](std::size_t i) {
    const GeneratedSubject g = generate_subject(opt, i);
    Subject& s = m.subjects[i];
    s.id = subject_id(opt.id_prefix, i);
    s.image = s.id + "_image.ctv.json";
    s.tissue = s.id + "_tissue.ctv.json";
    s.structure = s.id + "_structure.ctv.json";
    s.attributes = g.attributes;
    s.spec = g.spec;
    s.truth = g.phantom.truth;
    save_volume(g.phantom.image, out_dir / s.image);
    save_labelmap(g.phantom.tissue, out_dir / s.tissue);
    save_labelmap(g.phantom.structures, out_dir / s.structure);
  });
  return m;
}

CompositionReport measure_subject(const Subject& s, const std::filesystem::path& base, const DensityConfig& cfg) {
  const Volume image = load_volume(base / s.image);
  const LabelMap tissue = load_labelmap(base / s.tissue, LabelKind::kTissue);
  const LabelMap structures = load_labelmap(base / s.structure, LabelKind::kStructure);
  CompositionReport r = measure_composition(image, tissue, cfg);
  r.height = measure_height(tissue, structures);
  return r;
}

}  // namespace vct
