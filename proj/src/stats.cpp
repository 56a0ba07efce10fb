#include "vct/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vct/error.hpp"
#include "vct/parallel.hpp"

namespace vct {
namespace {

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + " contains a non-finite value");
  }
}

void check_options(const BootstrapOptions& opt) {
  if (opt.n_boot < 1) throw InvalidArgument("n_boot must be >= 1");
  if (!(opt.level > 0.0 && opt.level < 1.0)) throw InvalidArgument("confidence level must be in (0, 1)");
}

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of an empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw InvalidArgument("sample variance needs at least 2 values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

SampleStats describe(std::span<const double> x) {
  SampleStats s;
  s.n = x.size();
  s.mean = mean(x);
  if (x.size() >= 2) s.sd = std::sqrt(sample_variance(x));
  return s;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile probability must be in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double z_score(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) throw InvalidArgument("z_score needs at least 2 samples on each side");
  require_finite(x, "z_score input");
  require_finite(y, "z_score input");
  const double diff = mean(x) - mean(y);
  const double se2 = sample_variance(x) / static_cast<double>(x.size()) +
                     sample_variance(y) / static_cast<double>(y.size());
  if (se2 == 0.0) {
    if (diff == 0.0) return 0.0;
    throw DegenerateInput(diff > 0 ? "z_score is +infinity (zero variance, different means)"
                                   : "z_score is -infinity (zero variance, different means)");
  }
  return diff / std::sqrt(se2);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double z_test_p(double z) {
  if (!std::isfinite(z)) throw InvalidArgument("z must be finite");
  return std::clamp(std::erfc(std::abs(z) / std::numbers::sqrt2), 0.0, 1.0);
}

Interval bootstrap_percentile(const std::function<double(SplitMix64&)>& replicate, const BootstrapOptions& opt) {
  check_options(opt);
  std::vector<double> reps(static_cast<std::size_t>(opt.n_boot));
  parallel_for(reps.size(), opt.threads, [&](std::size_t b) {
    SplitMix64 rng(stream_seed(opt.seed, b));
    reps[b] = replicate(rng);
  });
  std::sort(reps.begin(), reps.end());
  const double alpha = 1.0 - opt.level;
  return {quantile_sorted(reps, alpha / 2.0), quantile_sorted(reps, 1.0 - alpha / 2.0)};
}

Interval bootstrap_ci(std::span<const double> samples, Statistic stat, const BootstrapOptions& opt) {
  if (samples.empty()) throw InvalidArgument("bootstrap of an empty sample");
  require_finite(samples, "bootstrap input");
  const std::size_t n = samples.size();
  const bool absolute = stat == Statistic::kMeanAbs;
  return bootstrap_percentile(
      [&](SplitMix64& rng) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double v = samples[rng.below(n)];
          s += absolute ? std::abs(v) : v;
        }
        return s / static_cast<double>(n);
      },
      opt);
}

Interval bootstrap_z_ci(std::span<const double> x, std::span<const double> y, const BootstrapOptions& opt) {
  if (x.size() < 2 || y.size() < 2) throw InvalidArgument("z bootstrap needs at least 2 samples on each side");
  return bootstrap_percentile(
      [&](SplitMix64& rng) {
        std::vector<double> bx(x.size()), by(y.size());
        for (auto& v : bx) v = x[rng.below(x.size())];
        for (auto& v : by) v = y[rng.below(y.size())];
        const double diff = mean(bx) - mean(by);
        const double se2 = sample_variance(bx) / static_cast<double>(bx.size()) +
                           sample_variance(by) / static_cast<double>(by.size());
        if (se2 == 0.0) return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        return diff / std::sqrt(se2);
      },
      opt);
}

Interval bootstrap_weighted_mae_ci(std::span<const double> errors, std::span<const double> weights,
                                   const BootstrapOptions& opt) {
  if (errors.size() != weights.size()) throw InvalidArgument("errors and weights differ in length");
  if (errors.empty()) throw InvalidArgument("bootstrap of an empty sample");
  weighted_mae(errors, weights);  // validates
  const std::size_t n = errors.size();
  return bootstrap_percentile(
      [&](SplitMix64& rng) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t k = rng.below(n);
          num += weights[k] * std::abs(errors[k]);
          den += weights[k];
        }
        // An all-zero-weight resample carries no information; fall back to 0 weight mass.
        return den > 0.0 ? num / den : 0.0;
      },
      opt);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson inputs differ in length");
  if (x.size() < 3) throw InvalidArgument("pearson needs at least 3 pairs");
  require_finite(x, "pearson input");
  require_finite(y, "pearson input");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateInput("pearson of a constant sample is undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double mae(std::span<const double> errors) {
  if (errors.empty()) throw InvalidArgument("mae of an empty sample");
  double s = 0.0;
  for (double e : errors) s += std::abs(e);
  return s / static_cast<double>(errors.size());
}

double weighted_mae(std::span<const double> errors, std::span<const double> weights) {
  if (errors.size() != weights.size()) throw InvalidArgument("errors and weights differ in length");
  if (errors.empty()) throw InvalidArgument("weighted mae of an empty sample");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw InvalidArgument("weights must be finite and >= 0");
    num += weights[i] * std::abs(errors[i]);
    den += weights[i];
  }
  if (!(den > 0.0)) throw DegenerateInput("all weights are zero");
  return num / den;
}

std::vector<double> importance_weights(std::span<const double> p_ood, double prior_id, double prior_ood) {
  if (!(prior_id > 0.0) || !(prior_ood > 0.0) || std::abs(prior_id + prior_ood - 1.0) > 1e-9) {
    throw InvalidArgument("priors must be positive and sum to 1");
  }
  const double ratio = prior_id / prior_ood;
  std::vector<double> w(p_ood.size());
  for (std::size_t i = 0; i < p_ood.size(); ++i) {
    if (!(p_ood[i] >= 0.0 && p_ood[i] <= 1.0)) throw InvalidArgument("p_ood must lie in [0, 1]");
    const double p = std::min(p_ood[i], 1.0 - 1e-6);
    w[i] = p / (1.0 - p) * ratio;
  }
  return w;
}

double fisher_z_p(double r1, std::size_t n1, double r2, std::size_t n2) {
  if (n1 < 4 || n2 < 4) throw InvalidArgument("Fisher z-test needs at least 4 samples per correlation");
  if (!std::isfinite(r1) || !std::isfinite(r2)) throw InvalidArgument("correlations must be finite");
  constexpr double kEdge = 1.0 - 1e-12;
  const double z1 = std::atanh(std::clamp(r1, -kEdge, kEdge));
  const double z2 = std::atanh(std::clamp(r2, -kEdge, kEdge));
  const double se = std::sqrt(1.0 / static_cast<double>(n1 - 3) + 1.0 / static_cast<double>(n2 - 3));
  return z_test_p((z1 - z2) / se);
}

}  // namespace vct
