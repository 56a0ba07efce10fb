#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vct/rng.hpp"

namespace vct {

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd;  // sample sd (n - 1); empty for n < 2
};

SampleStats describe(std::span<const double> x);
double mean(std::span<const double> x);
double sample_variance(std::span<const double> x);

/// Type-7 (linear interpolation) quantile of an ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);

/// Standard score of the difference in means:
///   z = (mean(x) - mean(y)) / sqrt(var(x)/|x| + var(y)/|y|)
/// with sample variances. Zero pooled variance gives 0 for equal means and
/// throws DegenerateInput otherwise.
double z_score(std::span<const double> x, std::span<const double> y);

double normal_cdf(double z);

/// Two-sided p-value 2 * (1 - Phi(|z|)).
double z_test_p(double z);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return lo <= v && v <= hi; }
};

enum class Statistic { kMean, kMeanAbs };

struct BootstrapOptions {
  int n_boot = 10000;
  double level = 0.95;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Percentile interval of `stat` over with-replacement resamples. Replicate
/// b draws from its own stream, stream_seed(seed, b).
Interval bootstrap_ci(std::span<const double> samples, Statistic stat, const BootstrapOptions& opt = {});

/// Generic percentile bootstrap: `replicate(rng)` computes one replicate.
Interval bootstrap_percentile(const std::function<double(SplitMix64&)>& replicate, const BootstrapOptions& opt);

/// Percentile interval for z_score(x, y), resampling x and y independently.
Interval bootstrap_z_ci(std::span<const double> x, std::span<const double> y, const BootstrapOptions& opt = {});

/// Percentile interval for weighted_mae, resampling (error, weight) pairs.
Interval bootstrap_weighted_mae_ci(std::span<const double> errors, std::span<const double> weights,
                                   const BootstrapOptions& opt = {});

/// Sample Pearson correlation, clamped to [-1, 1]. Throws on constant input.
double pearson(std::span<const double> x, std::span<const double> y);

double mae(std::span<const double> errors);

/// sum(w |e|) / sum(w).
double weighted_mae(std::span<const double> errors, std::span<const double> weights);

/// w_i = p_i / (1 - p_i) * prior_id / prior_ood with p_i clipped to <= 1 - 1e-6.
std::vector<double> importance_weights(std::span<const double> p_ood, double prior_id, double prior_ood);

/// Two-sided p-value for H0: rho1 == rho2 via Fisher's z-transform.
double fisher_z_p(double r1, std::size_t n1, double r2, std::size_t n2);

}  // namespace vct
