#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vct/error.hpp"
#include "vct/rng.hpp"
#include "vct/stats.hpp"

using namespace vct;

namespace {

std::vector<double> normals(SplitMix64& rng, int n, double mean = 0.0, double sd = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.normal(mean, sd);
  return v;
}

}  // namespace

TEST(SplitMix, ReferenceSequence) {
  SplitMix64 rng(1234567);
  EXPECT_EQ(rng.next(), 6457827717110365317ULL);
  EXPECT_EQ(rng.next(), 3203168211198807973ULL);
  EXPECT_EQ(rng.next(), 9817491932198370423ULL);
}

TEST(SplitMix, UniformRangeAndBelow) {
  SplitMix64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.below(7), 7u);
  }
}

TEST(Describe, SampleSdNeedsTwo) {
  const std::vector<double> one = {3.0};
  EXPECT_FALSE(describe(one).sd.has_value());
  const std::vector<double> v = {2, 4, 4, 4, 5, 5, 7, 9};
  const SampleStats s = describe(v);
  EXPECT_EQ(s.n, 8u);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_NEAR(*s.sd, std::sqrt(32.0 / 7.0), 1e-15);
}

TEST(Quantile, MatchesType7) {
  std::vector<double> a = {3.1, 0.2, 7.7, 4.4, 1.9, 5.5, 2.8};
  std::sort(a.begin(), a.end());
  EXPECT_NEAR(quantile_sorted(a, 0.1), 1.2200000000000002, 1e-12);
  EXPECT_NEAR(quantile_sorted(a, 0.25), 2.3499999999999996, 1e-12);
  EXPECT_NEAR(quantile_sorted(a, 0.5), 3.1, 1e-12);
  EXPECT_NEAR(quantile_sorted(a, 0.9), 6.380000000000001, 1e-12);
}

TEST(ZScore, HandCase) {
  const std::vector<double> x = {1, 2, 3}, y = {4, 5, 6};
  EXPECT_NEAR(z_score(x, y), -3.0 / std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(z_score(x, y), -3.6742346141747673, 1e-12);
}

TEST(ZScore, ReferenceTable) {
  for (const auto& c : vct::testing::z_cases()) EXPECT_NEAR(z_score(c.x, c.y), c.z, 1e-9);
}

TEST(ZScore, SelfIsExactlyZero) {
  for (const auto& c : vct::testing::z_cases()) EXPECT_EQ(z_score(c.x, c.x), 0.0);
}

TEST(ZScore, AntisymmetricAndShiftInvariant) {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = normals(rng, 5 + static_cast<int>(rng.below(20)));
    auto y = normals(rng, 5 + static_cast<int>(rng.below(20)), 0.5);
    const double z = z_score(x, y);
    EXPECT_EQ(z_score(y, x), -z);
    const double c = rng.uniform(-10, 10);
    for (double& v : x) v += c;
    for (double& v : y) v += c;
    EXPECT_NEAR(z_score(x, y), z, 1e-9);
  }
}

TEST(ZScore, DegenerateCases) {
  const std::vector<double> a = {2, 2, 2}, b = {2, 2}, c = {3, 3};
  EXPECT_EQ(z_score(a, b), 0.0);
  EXPECT_THROW(z_score(a, c), DegenerateInput);
  const std::vector<double> one = {1.0};
  EXPECT_THROW(z_score(one, a), InvalidArgument);
}

TEST(ZTest, PValues) {
  EXPECT_EQ(z_test_p(0.0), 1.0);
  EXPECT_NEAR(z_test_p(1.959964), 0.05, 1e-6);
  EXPECT_NEAR(z_test_p(3.0), 0.0026997960632601866, 1e-10);
  EXPECT_NEAR(z_test_p(-3.6742346141747673), 0.00023856345402870988, 1e-10);
  EXPECT_NEAR(normal_cdf(1.96), 0.9750021048517795, 1e-10);
  EXPECT_THROW(z_test_p(std::numeric_limits<double>::infinity()), InvalidArgument);
}

TEST(Pearson, HandCases) {
  const std::vector<double> x = {1, 2, 3, 4}, y = {1, 3, 2, 4};
  EXPECT_NEAR(pearson(x, y), 0.8, 1e-15);
  EXPECT_EQ(pearson(x, x), 1.0);
  std::vector<double> neg;
  for (double v : x) neg.push_back(-2 * v + 7);
  EXPECT_NEAR(pearson(x, neg), -1.0, 1e-15);
  const std::vector<double> k = {1, 1, 1, 1};
  EXPECT_THROW(pearson(x, k), DegenerateInput);
}

TEST(Mae, WeightedAndUnweighted) {
  const std::vector<double> e = {1, -1, 2};
  EXPECT_NEAR(mae(e), 4.0 / 3.0, 1e-15);
  const std::vector<double> c = {2.5, 2.5, 2.5};
  EXPECT_NEAR(weighted_mae(e, c), mae(e), 1e-15);
  const std::vector<double> spike = {0, 0, 1};
  EXPECT_EQ(weighted_mae(e, spike), 2.0);
  const std::vector<double> zero = {0, 0, 0};
  EXPECT_THROW(weighted_mae(e, zero), DegenerateInput);
}

TEST(ImportanceWeights, HandCases) {
  const std::vector<double> p = {0.5, 0.75, 0.0, 1.0};
  const auto w = importance_weights(p, 0.5, 0.5);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_EQ(w[1], 3.0);
  EXPECT_EQ(w[2], 0.0);
  EXPECT_NEAR(w[3], (1 - 1e-6) / 1e-6, 1e-3);
  EXPECT_THROW(importance_weights(p, 0.6, 0.6), InvalidArgument);
  EXPECT_THROW(importance_weights(p, 0.0, 1.0), InvalidArgument);
}

TEST(ImportanceWeights, ConstantPriorGivesUnweightedMae) {
  SplitMix64 rng(6);
  const auto e = normals(rng, 80);
  const double prior_ood = 0.3;
  const std::vector<double> p(e.size(), prior_ood);
  EXPECT_NEAR(weighted_mae(e, importance_weights(p, 1 - prior_ood, prior_ood)), mae(e), 1e-12);
}

TEST(FisherZ, Reference) {
  EXPECT_NEAR(fisher_z_p(0.6, 50, 0.3, 40), 0.08089779354178203, 1e-10);
  EXPECT_NEAR(fisher_z_p(0.4, 30, 0.4, 30), 1.0, 1e-15);
  EXPECT_THROW(fisher_z_p(0.4, 3, 0.2, 30), InvalidArgument);
}

TEST(Bootstrap, ConstantSampleGivesPoint) {
  const std::vector<double> c(20, 4.25);
  const Interval i = bootstrap_ci(c, Statistic::kMean, {1000, 0.95, 1, 1});
  EXPECT_EQ(i.lo, 4.25);
  EXPECT_EQ(i.hi, 4.25);
}

TEST(Bootstrap, DeterministicPerSeedAndThreadCount) {
  SplitMix64 rng(7);
  const auto x = normals(rng, 40);
  const Interval a = bootstrap_ci(x, Statistic::kMeanAbs, {2000, 0.95, 42, 1});
  const Interval b = bootstrap_ci(x, Statistic::kMeanAbs, {2000, 0.95, 42, 3});
  EXPECT_EQ(a.lo, b.lo);
  EXPECT_EQ(a.hi, b.hi);
  const Interval c = bootstrap_ci(x, Statistic::kMeanAbs, {2000, 0.95, 43, 1});
  EXPECT_NE(a.lo, c.lo);
}

TEST(Bootstrap, IntervalContainsPlugInMean) {
  SplitMix64 rng(8);
  int inside = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const auto x = normals(rng, 20 + static_cast<int>(rng.below(30)), rng.uniform(-3, 3), rng.uniform(0.5, 2));
    const Interval i = bootstrap_ci(x, Statistic::kMean, {1000, 0.95, static_cast<std::uint64_t>(t), 1});
    inside += i.contains(mean(x));
  }
  EXPECT_GE(inside, 99);
}

TEST(Bootstrap, Errors) {
  const std::vector<double> none;
  EXPECT_THROW(bootstrap_ci(none, Statistic::kMean), InvalidArgument);
  const std::vector<double> two = {1.0, 2.0};
  EXPECT_THROW(bootstrap_ci(two, Statistic::kMean, {0, 0.95, 0, 1}), InvalidArgument);
}

TEST(Bootstrap, ZAndWeightedIntervals) {
  SplitMix64 rng(9);
  const auto x = normals(rng, 50, 1.0), y = normals(rng, 60);
  const Interval z = bootstrap_z_ci(x, y, {2000, 0.95, 3, 1});
  EXPECT_TRUE(z.contains(z_score(x, y)));
  std::vector<double> w(x.size());
  for (double& v : w) v = rng.uniform(0.1, 2.0);
  const Interval m = bootstrap_weighted_mae_ci(x, w, {2000, 0.95, 3, 1});
  EXPECT_TRUE(m.contains(weighted_mae(x, w)));
}
