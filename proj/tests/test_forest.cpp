#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "vct/error.hpp"
#include "vct/forest.hpp"
#include "vct/rng.hpp"

using namespace vct;

namespace {

struct Data {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

// Label is 1 when feature 0 exceeds 0.5; the remaining features are noise.
Data separable(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Data d{Eigen::MatrixXd(n, 4), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) d.X(i, j) = rng.uniform();
    d.y(i) = d.X(i, 0) > 0.5 ? 1.0 : 0.0;
  }
  return d;
}

// Target depends on feature 3 only.
Data regression(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Data d{Eigen::MatrixXd(n, 5), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 5; ++j) d.X(i, j) = rng.uniform(-1, 1);
    d.y(i) = 4.0 * d.X(i, 3) + rng.normal(0.0, 0.05);
  }
  return d;
}

double accuracy(const Forest& f, const Data& d) {
  int right = 0;
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    const Eigen::VectorXd row = d.X.row(i).transpose();
    right += (f.predict_proba(row) >= 0.5) == (d.y(i) > 0.5);
  }
  return static_cast<double>(right) / static_cast<double>(d.X.rows());
}

}  // namespace

TEST(Forest, SeparableClassifierIsAccurate) {
  const Data train = separable(400, 1), test = separable(200, 2);
  ForestParams p = ForestParams::classifier_defaults();
  p.seed = 3;
  const Forest f = Forest::fit(train.X, train.y, ForestKind::kClassifier, p);
  EXPECT_GE(accuracy(f, test), 0.95);
  const auto imp = f.feature_importance();
  EXPECT_EQ(std::max_element(imp.begin(), imp.end()) - imp.begin(), 0);
}

TEST(Forest, SingleClassPredictsThatClass) {
  Data d = separable(50, 4);
  d.y.setOnes();
  const Forest f = Forest::fit(d.X, d.y, ForestKind::kClassifier, {});
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) EXPECT_EQ(f.predict_proba(Eigen::VectorXd(d.X.row(i).transpose())), 1.0);
  const auto imp = f.feature_importance();
  for (double v : imp) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Forest, RegressorImportanceFindsSignal) {
  const Data d = regression(300, 5);
  ForestParams p = ForestParams::regressor_defaults();
  p.seed = 6;
  const Forest f = Forest::fit(d.X, d.y, ForestKind::kRegressor, p);
  const auto imp = f.feature_importance();
  EXPECT_GE(imp[3], 0.8);
  EXPECT_NEAR(std::accumulate(imp.begin(), imp.end(), 0.0), 1.0, 1e-12);
  for (double v : imp) EXPECT_GE(v, 0.0);
  const Data test = regression(100, 7);
  double err = 0;
  for (Eigen::Index i = 0; i < test.X.rows(); ++i) {
    err += std::abs(f.predict(Eigen::VectorXd(test.X.row(i).transpose())) - test.y(i));
  }
  EXPECT_LT(err / 100.0, 0.3);
}

TEST(Forest, DeterministicAcrossThreadCounts) {
  const Data d = regression(200, 8);
  ForestParams p = ForestParams::regressor_defaults();
  p.seed = 9;
  p.n_trees = 30;
  p.threads = 1;
  const Forest a = Forest::fit(d.X, d.y, ForestKind::kRegressor, p);
  p.threads = 3;
  const Forest b = Forest::fit(d.X, d.y, ForestKind::kRegressor, p);
  EXPECT_EQ(a.feature_importance(), b.feature_importance());
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    const Eigen::VectorXd row = d.X.row(i).transpose();
    EXPECT_EQ(a.predict(row), b.predict(row));
  }
  p.seed = 10;
  const Forest c = Forest::fit(d.X, d.y, ForestKind::kRegressor, p);
  EXPECT_NE(a.feature_importance(), c.feature_importance());
}

TEST(Forest, JsonRoundTripPredictsIdentically) {
  const Data d = separable(150, 11);
  ForestParams p;
  p.n_trees = 20;
  p.seed = 12;
  const Forest f = Forest::fit(d.X, d.y, ForestKind::kClassifier, p, {"a", "b", "c", "d"});
  const Forest g = Forest::from_json(nlohmann::json::parse(f.to_json().dump()));
  EXPECT_EQ(g.feature_names(), f.feature_names());
  EXPECT_EQ(g.n_features(), 4);
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    const Eigen::VectorXd row = d.X.row(i).transpose();
    EXPECT_EQ(f.predict_proba(row), g.predict_proba(row));
  }
  EXPECT_EQ(f.feature_importance(), g.feature_importance());
}

TEST(Forest, LeafSizeIsRespected) {
  const Data d = regression(120, 13);
  ForestParams p = ForestParams::regressor_defaults();
  p.min_samples_leaf = 15;
  p.n_trees = 10;
  const Forest f = Forest::fit(d.X, d.y, ForestKind::kRegressor, p);
  for (const Tree& t : f.trees()) {
    for (const TreeNode& n : t.nodes) {
      if (n.leaf()) EXPECT_GE(n.n, 15);
    }
  }
}

TEST(Forest, RejectsBadInput) {
  const Data d = separable(20, 14);
  Eigen::VectorXd bad = d.y;
  bad(0) = 0.5;
  EXPECT_THROW(Forest::fit(d.X, bad, ForestKind::kClassifier, {}), InvalidArgument);
  EXPECT_THROW(Forest::fit(d.X, d.y.head(10), ForestKind::kClassifier, {}), InvalidArgument);
  const Forest f = Forest::fit(d.X, d.y, ForestKind::kClassifier, {});
  const std::vector<double> short_row = {0.1, 0.2};
  EXPECT_THROW(f.predict_proba(short_row), InvalidArgument);
  EXPECT_THROW(f.predict(Eigen::VectorXd(d.X.row(0).transpose())), InvalidArgument);
}
