#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace vct {

enum class ForestKind { kClassifier, kRegressor };
enum class MaxFeatures { kSqrt, kAll };

struct ForestParams {
  int n_trees = 100;
  int min_samples_leaf = 10;
  MaxFeatures max_features = MaxFeatures::kSqrt;
  int max_depth = -1;  // unlimited when negative
  std::uint64_t seed = 0;
  int threads = 1;

  static ForestParams classifier_defaults() { return {}; }
  static ForestParams regressor_defaults() {
    ForestParams p;
    p.min_samples_leaf = 5;
    p.max_features = MaxFeatures::kAll;
    return p;
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int n = 0;
  double value = 0.0;  // regressor: mean target; classifier: positive fraction
  int count_neg = 0;
  int count_pos = 0;

  bool leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<double> importance;  // summed impurity decrease per feature
};

/// Random forest over a dense feature matrix (rows are samples). Classifiers
/// take binary labels 0/1 with 1 as the positive class.
class Forest {
 public:
  Forest() = default;

  static Forest fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ForestKind kind, const ForestParams& params,
                    std::vector<std::string> feature_names = {});

  ForestKind kind() const { return kind_; }
  const ForestParams& params() const { return params_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  const std::vector<Tree>& trees() const { return trees_; }
  int n_features() const { return n_features_; }
  bool trained() const { return !trees_.empty(); }

  /// Fraction of trees whose leaf majority is positive (ties count as positive).
  double predict_proba(std::span<const double> row) const;
  double predict_proba(const Eigen::VectorXd& row) const;

  /// Mean of leaf means (regressor only).
  double predict(std::span<const double> row) const;
  double predict(const Eigen::VectorXd& row) const;

  /// Mean decrease in impurity averaged over trees, normalized to sum 1.
  /// An all-zero vector becomes uniform.
  std::vector<double> feature_importance() const;

  nlohmann::json to_json() const;
  static Forest from_json(const nlohmann::json& j);

 private:
  const TreeNode& leaf_for(const Tree& t, std::span<const double> row) const;
  void check_row(std::size_t size) const;

  ForestKind kind_ = ForestKind::kClassifier;
  ForestParams params_;
  int n_features_ = 0;
  std::vector<std::string> names_;
  std::vector<Tree> trees_;
};

}  // namespace vct
