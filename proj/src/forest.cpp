#include "vct/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vct/error.hpp"
#include "vct/parallel.hpp"
#include "vct/rng.hpp"

namespace vct {
namespace {

constexpr double kMinGain = 1e-12;

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;  // impurity decrease per node sample
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ForestKind kind, const ForestParams& p,
              SplitMix64& rng)
      : X_(X), y_(y), kind_(kind), p_(p), rng_(rng) {
    const int f = static_cast<int>(X.cols());
    k_ = p.max_features == MaxFeatures::kAll ? f : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(f))));
    tree_.importance.assign(static_cast<std::size_t>(f), 0.0);
  }

  Tree build(std::vector<int> rows) {
    total_ = static_cast<double>(rows.size());
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  // Node impurity times node size (Gini * n or SSE).
  double weighted_impurity(double n, double pos, double sum, double sumsq) const {
    if (n <= 0) return 0.0;
    if (kind_ == ForestKind::kClassifier) {
      const double q = pos / n;
      return n * 2.0 * q * (1.0 - q);
    }
    return std::max(0.0, sumsq - sum * sum / n);
  }

  int grow(std::vector<int>& rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double pos = 0.0, sum = 0.0, sumsq = 0.0;
    for (int r : rows) {
      const double v = y_[r];
      sum += v;
      sumsq += v * v;
      if (v > 0.5) pos += 1.0;
    }
    const double n = static_cast<double>(rows.size());
    {
      TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
      node.n = static_cast<int>(rows.size());
      node.count_pos = static_cast<int>(pos);
      node.count_neg = node.n - node.count_pos;
      node.value = kind_ == ForestKind::kClassifier ? pos / n : sum / n;
    }
    const int leaf = p_.min_samples_leaf;
    if (static_cast<int>(rows.size()) < 2 * leaf || (p_.max_depth >= 0 && depth >= p_.max_depth)) return id;
    const double parent = weighted_impurity(n, pos, sum, sumsq);
    if (parent <= 0.0) return id;

    const Split best = find_split(rows, parent);
    if (best.feature < 0 || best.gain <= kMinGain) return id;

    std::vector<int> left, right;
    for (int r : rows) (X_(r, best.feature) <= best.threshold ? left : right).push_back(r);
    tree_.importance[static_cast<std::size_t>(best.feature)] += best.gain * n / total_;
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int rr = grow(right, depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = rr;
    return id;
  }

  std::vector<int> candidate_features() {
    const int f = static_cast<int>(X_.cols());
    std::vector<int> all(static_cast<std::size_t>(f));
    std::iota(all.begin(), all.end(), 0);
    if (k_ >= f) return all;
    // Partial Fisher-Yates: the first k_ slots become a draw without replacement.
    for (int i = 0; i < k_; ++i) {
      const int j = i + static_cast<int>(rng_.below(static_cast<std::uint64_t>(f - i)));
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    all.resize(static_cast<std::size_t>(k_));
    std::sort(all.begin(), all.end());
    return all;
  }

  Split find_split(const std::vector<int>& rows, double parent) {
    Split best;
    const std::size_t m = rows.size();
    const double n = static_cast<double>(m);
    const auto leaf = static_cast<std::size_t>(p_.min_samples_leaf);
    std::vector<std::pair<double, double>> col(m);
    for (int f : candidate_features()) {
      for (std::size_t i = 0; i < m; ++i) col[i] = {X_(rows[i], f), y_[rows[i]]};
      std::stable_sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      if (col.front().first == col.back().first) continue;
      double lpos = 0.0, lsum = 0.0, lsq = 0.0;
      double tpos = 0.0, tsum = 0.0, tsq = 0.0;
      for (const auto& [x, v] : col) {
        tsum += v;
        tsq += v * v;
        if (v > 0.5) tpos += 1.0;
      }
      for (std::size_t i = 0; i + 1 < m; ++i) {
        const double v = col[i].second;
        lsum += v;
        lsq += v * v;
        if (v > 0.5) lpos += 1.0;
        if (col[i].first == col[i + 1].first) continue;
        const std::size_t nl = i + 1;
        if (nl < leaf || m - nl < leaf) continue;
        const double dl = static_cast<double>(nl);
        const double dr = n - dl;
        const double child = weighted_impurity(dl, lpos, lsum, lsq) +
                             weighted_impurity(dr, tpos - lpos, tsum - lsum, tsq - lsq);
        const double gain = (parent - child) / n;
        if (gain > best.gain) {
          double thr = 0.5 * (col[i].first + col[i + 1].first);
          if (!(thr < col[i + 1].first)) thr = col[i].first;
          best = {f, thr, gain};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  ForestKind kind_;
  const ForestParams& p_;
  SplitMix64& rng_;
  int k_ = 1;
  double total_ = 1.0;
  Tree tree_;
};

nlohmann::json node_json(const Tree& t, int id) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(id)];
  nlohmann::json j;
  j["n"] = n.n;
  j["value"] = n.value;
  j["counts"] = {n.count_neg, n.count_pos};
  if (!n.leaf()) {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["left"] = node_json(t, n.left);
    j["right"] = node_json(t, n.right);
  }
  return j;
}

int node_from_json(const nlohmann::json& j, Tree& t) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  TreeNode n;
  n.n = j.at("n").get<int>();
  n.value = j.at("value").get<double>();
  n.count_neg = j.at("counts").at(0).get<int>();
  n.count_pos = j.at("counts").at(1).get<int>();
  if (j.contains("feature")) {
    n.feature = j.at("feature").get<int>();
    n.threshold = j.at("threshold").get<double>();
    n.left = node_from_json(j.at("left"), t);
    n.right = node_from_json(j.at("right"), t);
  }
  t.nodes[static_cast<std::size_t>(id)] = n;
  return id;
}

}  // namespace

Forest Forest::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ForestKind kind, const ForestParams& params,
                   std::vector<std::string> feature_names) {
  if (X.rows() == 0 || X.cols() == 0) throw InvalidArgument("forest needs a non-empty feature matrix");
  if (y.size() != X.rows()) throw InvalidArgument("forest targets and rows differ in length");
  if (params.n_trees < 1) throw InvalidArgument("n_trees must be >= 1");
  if (params.min_samples_leaf < 1) throw InvalidArgument("min_samples_leaf must be >= 1");
  if (X.rows() < 2 * params.min_samples_leaf) {
    throw InvalidArgument("forest needs at least 2 * min_samples_leaf rows");
  }
  if (!X.allFinite() || !y.allFinite()) throw InvalidArgument("forest inputs must be finite");
  if (kind == ForestKind::kClassifier) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0) throw InvalidArgument("classifier labels must be 0 or 1");
    }
  }
  if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(X.cols())) {
    throw InvalidArgument("feature name count does not match columns");
  }

  Forest f;
  f.kind_ = kind;
  f.params_ = params;
  f.n_features_ = static_cast<int>(X.cols());
  f.names_ = std::move(feature_names);
  f.trees_.resize(static_cast<std::size_t>(params.n_trees));
  const auto rows = static_cast<std::uint64_t>(X.rows());
  parallel_for(f.trees_.size(), params.threads, [&](std::size_t t) {
    SplitMix64 rng(stream_seed(params.seed, t));
    std::vector<int> sample(static_cast<std::size_t>(rows));
    for (auto& r : sample) r = static_cast<int>(rng.below(rows));
    TreeBuilder builder(X, y, kind, params, rng);
    f.trees_[t] = builder.build(std::move(sample));
  });
  return f;
}

void Forest::check_row(std::size_t size) const {
  if (!trained()) throw InvalidArgument("forest is not trained");
  if (size != static_cast<std::size_t>(n_features_)) {
    throw InvalidArgument("feature row has " + std::to_string(size) + " values, forest expects " +
                          std::to_string(n_features_));
  }
}

const TreeNode& Forest::leaf_for(const Tree& t, std::span<const double> row) const {
  const TreeNode* n = &t.nodes.front();
  while (!n->leaf()) {
    n = &t.nodes[static_cast<std::size_t>(row[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left
                                                                                                     : n->right)];
  }
  return *n;
}

double Forest::predict_proba(std::span<const double> row) const {
  check_row(row.size());
  if (kind_ != ForestKind::kClassifier) throw InvalidArgument("predict_proba needs a classifier");
  int votes = 0;
  for (const Tree& t : trees_) {
    const TreeNode& leaf = leaf_for(t, row);
    if (leaf.count_pos >= leaf.count_neg) ++votes;
  }
  return static_cast<double>(votes) / static_cast<double>(trees_.size());
}

double Forest::predict_proba(const Eigen::VectorXd& row) const {
  return predict_proba(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
}

double Forest::predict(std::span<const double> row) const {
  check_row(row.size());
  if (kind_ != ForestKind::kRegressor) throw InvalidArgument("predict needs a regressor");
  double s = 0.0;
  for (const Tree& t : trees_) s += leaf_for(t, row).value;
  return s / static_cast<double>(trees_.size());
}

double Forest::predict(const Eigen::VectorXd& row) const {
  return predict(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
}

std::vector<double> Forest::feature_importance() const {
  if (!trained()) throw InvalidArgument("forest is not trained");
  std::vector<double> imp(static_cast<std::size_t>(n_features_), 0.0);
  for (const Tree& t : trees_) {
    for (std::size_t k = 0; k < imp.size(); ++k) imp[k] += t.importance[k];
  }
  double total = 0.0;
  for (double& v : imp) {
    v /= static_cast<double>(trees_.size());
    total += v;
  }
  if (!(total > 0.0)) {
    std::fill(imp.begin(), imp.end(), 1.0 / static_cast<double>(imp.size()));
    return imp;
  }
  for (double& v : imp) v /= total;
  return imp;
}

nlohmann::json Forest::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_ == ForestKind::kClassifier ? "classifier" : "regressor";
  j["n_features"] = n_features_;
  j["feature_names"] = names_;
  j["params"] = {{"n_trees", params_.n_trees},
                 {"min_samples_leaf", params_.min_samples_leaf},
                 {"max_features", params_.max_features == MaxFeatures::kSqrt ? "sqrt" : "all"},
                 {"max_depth", params_.max_depth},
                 {"seed", params_.seed}};
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : trees_) trees.push_back({{"importance", t.importance}, {"root", node_json(t, 0)}});
  j["trees"] = std::move(trees);
  return j;
}

Forest Forest::from_json(const nlohmann::json& j) {
  Forest f;
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "classifier" && kind != "regressor") throw FormatError("unknown forest kind '" + kind + "'");
    f.kind_ = kind == "classifier" ? ForestKind::kClassifier : ForestKind::kRegressor;
    f.n_features_ = j.at("n_features").get<int>();
    f.names_ = j.at("feature_names").get<std::vector<std::string>>();
    const auto& p = j.at("params");
    f.params_.n_trees = p.at("n_trees").get<int>();
    f.params_.min_samples_leaf = p.at("min_samples_leaf").get<int>();
    f.params_.max_features = p.at("max_features").get<std::string>() == "sqrt" ? MaxFeatures::kSqrt : MaxFeatures::kAll;
    f.params_.max_depth = p.at("max_depth").get<int>();
    f.params_.seed = p.at("seed").get<std::uint64_t>();
    for (const auto& tj : j.at("trees")) {
      Tree t;
      t.importance = tj.at("importance").get<std::vector<double>>();
      node_from_json(tj.at("root"), t);
      f.trees_.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed forest JSON: ") + e.what());
  }
  return f;
}

}  // namespace vct
