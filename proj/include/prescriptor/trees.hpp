#pragma once

#include "prescriptor/common.hpp"
#include "prescriptor/weights.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace prescriptor {

struct TreeConfig {
  std::size_t max_depth = std::numeric_limits<std::size_t>::max();
  std::size_t min_leaf = 5;
  std::size_t mtry = 0;  // 0 means all features
  std::uint64_t seed = 0;

  void validate(std::size_t dx) const;
};

struct ForestConfig {
  std::size_t trees = 100;
  TreeConfig tree;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  // mtry = ceil(dx / 3), min_leaf = 5, unbounded depth, bootstrap.
  static ForestConfig defaults(std::size_t dx);
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_id = -1;
};

// Axis-aligned regression tree. x goes left iff x[feature] <= threshold.
class RegressionTree {
 public:
  std::size_t bin(const Vector& x) const;
  WeightVector weights(const Vector& x) const;
  Vector predict(const Vector& x) const;

  std::size_t leaf_count() const { return leaf_members_.size(); }
  // Training indices in a leaf; repeated indices reflect bootstrap multiplicity.
  const std::vector<std::size_t>& leaf_members(std::size_t leaf) const { return leaf_members_.at(leaf); }
  Vector leaf_mean(std::size_t leaf) const { return leaf_means_.row(static_cast<Eigen::Index>(leaf)).transpose(); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t n_train() const { return n_train_; }
  std::size_t dx() const { return dx_; }
  std::size_t depth() const;

  friend RegressionTree fit_tree_on_sample(const Matrix& X, const Matrix& Y,
                                           std::vector<std::size_t> sample, const TreeConfig& config);

 private:
  std::vector<TreeNode> nodes_;
  std::vector<std::vector<std::size_t>> leaf_members_;
  Matrix leaf_means_;
  std::size_t n_train_ = 0;
  std::size_t dx_ = 0;
};

// Grows a tree on the rows listed in `sample` (duplicates allowed).
RegressionTree fit_tree_on_sample(const Matrix& X, const Matrix& Y, std::vector<std::size_t> sample,
                                  const TreeConfig& config);

RegressionTree fit_tree(const Matrix& X, const Matrix& Y, const TreeConfig& config);

class Forest {
 public:
  explicit Forest(std::vector<RegressionTree> trees);

  WeightVector weights(const Vector& x) const;
  Vector predict(const Vector& x) const;
  std::size_t size() const { return trees_.size(); }
  const RegressionTree& tree(std::size_t t) const { return trees_.at(t); }

 private:
  std::vector<RegressionTree> trees_;
};

Forest fit_forest(const Matrix& X, const Matrix& Y, const ForestConfig& config, std::size_t threads = 1);

}  // namespace prescriptor
