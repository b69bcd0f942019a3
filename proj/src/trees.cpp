#include "prescriptor/trees.hpp"

#include "prescriptor/parallel.hpp"
#include "prescriptor/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prescriptor {

void TreeConfig::validate(std::size_t dx) const {
  if (min_leaf < 1) throw std::invalid_argument("min_leaf must be at least 1");
  if (mtry > dx) throw std::invalid_argument("mtry exceeds feature count");
}

ForestConfig ForestConfig::defaults(std::size_t dx) {
  ForestConfig c;
  c.tree.mtry = std::max<std::size_t>(1, (dx + 2) / 3);
  return c;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, const Matrix& Y, const TreeConfig& config, std::vector<TreeNode>& nodes,
              std::vector<std::vector<std::size_t>>& leaves)
      : X_(X), Y_(Y), config_(config), nodes_(nodes), leaves_(leaves) {}

  int build(std::vector<std::size_t> members, std::size_t depth, std::uint64_t seed) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const Eigen::Index dy = Y_.cols();
    const auto n = members.size();

    Vector mean = Vector::Zero(dy);
    for (std::size_t i : members) mean += Y_.row(static_cast<Eigen::Index>(i)).transpose();
    mean /= static_cast<double>(n);
    double sse = 0.0;
    double scale = 0.0;
    for (std::size_t i : members) {
      const auto row = Y_.row(static_cast<Eigen::Index>(i)).transpose();
      sse += (row - mean).squaredNorm();
      scale += row.squaredNorm();
    }

    const bool can_split = n >= 2 * config_.min_leaf && depth < config_.max_depth &&
                           sse > 1e-13 * scale;
    Split best;
    if (can_split) best = best_split(members, mean, seed);
    if (!can_split || !(best.gain > 1e-12 * sse)) {
      nodes_[static_cast<std::size_t>(id)].leaf_id = static_cast<int>(leaves_.size());
      leaves_.push_back(std::move(members));
      return id;
    }

    std::vector<std::size_t> left, right;
    for (std::size_t i : members) {
      (X_(static_cast<Eigen::Index>(i), best.feature) <= best.threshold ? left : right).push_back(i);
    }
    members.clear();
    members.shrink_to_fit();
    const int l = build(std::move(left), depth + 1, derive_seed(seed, 1));
    const int r = build(std::move(right), depth + 1, derive_seed(seed, 2));
    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

 private:
  struct Split {
    Eigen::Index feature = -1;
    double threshold = 0.0;
    double gain = -1.0;
  };

  std::vector<Eigen::Index> candidate_features(std::uint64_t seed) const {
    const auto dx = static_cast<std::size_t>(X_.cols());
    std::vector<Eigen::Index> all(dx);
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    if (config_.mtry == 0 || config_.mtry >= dx) return all;
    Rng rng(seed);
    for (std::size_t a = 0; a < config_.mtry; ++a) {
      std::uniform_int_distribution<std::size_t> pick(a, dx - 1);
      std::swap(all[a], all[pick(rng)]);
    }
    all.resize(config_.mtry);
    std::sort(all.begin(), all.end());
    return all;
  }

  Split best_split(const std::vector<std::size_t>& members, const Vector& mean, std::uint64_t seed) const {
    const auto n = members.size();
    const Eigen::Index dy = Y_.cols();
    Split best;
    std::vector<std::size_t> order(members);
    Vector left_sum(dy);
    for (Eigen::Index f : candidate_features(seed)) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = X_(static_cast<Eigen::Index>(a), f);
        const double xb = X_(static_cast<Eigen::Index>(b), f);
        return xa < xb || (xa == xb && a < b);
      });
      left_sum.setZero();
      for (std::size_t k = 1; k < n; ++k) {
        const auto prev = static_cast<Eigen::Index>(order[k - 1]);
        left_sum += Y_.row(prev).transpose() - mean;
        if (k < config_.min_leaf || n - k < config_.min_leaf) continue;
        const double lo = X_(prev, f);
        const double hi = X_(static_cast<Eigen::Index>(order[k]), f);
        if (!(lo < hi)) continue;
        // Centered sums: right sum is the negated left sum.
        const double nl = static_cast<double>(k);
        const double nr = static_cast<double>(n - k);
        const double gain = left_sum.squaredNorm() * (nl + nr) / (nl * nr);
        if (gain > best.gain) {
          double mid = lo + 0.5 * (hi - lo);
          if (!(mid < hi)) mid = lo;
          best = {f, mid, gain};
        }
      }
    }
    return best;
  }

  const Matrix& X_;
  const Matrix& Y_;
  const TreeConfig& config_;
  std::vector<TreeNode>& nodes_;
  std::vector<std::vector<std::size_t>>& leaves_;
};

}  // namespace

RegressionTree fit_tree_on_sample(const Matrix& X, const Matrix& Y, std::vector<std::size_t> sample,
                                  const TreeConfig& config) {
  if (X.rows() == 0 || sample.empty()) throw std::invalid_argument("cannot fit a tree on empty data");
  if (X.rows() != Y.rows()) throw std::invalid_argument("X and Y row counts differ");
  config.validate(static_cast<std::size_t>(X.cols()));
  for (std::size_t i : sample) {
    if (i >= static_cast<std::size_t>(X.rows())) throw std::invalid_argument("sample index out of range");
  }
  RegressionTree tree;
  tree.n_train_ = static_cast<std::size_t>(X.rows());
  tree.dx_ = static_cast<std::size_t>(X.cols());
  TreeBuilder builder(X, Y, config, tree.nodes_, tree.leaf_members_);
  builder.build(std::move(sample), 0, config.seed);

  tree.leaf_means_.resize(static_cast<Eigen::Index>(tree.leaf_members_.size()), Y.cols());
  for (std::size_t l = 0; l < tree.leaf_members_.size(); ++l) {
    Vector s = Vector::Zero(Y.cols());
    for (std::size_t i : tree.leaf_members_[l]) s += Y.row(static_cast<Eigen::Index>(i)).transpose();
    tree.leaf_means_.row(static_cast<Eigen::Index>(l)) =
        (s / static_cast<double>(tree.leaf_members_[l].size())).transpose();
  }
  return tree;
}

RegressionTree fit_tree(const Matrix& X, const Matrix& Y, const TreeConfig& config) {
  std::vector<std::size_t> all(static_cast<std::size_t>(X.rows()));
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit_tree_on_sample(X, Y, std::move(all), config);
}

std::size_t RegressionTree::bin(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dx_) throw std::invalid_argument("dimension mismatch in tree lookup");
  int id = 0;
  while (nodes_[static_cast<std::size_t>(id)].feature >= 0) {
    const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    id = x(node.feature) <= node.threshold ? node.left : node.right;
  }
  return static_cast<std::size_t>(nodes_[static_cast<std::size_t>(id)].leaf_id);
}

WeightVector RegressionTree::weights(const Vector& x) const {
  const auto& members = leaf_members_[bin(x)];
  const double share = 1.0 / static_cast<double>(members.size());
  std::vector<std::size_t> sorted(members);
  std::sort(sorted.begin(), sorted.end());
  WeightVector w;
  w.n_train = n_train_;
  for (std::size_t a = 0; a < sorted.size(); ++a) {
    if (a > 0 && sorted[a] == sorted[a - 1]) {
      w.entries.back().weight += share;
    } else {
      w.entries.push_back({sorted[a], share});
    }
  }
  return w;
}

Vector RegressionTree::predict(const Vector& x) const { return leaf_mean(bin(x)); }

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  // Children always follow their parent in node order.
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const TreeNode& node = nodes_[id];
    if (node.feature < 0) {
      deepest = std::max(deepest, d[id]);
      continue;
    }
    d[static_cast<std::size_t>(node.left)] = d[id] + 1;
    d[static_cast<std::size_t>(node.right)] = d[id] + 1;
  }
  return deepest;
}

Forest::Forest(std::vector<RegressionTree> trees) : trees_(std::move(trees)) {
  if (trees_.empty()) throw std::invalid_argument("a forest needs at least one tree");
}

WeightVector Forest::weights(const Vector& x) const {
  const std::size_t n = trees_.front().n_train();
  Vector dense = Vector::Zero(static_cast<Eigen::Index>(n));
  const double per_tree = 1.0 / static_cast<double>(trees_.size());
  for (const auto& tree : trees_) {
    const auto& members = tree.leaf_members(tree.bin(x));
    const double share = per_tree / static_cast<double>(members.size());
    for (std::size_t i : members) dense(static_cast<Eigen::Index>(i)) += share;
  }
  WeightVector w;
  w.n_train = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (dense(static_cast<Eigen::Index>(i)) > 0.0) w.entries.push_back({i, dense(static_cast<Eigen::Index>(i))});
  }
  return w;
}

Vector Forest::predict(const Vector& x) const {
  Vector s = trees_.front().predict(x);
  for (std::size_t t = 1; t < trees_.size(); ++t) s += trees_[t].predict(x);
  return s / static_cast<double>(trees_.size());
}

Forest fit_forest(const Matrix& X, const Matrix& Y, const ForestConfig& config, std::size_t threads) {
  if (config.trees < 1) throw std::invalid_argument("forest size must be at least 1");
  if (X.rows() == 0) throw std::invalid_argument("cannot fit a tree on empty data");
  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<RegressionTree> trees(config.trees);
  parallel_for(config.trees, threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(config.seed, t);
    std::vector<std::size_t> sample(n);
    if (config.bootstrap) {
      Rng rng(derive_seed(tree_seed, 0));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& s : sample) s = pick(rng);
    } else {
      std::iota(sample.begin(), sample.end(), std::size_t{0});
    }
    TreeConfig tc = config.tree;
    tc.seed = derive_seed(tree_seed, 1);
    trees[t] = fit_tree_on_sample(X, Y, std::move(sample), tc);
  });
  return Forest(std::move(trees));
}

}  // namespace prescriptor
