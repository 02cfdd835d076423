/*
 * Copyright 2026 The treetweak Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Binary decision trees over standardized features and their majority-vote
// ensemble.
//
// Routing convention: an internal node sends x left when
// x[feature] <= threshold and right otherwise, so a value sitting exactly on
// the threshold goes left. The ensemble predicts -1 whenever the vote sum
// is <= 0; with an even number of trees a tie is therefore negative.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treetweak/error.hpp"
#include "treetweak/feature_space.hpp"

namespace treetweak {

enum class Direction { kLessEqual, kGreater };

/// One boolean test of a root-to-leaf path.
struct Condition {
  std::size_t feature = 0;
  Direction direction = Direction::kLessEqual;
  double threshold = 0.0;

  bool satisfied_by(double value) const {
    return direction == Direction::kLessEqual ? value <= threshold : value > threshold;
  }
  friend bool operator==(const Condition&, const Condition&) = default;
};

/// Root-to-leaf path. `path_index` is the leaf's ordinal in left-first
/// depth-first order over all leaves of its tree, whatever the polarity.
struct Path {
  std::vector<Condition> conditions;
  int leaf_label = -1;
  std::size_t tree_index = 0;
  std::size_t path_index = 0;

  bool satisfied_by(std::span<const double> x) const {
    return std::all_of(conditions.begin(), conditions.end(),
                       [&](const Condition& c) { return c.satisfied_by(x[c.feature]); });
  }
  friend bool operator==(const Path&, const Path&) = default;
};

enum class Polarity { kPositive, kNegative, kAll };

/// Flattened tree node. Leaves have `feature == kLeaf`; internal nodes index
/// their children in the owning tree's node array.
struct Node {
  static constexpr std::size_t kLeaf = std::numeric_limits<std::size_t>::max();

  std::size_t feature = kLeaf;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  int label = -1;

  bool is_leaf() const { return feature == kLeaf; }
  friend bool operator==(const Node&, const Node&) = default;
};

/// A binary decision tree stored as a node array in parent-before-child
/// (pre-order) layout with the root at index 0.
class DecisionTree {
 public:
  DecisionTree() : DecisionTree(leaf(-1)) {}

  explicit DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) { validate(); }

  static DecisionTree leaf(int label) {
    Node node;
    node.label = checked_label(label);
    return DecisionTree(std::vector<Node>{node});
  }

  /// Builds `if x[feature] <= threshold then left else right`.
  static DecisionTree split(std::size_t feature, double threshold, const DecisionTree& left,
                            const DecisionTree& right) {
    std::vector<Node> nodes;
    nodes.reserve(1 + left.nodes_.size() + right.nodes_.size());
    Node root;
    root.feature = feature;
    root.threshold = threshold;
    root.left = 1;
    root.right = 1 + left.nodes_.size();
    nodes.push_back(root);
    const auto append = [&nodes](const std::vector<Node>& sub, std::size_t offset) {
      for (Node n : sub) {
        if (!n.is_leaf()) {
          n.left += offset;
          n.right += offset;
        }
        nodes.push_back(n);
      }
    };
    append(left.nodes_, 1);
    append(right.nodes_, root.right);
    return DecisionTree(std::move(nodes));
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }

  /// Number of internal nodes on the longest root-to-leaf path.
  std::size_t depth() const { return depth_; }
  std::size_t leaf_count() const { return (nodes_.size() + 1) / 2; }

  /// Largest feature index tested by any node, or nullopt for a lone leaf.
  std::optional<std::size_t> max_feature() const {
    std::optional<std::size_t> out;
    for (const auto& n : nodes_) {
      if (!n.is_leaf()) out = std::max(out.value_or(0), n.feature);
    }
    return out;
  }

  std::size_t leaf_index(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
      const Node& n = nodes_[i];
      i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return i;
  }

  int predict(std::span<const double> x) const {
    check_features(x.size());
    return nodes_[leaf_index(x)].label;
  }

  friend bool operator==(const DecisionTree& a, const DecisionTree& b) {
    return a.nodes_ == b.nodes_;
  }

 private:
  void check_features(std::size_t n) const {
    if (const auto f = max_feature(); f && *f >= n) {
      throw Error(ErrorKind::kLengthMismatch,
                  "instance has " + std::to_string(n) + " values but the tree tests feature " +
                      std::to_string(*f));
    }
  }

  void validate() {
    if (nodes_.empty()) throw Error(ErrorKind::kCorruptModel, "tree has no nodes");
    std::vector<std::size_t> depth(nodes_.size(), 0);
    std::vector<bool> referenced(nodes_.size(), false);
    depth_ = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (i > 0 && !referenced[i]) {
        throw Error(ErrorKind::kCorruptModel,
                    "node " + std::to_string(i) + " is not reachable from its parent");
      }
      if (n.is_leaf()) {
        if (n.label != -1 && n.label != 1) {
          throw Error(ErrorKind::kCorruptModel,
                      "leaf " + std::to_string(i) + " has label " + std::to_string(n.label));
        }
        depth_ = std::max(depth_, depth[i]);
        continue;
      }
      if (!std::isfinite(n.threshold)) {
        throw Error(ErrorKind::kCorruptModel,
                    "node " + std::to_string(i) + " has a non-finite threshold");
      }
      for (std::size_t child : {n.left, n.right}) {
        if (child <= i || child >= nodes_.size() || referenced[child]) {
          throw Error(ErrorKind::kCorruptModel,
                      "node " + std::to_string(i) + " has an invalid child index");
        }
        referenced[child] = true;
        depth[child] = depth[i] + 1;
      }
    }
  }

  std::vector<Node> nodes_;
  std::size_t depth_ = 0;
};

inline int predict_tree(const DecisionTree& tree, const Instance& x) {
  return tree.predict(x.view());
}

/// Unique path followed by `x`; its leaf label equals the tree prediction.
inline Path route(const DecisionTree& tree, std::span<const double> x,
                  std::size_t tree_index = 0) {
  tree.predict(x);  // bounds check
  Path path;
  path.tree_index = tree_index;
  std::size_t i = 0;
  while (!tree.node(i).is_leaf()) {
    const Node& n = tree.node(i);
    const bool go_left = x[n.feature] <= n.threshold;
    path.conditions.push_back(
        {n.feature, go_left ? Direction::kLessEqual : Direction::kGreater, n.threshold});
    i = go_left ? n.left : n.right;
  }
  path.leaf_label = tree.node(i).label;
  // Leaf ordinal in DFS order: leaves are visited in node-array order because
  // the layout is pre-order.
  std::size_t ordinal = 0;
  for (std::size_t j = 0; j < i; ++j) ordinal += tree.node(j).is_leaf() ? 1 : 0;
  path.path_index = ordinal;
  return path;
}

inline Path route(const DecisionTree& tree, const Instance& x, std::size_t tree_index = 0) {
  return route(tree, x.view(), tree_index);
}

/// All root-to-leaf paths whose leaf matches `polarity`, in left-first
/// depth-first order.
inline std::vector<Path> extract_paths(const DecisionTree& tree, Polarity polarity,
                                       std::size_t tree_index = 0) {
  std::vector<Path> out;
  std::vector<Condition> prefix;
  std::size_t ordinal = 0;
  const auto wanted = [polarity](int label) {
    return polarity == Polarity::kAll || (polarity == Polarity::kPositive && label == 1) ||
           (polarity == Polarity::kNegative && label == -1);
  };
  const auto visit = [&](const auto& self, std::size_t i) -> void {
    const Node& n = tree.node(i);
    if (n.is_leaf()) {
      if (wanted(n.label)) out.push_back(Path{prefix, n.label, tree_index, ordinal});
      ++ordinal;
      return;
    }
    prefix.push_back({n.feature, Direction::kLessEqual, n.threshold});
    self(self, n.left);
    prefix.back().direction = Direction::kGreater;
    self(self, n.right);
    prefix.pop_back();
  };
  visit(visit, 0);
  return out;
}

/// Hyperparameters a forest was trained with, kept for reproducibility.
struct TrainingInfo {
  std::string criterion;
  std::size_t max_depth = 0;
  std::size_t num_trees = 0;
  std::size_t features_per_split = 0;
  std::size_t min_samples_split = 2;
  bool bootstrap = false;
  std::uint64_t seed = 0;
  friend bool operator==(const TrainingInfo&, const TrainingInfo&) = default;
};

/// Majority-vote ensemble of K >= 1 trees over a fixed feature space.
class TreeEnsemble {
 public:
  TreeEnsemble(std::vector<DecisionTree> trees, FeatureSpace space,
               std::vector<double> importances = {},
               std::optional<TrainingInfo> training = std::nullopt)
      : trees_(std::move(trees)),
        space_(std::move(space)),
        importances_(std::move(importances)),
        training_(std::move(training)) {
    if (trees_.empty()) throw Error(ErrorKind::kInvalidArgument, "ensemble needs at least one tree");
    for (std::size_t k = 0; k < trees_.size(); ++k) {
      if (const auto f = trees_[k].max_feature(); f && *f >= space_.size()) {
        throw Error(ErrorKind::kCorruptModel, "tree " + std::to_string(k) +
                                                  " tests feature " + std::to_string(*f) +
                                                  " outside the feature space");
      }
    }
    if (importances_.empty()) importances_.assign(space_.size(), 0.0);
    check_length(importances_.size(), space_.size(), "importances");
  }

  std::size_t size() const { return trees_.size(); }
  std::size_t num_features() const { return space_.size(); }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  const DecisionTree& tree(std::size_t k) const { return trees_.at(k); }
  const FeatureSpace& feature_space() const { return space_; }
  const std::vector<double>& importances() const { return importances_; }
  const std::optional<TrainingInfo>& training() const { return training_; }

  /// Sum of the trees' +-1 votes.
  int vote_sum(std::span<const double> x) const {
    check_length(x.size(), space_.size(), "instance");
    int sum = 0;
    for (const auto& t : trees_) sum += t.nodes()[t.leaf_index(x)].label;
    return sum;
  }

  int predict(std::span<const double> x) const { return vote_sum(x) <= 0 ? -1 : 1; }
  int predict(const Instance& x) const { return predict(x.view()); }

  /// Fraction of trees voting +1; used as a ranking score.
  double positive_fraction(std::span<const double> x) const {
    const int sum = vote_sum(x);
    const auto k = static_cast<int>(trees_.size());
    return static_cast<double>(sum + k) / (2.0 * k);
  }

  TreeEnsemble with_importances(std::vector<double> importances) const {
    return TreeEnsemble(trees_, space_, std::move(importances), training_);
  }
  TreeEnsemble with_feature_space(FeatureSpace space) const {
    return TreeEnsemble(trees_, std::move(space), importances_, training_);
  }

 private:
  std::vector<DecisionTree> trees_;
  FeatureSpace space_;
  std::vector<double> importances_;
  std::optional<TrainingInfo> training_;
};

inline int predict_ensemble(const TreeEnsemble& ens, const Instance& x) {
  return ens.predict(x);
}

}  // namespace treetweak
