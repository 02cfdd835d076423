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

// CART-style tree induction and bagged random forests for {-1,+1} labels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "treetweak/error.hpp"
#include "treetweak/feature_space.hpp"
#include "treetweak/forest.hpp"
#include "treetweak/parallel.hpp"

namespace treetweak {

enum class Criterion { kGini, kEntropy };

inline std::string_view to_string(Criterion c) {
  return c == Criterion::kGini ? "gini" : "entropy";
}

inline std::optional<Criterion> parse_criterion(std::string_view text) {
  if (text == "gini") return Criterion::kGini;
  if (text == "entropy") return Criterion::kEntropy;
  return std::nullopt;
}

struct TrainConfig {
  Criterion criterion = Criterion::kGini;
  std::size_t max_depth = 0;           // 0: number of features
  std::size_t num_trees = 1;
  std::size_t features_per_split = 0;  // 0: ceil(sqrt(number of features))
  std::size_t min_samples_split = 2;
  std::optional<bool> bootstrap;       // unset: true iff num_trees > 1
  std::uint64_t seed = 0;
  std::size_t workers = 1;             // 0: hardware concurrency

  /// Fills defaults for an `n`-feature problem and validates the ranges.
  TrainConfig resolved(std::size_t n) const {
    TrainConfig out = *this;
    if (n == 0) throw Error(ErrorKind::kInvalidArgument, "no features to train on");
    if (out.max_depth == 0) out.max_depth = n;
    if (out.features_per_split == 0) {
      out.features_per_split = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    }
    if (!out.bootstrap) out.bootstrap = out.num_trees > 1;
    if (out.num_trees < 1) throw Error(ErrorKind::kInvalidArgument, "num_trees must be >= 1");
    if (out.features_per_split > n) {
      throw Error(ErrorKind::kInvalidArgument, "features_per_split must be in [1, n]");
    }
    if (out.min_samples_split < 2) {
      throw Error(ErrorKind::kInvalidArgument, "min_samples_split must be >= 2");
    }
    return out;
  }
};

/// Impurity of a node holding `neg` negative and `pos` positive samples.
inline double impurity(std::size_t neg, std::size_t pos, Criterion criterion) {
  const std::size_t total = neg + pos;
  if (total == 0) throw Error(ErrorKind::kEmptyNode, "impurity of an empty node");
  const double pn = static_cast<double>(neg) / static_cast<double>(total);
  const double pp = static_cast<double>(pos) / static_cast<double>(total);
  if (criterion == Criterion::kGini) return 1.0 - pn * pn - pp * pp;
  double h = 0.0;
  if (pn > 0.0) h -= pn * std::log2(pn);
  if (pp > 0.0) h -= pp * std::log2(pp);
  return h;
}

/// Majority label; a tie goes to -1 like the ensemble vote.
inline int majority_label(std::size_t neg, std::size_t pos) { return pos > neg ? 1 : -1; }

namespace detail {

struct Dataset {
  std::size_t n = 0;
  std::vector<std::vector<double>> columns;  // feature-major
  std::vector<int> labels;
};

inline Dataset to_columns(std::span<const Instance> data) {
  if (data.empty()) throw Error(ErrorKind::kEmptyDataset, "no training instances");
  Dataset ds;
  ds.n = data.front().size();
  ds.columns.assign(ds.n, std::vector<double>(data.size()));
  ds.labels.resize(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    check_length(data[r].size(), ds.n, "training instance");
    if (!data[r].label) {
      throw Error(ErrorKind::kInvalidArgument,
                  "training instance " + std::to_string(r) + " has no label");
    }
    ds.labels[r] = checked_label(*data[r].label);
    for (std::size_t j = 0; j < ds.n; ++j) ds.columns[j][r] = data[r].values[j];
  }
  return ds;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, const TrainConfig& cfg, std::mt19937_64& rng)
      : ds_(ds), cfg_(cfg), rng_(rng), importance_(ds.n, 0.0) {}

  DecisionTree build(std::vector<std::size_t> samples) {
    root_size_ = static_cast<double>(samples.size());
    nodes_.clear();
    grow(samples, 0);
    return DecisionTree(std::move(nodes_));
  }

  const std::vector<double>& importance() const { return importance_; }

 private:
  struct Split {
    std::size_t feature = Node::kLeaf;
    double threshold = 0.0;
    double gain = -1.0;
  };

  std::size_t grow(std::vector<std::size_t>& samples, std::size_t depth) {
    std::size_t pos = 0;
    for (std::size_t s : samples) pos += ds_.labels[s] == 1 ? 1 : 0;
    const std::size_t neg = samples.size() - pos;

    const std::size_t self = nodes_.size();
    nodes_.push_back(Node{});
    nodes_[self].label = majority_label(neg, pos);
    if (pos == 0 || neg == 0 || depth >= cfg_.max_depth ||
        samples.size() < cfg_.min_samples_split) {
      return self;
    }
    const Split split = best_split(samples, neg, pos);
    if (split.feature == Node::kLeaf) return self;

    importance_[split.feature] +=
        static_cast<double>(samples.size()) / root_size_ * std::max(0.0, split.gain);

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t s : samples) {
      (ds_.columns[split.feature][s] <= split.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    nodes_[self].feature = split.feature;
    nodes_[self].threshold = split.threshold;
    nodes_[self].left = grow(left, depth + 1);
    nodes_[self].right = grow(right, depth + 1);
    return self;
  }

  std::vector<std::size_t> sample_features() {
    std::vector<std::size_t> features(ds_.n);
    std::iota(features.begin(), features.end(), 0);
    for (std::size_t i = 0; i < cfg_.features_per_split; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, ds_.n - 1);
      std::swap(features[i], features[pick(rng_)]);
    }
    features.resize(cfg_.features_per_split);
    return features;
  }

  // Best (feature, midpoint threshold) by impurity decrease over a random
  // feature subset. Zero-gain splits are allowed so that interaction-only
  // structure (e.g. XOR) can still be learnt; ties keep the first candidate.
  Split best_split(const std::vector<std::size_t>& samples, std::size_t neg, std::size_t pos) {
    const double total = static_cast<double>(samples.size());
    const double parent = impurity(neg, pos, cfg_.criterion);
    Split best;
    std::vector<std::size_t> order(samples);
    for (std::size_t f : sample_features()) {
      const auto& col = ds_.columns[f];
      std::sort(order.begin(), order.end(), [&col](std::size_t a, std::size_t b) {
        return col[a] < col[b] || (col[a] == col[b] && a < b);
      });
      std::size_t left_neg = 0;
      std::size_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        (ds_.labels[order[i]] == 1 ? left_pos : left_neg) += 1;
        const double here = col[order[i]];
        const double next = col[order[i + 1]];
        if (!(here < next)) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = total - nl;
        const double child = nl / total * impurity(left_neg, left_pos, cfg_.criterion) +
                             nr / total * impurity(neg - left_neg, pos - left_pos, cfg_.criterion);
        const double gain = parent - child;
        if (gain > best.gain + 1e-12) {
          best.feature = f;
          best.threshold = here + (next - here) / 2.0;
          best.gain = gain;
        }
      }
    }
    return best;
  }

  const Dataset& ds_;
  const TrainConfig& cfg_;
  std::mt19937_64& rng_;
  std::vector<Node> nodes_;
  std::vector<double> importance_;
  double root_size_ = 1.0;
};

inline std::vector<std::size_t> bootstrap_sample(std::size_t m, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  std::vector<std::size_t> out(m);
  for (auto& s : out) s = pick(rng);
  return out;
}

inline std::vector<double> normalized(std::vector<double> v) {
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (sum > 0.0) {
    for (auto& x : v) x /= sum;
  }
  return v;
}

}  // namespace detail

/// Grows one tree on all of `data` (no resampling). `rng` drives the
/// per-node feature subsampling.
inline DecisionTree train_tree(std::span<const Instance> data, const TrainConfig& cfg,
                               std::mt19937_64& rng) {
  const auto ds = detail::to_columns(data);
  const auto resolved = cfg.resolved(ds.n);
  detail::TreeBuilder builder(ds, resolved, rng);
  std::vector<std::size_t> all(ds.labels.size());
  std::iota(all.begin(), all.end(), 0);
  return builder.build(std::move(all));
}

/// Trains `num_trees` trees. Tree k draws from its own generator seeded by
/// mix_seed(seed, k), so the result is independent of the worker count.
/// Importances are the tree-averaged, sum-normalized mean decrease in
/// impurity recorded while growing.
inline TreeEnsemble train_forest(std::span<const Instance> data, const FeatureSpace& space,
                                 const TrainConfig& cfg) {
  const auto ds = detail::to_columns(data);
  check_length(ds.n, space.size(), "feature space");
  const auto resolved = cfg.resolved(ds.n);
  const std::size_t k_trees = resolved.num_trees;
  const std::size_t m = ds.labels.size();

  std::vector<std::optional<DecisionTree>> trees(k_trees);
  std::vector<std::vector<double>> per_tree(k_trees);
  parallel_for(k_trees, resolved.workers, [&](std::size_t k) {
    std::mt19937_64 rng(mix_seed(resolved.seed, k));
    std::vector<std::size_t> samples;
    if (*resolved.bootstrap) {
      samples = detail::bootstrap_sample(m, rng);
    } else {
      samples.resize(m);
      std::iota(samples.begin(), samples.end(), 0);
    }
    detail::TreeBuilder builder(ds, resolved, rng);
    trees[k] = builder.build(std::move(samples));
    per_tree[k] = builder.importance();
  });

  std::vector<double> importance(ds.n, 0.0);
  std::vector<DecisionTree> out;
  out.reserve(k_trees);
  for (std::size_t k = 0; k < k_trees; ++k) {
    for (std::size_t j = 0; j < ds.n; ++j) importance[j] += per_tree[k][j] / static_cast<double>(k_trees);
    out.push_back(std::move(*trees[k]));
  }

  TrainingInfo info;
  info.criterion = std::string(to_string(resolved.criterion));
  info.max_depth = resolved.max_depth;
  info.num_trees = k_trees;
  info.features_per_split = resolved.features_per_split;
  info.min_samples_split = resolved.min_samples_split;
  info.bootstrap = *resolved.bootstrap;
  info.seed = resolved.seed;
  return TreeEnsemble(std::move(out), space, detail::normalized(std::move(importance)), info);
}

/// Mean decrease in impurity measured by routing `data` through every tree:
/// per internal node, (fraction of samples reaching it) x (impurity
/// decrease of its split), summed per split feature, averaged over trees and
/// normalized to sum 1. All zeros when no split separates anything.
inline std::vector<double> feature_importances(const TreeEnsemble& ens,
                                               std::span<const Instance> data) {
  const auto ds = detail::to_columns(data);
  check_length(ds.n, ens.num_features(), "instance");
  Criterion criterion = Criterion::kGini;
  if (const auto& info = ens.training()) {
    criterion = parse_criterion(info->criterion).value_or(Criterion::kGini);
  }
  const double m = static_cast<double>(data.size());
  std::vector<double> importance(ds.n, 0.0);
  for (const auto& tree : ens.trees()) {
    std::vector<std::size_t> neg(tree.size(), 0);
    std::vector<std::size_t> pos(tree.size(), 0);
    for (const auto& inst : data) {
      std::size_t i = 0;
      for (;;) {
        (*inst.label == 1 ? pos : neg)[i] += 1;
        const Node& n = tree.node(i);
        if (n.is_leaf()) break;
        i = inst.values[n.feature] <= n.threshold ? n.left : n.right;
      }
    }
    for (std::size_t i = 0; i < tree.size(); ++i) {
      const Node& n = tree.node(i);
      const std::size_t here = neg[i] + pos[i];
      if (n.is_leaf() || here == 0) continue;
      double child = 0.0;
      for (std::size_t c : {n.left, n.right}) {
        const std::size_t sz = neg[c] + pos[c];
        if (sz > 0) {
          child += static_cast<double>(sz) / static_cast<double>(here) *
                   impurity(neg[c], pos[c], criterion);
        }
      }
      const double gain = impurity(neg[i], pos[i], criterion) - child;
      importance[n.feature] += static_cast<double>(here) / m * std::max(0.0, gain);
    }
  }
  for (auto& v : importance) v /= static_cast<double>(ens.size());
  return detail::normalized(std::move(importance));
}

struct ClassifierMetrics {
  double f1 = 0.0;
  double mcc = 0.0;
  double roc_auc = 0.0;
  double accuracy = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t true_negatives = 0;
  std::size_t false_negatives = 0;
};

/// Area under the ROC curve via the Mann-Whitney statistic with mid-ranks
/// for tied scores.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_length(labels.size(), scores.size(), "labels");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  std::size_t npos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i) + static_cast<double>(j) + 1.0) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        positive_rank_sum += mid_rank;
        ++npos;
      }
    }
    i = j;
  }
  const std::size_t nneg = scores.size() - npos;
  if (npos == 0 || nneg == 0) {
    throw Error(ErrorKind::kDegenerateLabels, "ROC AUC needs both classes");
  }
  const double np = static_cast<double>(npos);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(nneg));
}

/// F1 (positive class +1), Matthews correlation and ROC AUC, the latter
/// scored by the fraction of trees voting +1.
inline ClassifierMetrics evaluate_predictions(std::span<const int> predicted,
                                              std::span<const double> scores,
                                              std::span<const int> labels) {
  check_length(predicted.size(), labels.size(), "predictions");
  ClassifierMetrics out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predicted[i] == 1;
    const bool y = labels[i] == 1;
    if (p && y) ++out.true_positives;
    if (p && !y) ++out.false_positives;
    if (!p && !y) ++out.true_negatives;
    if (!p && y) ++out.false_negatives;
  }
  if (out.true_positives + out.false_negatives == 0 ||
      out.true_negatives + out.false_positives == 0) {
    throw Error(ErrorKind::kDegenerateLabels, "evaluation set contains a single class");
  }
  const double tp = static_cast<double>(out.true_positives);
  const double fp = static_cast<double>(out.false_positives);
  const double tn = static_cast<double>(out.true_negatives);
  const double fn = static_cast<double>(out.false_negatives);
  out.accuracy = (tp + tn) / (tp + tn + fp + fn);
  out.f1 = (2 * tp + fp + fn) > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
  const double denom = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  out.mcc = denom > 0 ? (tp * tn - fp * fn) / denom : 0.0;
  out.roc_auc = roc_auc(scores, labels);
  return out;
}

inline ClassifierMetrics evaluate_classifier(const TreeEnsemble& ens,
                                             std::span<const Instance> test) {
  std::vector<int> predicted;
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& inst : test) {
    if (!inst.label) throw Error(ErrorKind::kInvalidArgument, "test instance has no label");
    predicted.push_back(ens.predict(inst));
    scores.push_back(ens.positive_fraction(inst.view()));
    labels.push_back(*inst.label);
  }
  return evaluate_predictions(predicted, scores, labels);
}

/// Splits labelled data into (train, test) keeping the class ratio: each
/// class is shuffled with `seed` and round(test_fraction * size) of it held
/// out. Relative order of instances is preserved inside each part.
inline std::pair<std::vector<Instance>, std::vector<Instance>> stratified_split(
    std::span<const Instance> data, double test_fraction, std::uint64_t seed) {
  std::vector<bool> held_out(data.size(), false);
  std::mt19937_64 rng(seed);
  for (int cls : {-1, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i].label && *data[i].label == cls) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto take = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(members.size())));
    for (std::size_t i = 0; i < take && i < members.size(); ++i) held_out[members[i]] = true;
  }
  std::pair<std::vector<Instance>, std::vector<Instance>> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (held_out[i] ? out.second : out.first).push_back(data[i]);
  }
  return out;
}

}  // namespace treetweak
