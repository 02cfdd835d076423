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

// Actionable feature tweaking for majority-vote tree ensembles.
//
// Given an instance x the ensemble labels -1, every tree that votes -1 is
// inspected. For each of its positive root-to-leaf paths an
// epsilon-satisfactory instance is built: each feature the path tests is
// moved just inside the path's conditions (threshold - eps for "<=",
// threshold + eps for ">"), all other features keep x's value. Candidates
// the whole ensemble labels +1 are kept and the cheapest under the chosen
// cost wins.
//
// A path may test the same feature several times. Its conditions are folded
// into one interval (lower, upper]; a one-sided interval gets the bound -/+
// eps, a two-sided one gets upper - eps provided that still exceeds lower.
// Features that are not adjustable must already lie inside their interval
// and are never modified.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "treetweak/costs.hpp"
#include "treetweak/error.hpp"
#include "treetweak/feature_space.hpp"
#include "treetweak/forest.hpp"
#include "treetweak/log.hpp"
#include "treetweak/parallel.hpp"

namespace treetweak {

struct TweakOptions {
  double epsilon = 0.05;  // in standard deviations
  CostFunction cost = CostFunction::kEuclidean;
  // Keep an adjustable feature untouched when x already satisfies its
  // interval instead of snapping it to threshold -/+ eps.
  bool skip_satisfied = false;
  // Maximum number of (tree, positive path) pairs examined; 0 = unlimited.
  std::size_t budget = 0;
  std::size_t workers = 1;  // 0: hardware concurrency

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw Error(ErrorKind::kInvalidArgument, "epsilon must be a positive finite number");
    }
  }
};

/// Conditions of one path on one feature, folded into (lower, upper].
struct FeatureInterval {
  std::size_t feature = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double v) const { return lower < v && v <= upper; }
  friend bool operator==(const FeatureInterval&, const FeatureInterval&) = default;
};

/// Folded intervals ordered by feature index.
inline std::vector<FeatureInterval> fold_conditions(std::span<const Condition> conditions) {
  std::map<std::size_t, FeatureInterval> by_feature;
  for (const auto& c : conditions) {
    auto& iv = by_feature.try_emplace(c.feature, FeatureInterval{c.feature}).first->second;
    if (c.direction == Direction::kLessEqual) {
      iv.upper = std::min(iv.upper, c.threshold);
    } else {
      iv.lower = std::max(iv.lower, c.threshold);
    }
  }
  std::vector<FeatureInterval> out;
  out.reserve(by_feature.size());
  for (auto& [f, iv] : by_feature) out.push_back(iv);
  return out;
}

/// Why a path could not be turned into a candidate.
struct Infeasible {
  std::size_t feature = 0;
  std::string reason;
};

using BuildResult = std::variant<Instance, Infeasible>;

/// Builds the epsilon-satisfactory instance of a path given as folded
/// intervals.
inline BuildResult build_positive_instance(const Instance& x,
                                           std::span<const FeatureInterval> intervals,
                                           double epsilon, const FeatureSpace& space,
                                           bool skip_satisfied = false) {
  check_length(x.size(), space.size(), "instance");
  Instance out{x.values, x.label};
  for (const auto& iv : intervals) {
    const double current = x.values[iv.feature];
    if (!space.adjustable(iv.feature)) {
      if (!iv.contains(current)) {
        return Infeasible{iv.feature, "non-adjustable feature '" + space[iv.feature].name +
                                          "' violates the path"};
      }
      continue;
    }
    if (skip_satisfied && iv.contains(current)) continue;
    double value = 0.0;
    if (std::isfinite(iv.upper)) {
      value = iv.upper - epsilon;
      if (!(value > iv.lower)) {
        return Infeasible{iv.feature, "interval on '" + space[iv.feature].name +
                                          "' is narrower than epsilon"};
      }
    } else {
      value = iv.lower + epsilon;
    }
    // Guards against eps being absorbed by a huge threshold.
    if (!iv.contains(value)) {
      return Infeasible{iv.feature, "epsilon step on '" + space[iv.feature].name +
                                        "' is lost to rounding"};
    }
    out.values[iv.feature] = value;
  }
  return out;
}

/// Builds the epsilon-satisfactory instance of a positive path.
inline BuildResult build_positive_instance(const Instance& x, const Path& path, double epsilon,
                                           const FeatureSpace& space,
                                           bool skip_satisfied = false) {
  if (path.leaf_label != 1) {
    throw Error(ErrorKind::kInvalidArgument, "path does not end in a positive leaf");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorKind::kInvalidArgument, "epsilon must be positive");
  const auto intervals = fold_conditions(path.conditions);
  return build_positive_instance(x, intervals, epsilon, space, skip_satisfied);
}

/// A candidate x' with its provenance and cost. Incomparable candidates
/// (cost undefined for this pair) carry cost = +infinity.
struct Transformation {
  Instance candidate;
  std::size_t source_tree = 0;
  std::size_t source_path = 0;
  double cost = 0.0;
  std::vector<std::size_t> changed_indices;

  bool comparable() const { return std::isfinite(cost); }
};

/// Orders by cost, then (tree, path).
inline bool cheaper(const Transformation& a, const Transformation& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.source_tree != b.source_tree) return a.source_tree < b.source_tree;
  return a.source_path < b.source_path;
}

struct SearchStats {
  std::size_t trees_searched = 0;
  std::size_t paths_examined = 0;
  std::size_t infeasible = 0;
  std::size_t rejected_by_ensemble = 0;
  std::size_t incomparable = 0;
  bool budget_exhausted = false;

  SearchStats& operator+=(const SearchStats& o) {
    trees_searched += o.trees_searched;
    paths_examined += o.paths_examined;
    infeasible += o.infeasible;
    rejected_by_ensemble += o.rejected_by_ensemble;
    incomparable += o.incomparable;
    budget_exhausted = budget_exhausted || o.budget_exhausted;
    return *this;
  }
};

struct Found {
  Transformation best;
  std::vector<Transformation> all_candidates;  // in (tree, path) order
};

struct NotCovered {
  std::string reason;
};

struct TweakOutcome {
  std::variant<Found, NotCovered> result;
  SearchStats stats;

  bool found() const { return std::holds_alternative<Found>(result); }
  const Found& get() const { return std::get<Found>(result); }
  const Found* if_found() const { return std::get_if<Found>(&result); }
};

namespace detail {

inline std::vector<std::size_t> changed_indices(std::span<const double> x,
                                                std::span<const double> y) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) out.push_back(i);
  }
  return out;
}

inline Transformation make_transformation(const Instance& x, Instance candidate,
                                          std::size_t tree, std::size_t path,
                                          CostFunction cost_fn, SearchStats& stats) {
  Transformation t;
  t.source_tree = tree;
  t.source_path = path;
  t.changed_indices = changed_indices(x.values, candidate.values);
  const auto c = try_cost(cost_fn, x.values, candidate.values);
  if (c) {
    t.cost = *c;
  } else {
    t.cost = std::numeric_limits<double>::infinity();
    ++stats.incomparable;
    log::warn("candidate from tree ", tree, " path ", path, " is incomparable under ",
              to_string(cost_fn));
  }
  t.candidate = std::move(candidate);
  return t;
}

inline TweakOutcome to_outcome(std::vector<Transformation> candidates, SearchStats stats) {
  if (candidates.empty()) {
    std::string reason = "no epsilon-satisfactory instance flips the ensemble";
    if (stats.trees_searched == 0) reason = "no tree voting -1 has a positive path";
    if (stats.budget_exhausted) reason += " (search budget exhausted)";
    return TweakOutcome{NotCovered{std::move(reason)}, stats};
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (cheaper(candidates[i], candidates[best])) best = i;
  }
  Transformation winner = candidates[best];
  return TweakOutcome{Found{std::move(winner), std::move(candidates)}, stats};
}

inline void require_negative(const TreeEnsemble& ens, const Instance& x) {
  if (ens.predict(x) != -1) {
    throw Error(ErrorKind::kNotNegative, "the ensemble already predicts +1 for this instance");
  }
}

}  // namespace detail

/// Feature tweaking over a fixed ensemble. Positive paths of every tree are
/// extracted and folded once at construction and reused for every query.
class FeatureTweaker {
 public:
  struct CachedPath {
    std::size_t path_index = 0;
    std::vector<FeatureInterval> intervals;
  };

  explicit FeatureTweaker(const TreeEnsemble& ens) : ens_(ens), paths_(ens.size()) {
    for (std::size_t k = 0; k < ens.size(); ++k) {
      for (const auto& p : extract_paths(ens.tree(k), Polarity::kPositive, k)) {
        paths_[k].push_back(CachedPath{p.path_index, fold_conditions(p.conditions)});
      }
    }
  }

  const TreeEnsemble& ensemble() const { return ens_; }
  const std::vector<CachedPath>& positive_paths(std::size_t tree) const { return paths_.at(tree); }

  /// All valid candidates for a model-negative x, in (tree, path) order.
  std::vector<Transformation> candidate_set(const Instance& x, const TweakOptions& opts,
                                            SearchStats* stats_out = nullptr) const {
    opts.validate();
    check_length(x.size(), ens_.num_features(), "instance");
    const int overall = ens_.predict(x);

    // Trees agreeing with a -1 overall vote, each with how many of its
    // positive paths fit in the budget.
    struct Work {
      std::size_t tree;
      std::size_t limit;
    };
    std::vector<Work> work;
    std::size_t remaining = opts.budget == 0 ? std::numeric_limits<std::size_t>::max() : opts.budget;
    bool exhausted = false;
    for (std::size_t k = 0; k < ens_.size(); ++k) {
      const int vote = ens_.tree(k).predict(x.values);
      if (!(overall == vote && vote == -1) || paths_[k].empty()) continue;
      const std::size_t take = std::min(remaining, paths_[k].size());
      if (take < paths_[k].size()) exhausted = true;
      if (take == 0) break;
      work.push_back({k, take});
      remaining -= take;
    }
    if (exhausted) {
      log::warn("search budget of ", opts.budget, " paths exhausted; result may be suboptimal");
    }

    std::vector<std::vector<Transformation>> found(work.size());
    std::vector<SearchStats> stats(work.size());
    parallel_for(work.size(), opts.workers, [&](std::size_t w) {
      const auto [k, limit] = work[w];
      auto& st = stats[w];
      st.trees_searched = 1;
      for (std::size_t j = 0; j < limit; ++j) {
        const auto& path = paths_[k][j];
        ++st.paths_examined;
        auto built = build_positive_instance(x, path.intervals, opts.epsilon,
                                             ens_.feature_space(), opts.skip_satisfied);
        if (auto* bad = std::get_if<Infeasible>(&built)) {
          ++st.infeasible;
          log::debug("tree ", k, " path ", path.path_index, " infeasible: ", bad->reason);
          continue;
        }
        auto& candidate = std::get<Instance>(built);
        if (ens_.predict(candidate) != 1) {
          ++st.rejected_by_ensemble;
          continue;
        }
        found[w].push_back(detail::make_transformation(x, std::move(candidate), k,
                                                       path.path_index, opts.cost, st));
      }
    });

    std::vector<Transformation> out;
    SearchStats total;
    total.budget_exhausted = exhausted;
    for (std::size_t w = 0; w < work.size(); ++w) {
      total += stats[w];
      for (auto& t : found[w]) out.push_back(std::move(t));
    }
    if (stats_out != nullptr) *stats_out = total;
    return out;
  }

  /// Cheapest candidate for a model-negative x; NotCovered if none exists.
  TweakOutcome tweak(const Instance& x, const TweakOptions& opts) const {
    detail::require_negative(ens_, x);
    SearchStats stats;
    auto candidates = candidate_set(x, opts, &stats);
    return detail::to_outcome(std::move(candidates), stats);
  }

 private:
  const TreeEnsemble& ens_;
  std::vector<std::vector<CachedPath>> paths_;
};

inline std::vector<Transformation> candidate_set(const TreeEnsemble& ens, const Instance& x,
                                                 const TweakOptions& opts) {
  return FeatureTweaker(ens).candidate_set(x, opts);
}

inline TweakOutcome tweak(const TreeEnsemble& ens, const Instance& x, const TweakOptions& opts) {
  return FeatureTweaker(ens).tweak(x, opts);
}

enum class SearchScope { kAllTrees, kNegativeVotingTrees };

inline constexpr std::size_t kBruteForcePathLimit = 100000;

/// Exhaustive reference search used to check `tweak`. It walks every tree
/// recursively (no path extraction or caching), builds the
/// epsilon-satisfactory instance of every positive leaf in scope, keeps those
/// the ensemble labels +1 and returns the minimum by (cost, tree, path).
/// kAllTrees also searches trees that already vote +1.
inline TweakOutcome brute_force_tweak(const TreeEnsemble& ens, const Instance& x,
                                      const TweakOptions& opts,
                                      SearchScope scope = SearchScope::kAllTrees,
                                      std::size_t path_limit = kBruteForcePathLimit) {
  opts.validate();
  if (opts.skip_satisfied) {
    throw Error(ErrorKind::kInvalidArgument, "brute_force_tweak does not support skip_satisfied");
  }
  detail::require_negative(ens, x);
  const auto& space = ens.feature_space();
  const std::size_t n = space.size();

  std::vector<bool> in_scope(ens.size());
  std::size_t positive_leaves = 0;
  for (std::size_t k = 0; k < ens.size(); ++k) {
    in_scope[k] = scope == SearchScope::kAllTrees || ens.tree(k).predict(x.values) == -1;
    if (!in_scope[k]) continue;
    for (const auto& node : ens.tree(k).nodes()) positive_leaves += node.is_leaf() && node.label == 1;
  }
  if (positive_leaves > path_limit) {
    throw Error(ErrorKind::kTooLarge, std::to_string(positive_leaves) +
                                          " positive paths exceed the limit of " +
                                          std::to_string(path_limit));
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<Transformation> candidates;
  SearchStats stats;
  for (std::size_t k = 0; k < ens.size(); ++k) {
    if (!in_scope[k]) continue;
    ++stats.trees_searched;
    const DecisionTree& tree = ens.tree(k);
    std::vector<double> lower(n, -kInf);
    std::vector<double> upper(n, kInf);
    std::vector<bool> touched(n, false);
    std::size_t leaf_ordinal = 0;

    const auto visit = [&](const auto& self, std::size_t i) -> void {
      const Node& node = tree.node(i);
      if (node.is_leaf()) {
        const std::size_t ordinal = leaf_ordinal++;
        if (node.label != 1) return;
        ++stats.paths_examined;
        Instance candidate{x.values, x.label};
        for (std::size_t f = 0; f < n; ++f) {
          if (!touched[f]) continue;
          const double v = x.values[f];
          const bool inside = lower[f] < v && v <= upper[f];
          if (!space.adjustable(f)) {
            if (!inside) {
              ++stats.infeasible;
              return;
            }
            continue;
          }
          double target = upper[f] < kInf ? upper[f] - opts.epsilon : lower[f] + opts.epsilon;
          if (!(lower[f] < target && target <= upper[f])) {
            ++stats.infeasible;
            return;
          }
          candidate.values[f] = target;
        }
        if (ens.predict(candidate) != 1) {
          ++stats.rejected_by_ensemble;
          return;
        }
        candidates.push_back(
            detail::make_transformation(x, std::move(candidate), k, ordinal, opts.cost, stats));
        return;
      }
      const std::size_t f = node.feature;
      const double saved_lower = lower[f];
      const double saved_upper = upper[f];
      const bool saved_touched = touched[f];
      touched[f] = true;
      upper[f] = std::min(saved_upper, node.threshold);
      self(self, node.left);
      upper[f] = saved_upper;
      lower[f] = std::max(saved_lower, node.threshold);
      self(self, node.right);
      lower[f] = saved_lower;
      touched[f] = saved_touched;
    };
    visit(visit, 0);
  }

  if (candidates.empty()) {
    return TweakOutcome{NotCovered{"exhaustive search found no valid candidate"}, stats};
  }
  std::vector<Transformation> sorted = candidates;
  std::sort(sorted.begin(), sorted.end(), cheaper);
  return TweakOutcome{Found{sorted.front(), std::move(candidates)}, stats};
}

}  // namespace treetweak
