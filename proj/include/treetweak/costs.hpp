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

// Transformation costs delta(x, x'). All are symmetric and vanish on x == x'.
//
// Jaccard distance on real vectors treats each vector as the set of its
// (index, value) pairs. With c differing components out of n the two sets
// share n - c pairs and their union holds n + c, so the distance is
// 2c / (n + c). "Changed" always means exact floating inequality.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "treetweak/error.hpp"
#include "treetweak/feature_space.hpp"

namespace treetweak {

enum class CostFunction {
  kTweakedFeatureRate,
  kEuclidean,
  kCosine,
  kJaccard,
  kPearson,
};

inline constexpr std::array<CostFunction, 5> kAllCostFunctions = {
    CostFunction::kTweakedFeatureRate, CostFunction::kEuclidean, CostFunction::kCosine,
    CostFunction::kJaccard, CostFunction::kPearson};

inline std::string_view to_string(CostFunction f) {
  switch (f) {
    case CostFunction::kTweakedFeatureRate: return "tweaked_feature_rate";
    case CostFunction::kEuclidean: return "euclidean";
    case CostFunction::kCosine: return "cosine";
    case CostFunction::kJaccard: return "jaccard";
    case CostFunction::kPearson: return "pearson";
  }
  return "unknown";
}

inline std::optional<CostFunction> parse_cost_function(std::string_view name) {
  for (auto f : kAllCostFunctions) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

/// True for the two costs that only count changed components.
inline bool is_count_based(CostFunction f) {
  return f == CostFunction::kTweakedFeatureRate || f == CostFunction::kJaccard;
}

inline std::size_t changed_count(std::span<const double> x, std::span<const double> y) {
  check_length(y.size(), x.size(), "cost");
  std::size_t c = 0;
  for (std::size_t i = 0; i < x.size(); ++i) c += x[i] != y[i] ? 1 : 0;
  return c;
}

inline double tweaked_feature_rate(std::span<const double> x, std::span<const double> y) {
  const std::size_t c = changed_count(x, y);
  return x.empty() ? 0.0 : static_cast<double>(c) / static_cast<double>(x.size());
}

inline double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  check_length(y.size(), x.size(), "cost");
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(ss);
}

inline double jaccard_distance(std::span<const double> x, std::span<const double> y) {
  const std::size_t c = changed_count(x, y);
  if (c == 0) return 0.0;
  return 2.0 * static_cast<double>(c) / static_cast<double>(x.size() + c);
}

namespace detail {

inline std::optional<double> try_cosine(std::span<const double> x, std::span<const double> y) {
  check_length(y.size(), x.size(), "cost");
  double dot = 0.0;
  double xx = 0.0;
  double yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  if (xx == 0.0 || yy == 0.0) return std::nullopt;
  if (std::equal(x.begin(), x.end(), y.begin())) return 0.0;
  return std::clamp(1.0 - dot / std::sqrt(xx * yy), 0.0, 2.0);
}

inline std::optional<double> try_pearson(std::span<const double> x, std::span<const double> y) {
  check_length(y.size(), x.size(), "cost");
  if (std::equal(x.begin(), x.end(), y.begin())) return 0.0;
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(1.0 - sxy / std::sqrt(sxx * syy), 0.0, 2.0);
}

}  // namespace detail

/// 1 - cos(angle); throws ZeroVector when either vector is all zeros.
inline double cosine_distance(std::span<const double> x, std::span<const double> y) {
  const auto d = detail::try_cosine(x, y);
  if (!d) throw Error(ErrorKind::kZeroVector, "cosine distance of a zero vector");
  return *d;
}

/// 1 - Pearson correlation; 0 when x == x' exactly, otherwise throws
/// ZeroVariance when either vector is constant.
inline double pearson_correlation_distance(std::span<const double> x, std::span<const double> y) {
  const auto d = detail::try_pearson(x, y);
  if (!d) throw Error(ErrorKind::kZeroVariance, "pearson distance of a constant vector");
  return *d;
}

/// Evaluates `f`; nullopt marks an incomparable pair (degenerate input for
/// cosine or pearson). Length mismatches still throw.
inline std::optional<double> try_cost(CostFunction f, std::span<const double> x,
                                      std::span<const double> y) {
  switch (f) {
    case CostFunction::kTweakedFeatureRate: return tweaked_feature_rate(x, y);
    case CostFunction::kEuclidean: return euclidean_distance(x, y);
    case CostFunction::kCosine: return detail::try_cosine(x, y);
    case CostFunction::kJaccard: return jaccard_distance(x, y);
    case CostFunction::kPearson: return detail::try_pearson(x, y);
  }
  return std::nullopt;
}

/// Throwing counterpart of try_cost.
inline double cost(CostFunction f, std::span<const double> x, std::span<const double> y) {
  switch (f) {
    case CostFunction::kCosine: return cosine_distance(x, y);
    case CostFunction::kPearson: return pearson_correlation_distance(x, y);
    default: return *try_cost(f, x, y);
  }
}

}  // namespace treetweak
