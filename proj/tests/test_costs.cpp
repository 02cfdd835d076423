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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "test_support.hpp"

namespace {

using namespace treetweak;
using V = std::vector<double>;

TEST(TweakedFeatureRate, Examples) {
  EXPECT_EQ(tweaked_feature_rate(V{1, 2, 3, 4}, V{1, 2, 3, 4}), 0.0);
  EXPECT_EQ(tweaked_feature_rate(V{1, 2, 3, 4}, V{1, 2, 9, 4}), 0.25);
  EXPECT_EQ(tweaked_feature_rate(V{1, 2}, V{3, 4}), 1.0);
  try {
    tweaked_feature_rate(V{1, 2}, V{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLengthMismatch);
  }
}

TEST(Euclidean, Examples) {
  EXPECT_EQ(euclidean_distance(V{0, 0}, V{3, 4}), 5.0);
  EXPECT_EQ(euclidean_distance(V{1, -2, 3}, V{1, -2, 3}), 0.0);
  EXPECT_THROW(euclidean_distance(V{1}, V{1, 2}), Error);
}

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cosine_distance(V{1, 0}, V{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_distance(V{1, 1}, V{-1, -1}), 2.0);
  EXPECT_NEAR(cosine_distance(V{1, 2, 3}, V{2, 4, 6}), 0.0, 1e-15);
  try {
    cosine_distance(V{0, 0}, V{1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kZeroVector);
  }
  EXPECT_FALSE(try_cost(CostFunction::kCosine, V{0, 0}, V{1, 0}).has_value());
}

TEST(Jaccard, Examples) {
  EXPECT_EQ(jaccard_distance(V{1, 2, 3, 4}, V{1, 2, 3, 4}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard_distance(V{1, 2, 3, 4}, V{1, 2, 9, 4}), 0.4);
  EXPECT_EQ(jaccard_distance(V{1, 2, 3}, V{4, 5, 6}), 1.0);
}

TEST(Pearson, Examples) {
  EXPECT_EQ(pearson_correlation_distance(V{1, 2, 3}, V{1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(pearson_correlation_distance(V{1, 2, 3}, V{3, 2, 1}), 2.0);
  EXPECT_NEAR(pearson_correlation_distance(V{1, 2, 3}, V{2, 4, 6}), 0.0, 1e-15);
  // Identical constant vectors are exactly zero; otherwise constant input fails.
  EXPECT_EQ(pearson_correlation_distance(V{5, 5, 5}, V{5, 5, 5}), 0.0);
  try {
    pearson_correlation_distance(V{5, 5, 5}, V{1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kZeroVariance);
  }
}

TEST(CostNames, RoundTrip) {
  for (auto f : kAllCostFunctions) EXPECT_EQ(parse_cost_function(to_string(f)), f);
  EXPECT_FALSE(parse_cost_function("manhattan").has_value());
}

class CostProperties : public ::testing::TestWithParam<CostFunction> {};

TEST_P(CostProperties, IdentitySymmetryRange) {
  const CostFunction f = GetParam();
  std::mt19937_64 rng(static_cast<unsigned>(f) + 100);
  std::uniform_int_distribution<std::size_t> len(2, 8);
  std::bernoulli_distribution keep(0.4);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = len(rng);
    const auto x = tt_test::random_vector(rng, n);
    auto y = tt_test::random_vector(rng, n);
    for (std::size_t i = 0; i < n; ++i) {
      if (keep(rng)) y[i] = x[i];  // shared components exercise the count costs
    }
    ASSERT_EQ(cost(f, x, x), 0.0);
    const double d = cost(f, x, y);
    ASSERT_EQ(d, cost(f, y, x));
    ASSERT_GE(d, 0.0);
    const double hi = (f == CostFunction::kCosine || f == CostFunction::kPearson) ? 2.0
                      : f == CostFunction::kEuclidean ? INFINITY
                                                      : 1.0;
    ASSERT_LE(d, hi);
  }
}

INSTANTIATE_TEST_SUITE_P(AllCosts, CostProperties, ::testing::ValuesIn(kAllCostFunctions),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(CostOracles, MatchIndependentFormulas) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto x = tt_test::random_vector(rng, 6);
    const auto y = tt_test::random_vector(rng, 6);
    ASSERT_NEAR(euclidean_distance(x, y), tt_test::oracle_euclidean(x, y), 1e-12);
    ASSERT_NEAR(cosine_distance(x, y), tt_test::oracle_cosine(x, y), 1e-12);
    ASSERT_NEAR(pearson_correlation_distance(x, y), tt_test::oracle_pearson(x, y), 1e-12);
  }
}

TEST(CountCosts, DependOnlyOnChangedSetAndAreMonotone) {
  const std::size_t n = 7;
  const V x{1, 2, 3, 4, 5, 6, 7};
  double prev_rate = 0.0, prev_jac = 0.0;
  for (std::size_t c = 0; c <= n; ++c) {
    V y = x;
    V z = x;
    for (std::size_t i = 0; i < c; ++i) {
      y[i] += 1.0;
      z[n - 1 - i] -= 100.0;  // different values, same count
    }
    const double rate = tweaked_feature_rate(x, y);
    const double jac = jaccard_distance(x, y);
    EXPECT_EQ(rate, tweaked_feature_rate(x, z));
    EXPECT_EQ(jac, jaccard_distance(x, z));
    EXPECT_DOUBLE_EQ(jac, 2.0 * c / (n + c));
    EXPECT_GE(rate, prev_rate);
    EXPECT_GE(jac, prev_jac);
    prev_rate = rate;
    prev_jac = jac;
  }
}

}  // namespace
