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
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "test_support.hpp"

namespace {

using namespace treetweak;

std::string write_temp(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / ("treetweak_fs_" + name);
  std::ofstream(path) << contents;
  return path.string();
}

FeatureSpace two_feature_space() {
  return FeatureSpace({continuous_feature("a"), continuous_feature("b")});
}

TEST(FitStandardizer, TwoPointColumnUsesSampleStd) {
  const FeatureSpace schema({continuous_feature("a")});
  RawTable table{{"a"}, {{2.0}, {4.0}}};
  const auto space = fit_standardizer(table, schema);
  EXPECT_DOUBLE_EQ(space[0].mean, 3.0);
  EXPECT_DOUBLE_EQ(space[0].std_dev, std::sqrt(2.0));
  const auto lo = standardize(std::vector<double>{2.0}, space);
  const auto hi = standardize(std::vector<double>{4.0}, space);
  EXPECT_NEAR(lo.values[0], -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(hi.values[0], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(FitStandardizer, ConstantColumnIsRejected) {
  const FeatureSpace schema({continuous_feature("a")});
  RawTable table{{"a"}, {{5.0}, {5.0}, {5.0}}};
  try {
    fit_standardizer(table, schema);
    FAIL() << "expected ZeroVariance";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kZeroVariance);
  }
}

TEST(FitStandardizer, ColumnMismatchAndTooFewRows) {
  RawTable wrong{{"a", "c"}, {{1.0, 2.0}, {3.0, 4.0}}};
  try {
    fit_standardizer(wrong, two_feature_space());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchemaMismatch);
  }
  RawTable single{{"a", "b"}, {{1.0, 2.0}}};
  EXPECT_THROW(fit_standardizer(single, two_feature_space()), Error);
}

TEST(FitStandardizer, StandardizedColumnsHaveZeroMeanUnitStd) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<FeatureMeta> metas;
  for (int j = 0; j < 10; ++j) metas.push_back(continuous_feature("c" + std::to_string(j)));
  const FeatureSpace schema(metas);
  RawTable table;
  table.columns = schema.names();
  for (int r = 0; r < 250; ++r) {
    std::vector<double> row;
    for (int j = 0; j < 10; ++j) row.push_back(100.0 * j + (j + 1) * 7.5 * d(rng));
    table.rows.push_back(row);
  }
  const auto space = fit_standardizer(table, schema);
  for (int j = 0; j < 10; ++j) {
    // Recompute sample statistics of the transformed column independently.
    std::vector<double> z;
    for (const auto& row : table.rows) z.push_back(standardize(row, space).values[j]);
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    double ss = 0.0;
    for (double v : z) ss += (v - mean) * (v - mean);
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_NEAR(std::sqrt(ss / (z.size() - 1.0)), 1.0, 1e-9);
  }
}

TEST(Standardize, KnownValues) {
  std::vector<FeatureMeta> metas{continuous_feature("a")};
  metas[0].mean = 10.0;
  metas[0].std_dev = 2.0;
  const FeatureSpace space(metas);
  EXPECT_DOUBLE_EQ(standardize(std::vector<double>{10.0}, space).values[0], 0.0);
  EXPECT_DOUBLE_EQ(standardize(std::vector<double>{14.0}, space).values[0], 2.0);
  try {
    standardize(std::vector<double>{1.0, 2.0}, space);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLengthMismatch);
  }
}

TEST(Destandardize, InverseTransform) {
  std::vector<FeatureMeta> metas{continuous_feature("a"), continuous_feature("b")};
  metas[0].mean = 3.0;
  metas[0].std_dev = 2.0;
  metas[1].mean = -1.0;
  metas[1].std_dev = 0.5;
  const FeatureSpace space(metas);
  EXPECT_EQ(destandardize(std::vector<double>{0.0, 0.0}, space), (std::vector<double>{3.0, -1.0}));
  EXPECT_DOUBLE_EQ(destandardize(std::vector<double>{1.0, 0.0}, space)[0], 5.0);
  EXPECT_THROW(destandardize(std::vector<double>{1.0}, space), Error);

  // A tweak theta +- eps in z-units is t +- eps * sigma in raw units, where
  // t is the raw threshold.
  const double t = 7.0;
  const double theta = (t - 3.0) / 2.0;
  const double eps = 0.1;
  EXPECT_NEAR(destandardize(std::vector<double>{theta + eps, 0.0}, space)[0], t + eps * 2.0, 1e-12);
  EXPECT_NEAR(destandardize(std::vector<double>{theta - eps, 0.0}, space)[0], t - eps * 2.0, 1e-12);
}

TEST(Standardize, RoundTripProperty) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_real_distribution<double> s(0.01, 20.0);
  std::vector<FeatureMeta> metas;
  for (int j = 0; j < 8; ++j) {
    auto f = continuous_feature("f" + std::to_string(j));
    f.mean = u(rng);
    f.std_dev = s(rng);
    metas.push_back(f);
  }
  const FeatureSpace space(metas);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> raw(8);
    for (auto& v : raw) v = u(rng);
    const auto back = destandardize(standardize(raw, space), space);
    for (int j = 0; j < 8; ++j) ASSERT_NEAR(back[j], raw[j], 1e-9);
  }
}

TEST(OneHot, EncodeDecode) {
  const std::vector<std::string> cats{"a", "b", "c"};
  EXPECT_EQ(one_hot_encode("b", cats), (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(one_hot_encode("a", cats), (std::vector<double>{1, 0, 0}));
  for (const auto& c : cats) EXPECT_EQ(one_hot_decode(one_hot_encode(c, cats), cats), c);
  try {
    one_hot_encode("z", cats);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownCategory);
  }
}

TEST(OneHot, ColumnEncodingHasExactlyOneHotPerRow) {
  const std::vector<std::string> cats{"red", "green", "blue"};
  const std::vector<std::string> column{"green", "red", "blue", "blue"};
  const auto cols = one_hot_encode(column, cats);
  ASSERT_EQ(cols.size(), 3u);
  for (std::size_t r = 0; r < column.size(); ++r) {
    double sum = 0.0;
    for (const auto& c : cols) sum += c[r];
    EXPECT_EQ(sum, 1.0);
  }
  EXPECT_EQ(cols[1][0], 1.0);
}

TEST(FeatureSpaceSchema, RejectsDuplicateNamesAndGroupsMembers) {
  EXPECT_THROW(FeatureSpace({continuous_feature("a"), continuous_feature("a")}), Error);
  const FeatureSpace space({continuous_feature("x"), one_hot_feature("color", "red"),
                            one_hot_feature("color", "blue")});
  ASSERT_EQ(space.one_hot_groups().size(), 1u);
  EXPECT_EQ(space.one_hot_groups().at("color"), (std::vector<std::size_t>{1, 2}));
  EXPECT_FALSE(space.adjustable(1));
  EXPECT_TRUE(space.adjustable(0));
  EXPECT_EQ(space[1].name, "color=red");
}

TEST(LoadTable, LabelledNumericFile) {
  const auto path = write_temp("numeric.csv", "a,b,label\n1,10,-1\n2,11,1\n3,13,-1\n4,20,1\n");
  const auto loaded = load_table(path);
  EXPECT_EQ(loaded.space.size(), 2u);
  ASSERT_EQ(loaded.instances.size(), 4u);
  EXPECT_EQ(*loaded.instances[0].label, -1);
  EXPECT_EQ(*loaded.instances[3].label, 1);
  EXPECT_DOUBLE_EQ(loaded.space[0].mean, 2.5);
}

TEST(LoadTable, ZeroLabelIsAParseError) {
  const auto path = write_temp("zero_label.csv", "a,label\n1,0\n2,1\n");
  try {
    load_table(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadTable, CategoricalColumnExpandsToOneHot) {
  const auto path = write_temp("cat.csv",
                               "x,color,label\n1,red,-1\n2,green,1\n3,blue,1\n4,red,-1\n");
  const auto loaded = load_table(path);
  // 2 original columns - 1 categorical + 3 categories.
  EXPECT_EQ(loaded.space.size(), 4u);
  EXPECT_EQ(loaded.space.one_hot_groups().at("color").size(), 3u);
  // Per-row the raw group values hold exactly one 1.
  for (const auto& inst : loaded.instances) {
    const auto raw = destandardize(inst, loaded.space);
    double sum = 0.0;
    for (std::size_t i : loaded.space.one_hot_groups().at("color")) sum += raw[i];
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(LoadTable, SchemaMismatchAndMissingFile) {
  const auto path = write_temp("mismatch.csv", "a,b\n1,2\n3,4\n");
  TableSchema schema;
  schema.columns.resize(2);
  schema.columns[0].name = "a";
  schema.columns[1].name = "c";
  try {
    load_table(path, schema);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchemaMismatch);
  }
  try {
    load_table("/nonexistent/file.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIoError);
  }
  const auto ragged = write_temp("ragged.csv", "a,b\n1,2\n3\n");
  EXPECT_THROW(load_table(ragged), Error);
}

TEST(LoadInstances, UsesStoredStatisticsAndCategories) {
  const auto train = write_temp("train.csv", "x,color,label\n1,red,-1\n3,blue,1\n5,red,1\n");
  const auto loaded = load_table(train);
  const auto path = write_temp("apply.csv", "color,x\nblue,3\nred,7\n");
  const auto insts = load_instances(path, loaded.space);
  ASSERT_EQ(insts.size(), 2u);
  EXPECT_FALSE(insts[0].label.has_value());
  const auto x_index = *loaded.space.index_of("x");
  EXPECT_DOUBLE_EQ(insts[0].values[x_index], 0.0);  // mean of 1,3,5
  EXPECT_DOUBLE_EQ(insts[1].values[x_index], 2.0);  // (7-3)/2
  const auto bad = write_temp("apply_bad.csv", "color,x\npurple,3\n");
  EXPECT_THROW(load_instances(bad, loaded.space), Error);
}

}  // namespace
