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
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using namespace treetweak;
using nlohmann::json;

struct CliResult {
  int status = -1;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("treetweak_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  CliResult cli(const std::string& args) const {
    const auto err_path = path("stderr.txt");
    const std::string cmd =
        std::string(TREETWEAK_CLI_PATH) + " " + args + " > /dev/null 2> " + err_path;
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.err = slurp(err_path);
    return r;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static void write(const std::string& p, const std::string& text) { std::ofstream(p) << text; }

  // Small labelled two-Gaussian file and a model trained on it.
  std::string trained_model(std::size_t trees = 10) {
    const auto data = path("data.csv");
    EXPECT_EQ(cli("synth --out " + data + " --rows 400 --features 4 --seed 5").status, 0);
    const auto model = path("model.json");
    EXPECT_EQ(cli("train --data " + data + " --model " + model + " --trees " +
                  std::to_string(trees) + " --seed 9 --workers 1")
                  .status,
              0);
    return model;
  }

  fs::path dir_;
};

TEST_F(Cli, TrainWritesModelAndPrintsMetrics) {
  const auto model = trained_model();
  EXPECT_TRUE(fs::exists(model));
  const auto r = cli("train --data " + path("data.csv") + " --model " + path("m2.json") + " --trees 10 --seed 9");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.err.find("F1="), std::string::npos);
  EXPECT_NE(r.err.find("MCC="), std::string::npos);
  EXPECT_NE(r.err.find("AUC="), std::string::npos);
}

TEST_F(Cli, MissingFileExitsTwoAndNamesPath) {
  const auto missing = path("nope.csv");
  const auto r = cli("train --data " + missing + " --model " + path("m.json"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find(missing), std::string::npos);
}

TEST_F(Cli, SameSeedGivesIdenticalModelFiles) {
  trained_model();
  const auto data = path("data.csv");
  ASSERT_EQ(cli("train --data " + data + " --model " + path("a.json") + " --trees 8 --seed 4 --workers 1").status, 0);
  ASSERT_EQ(cli("train --data " + data + " --model " + path("b.json") + " --trees 8 --seed 4 --workers 0").status, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(Cli, MalformedInputsFail) {
  write(path("bad.csv"), "a,label\n1,0\n2,1\n");
  EXPECT_EQ(cli("train --data " + path("bad.csv") + " --model " + path("m.json")).status, 1);
  const auto model = trained_model(3);
  EXPECT_NE(cli("tweak --model " + model + " --data " + path("data.csv") + " --delta manhattan --out " +
                path("o.json"))
                .status,
            0);
  EXPECT_NE(cli("tweak --model " + model + " --data " + path("data.csv") + " --epsilon 0 --out " +
                path("o.json"))
                .status,
            0);
}

TEST_F(Cli, AllPositiveInstancesAreSkipped) {
  const TreeEnsemble ens({DecisionTree::leaf(1)}, tt_test::plain_space(1));
  save_model(ens, path("pos.json"));
  write(path("x.csv"), "x0\n0.5\n-2\n");
  const auto r = cli("tweak --model " + path("pos.json") + " --data " + path("x.csv") + " --out " +
                     path("out.json"));
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.err.find("0 eligible"), std::string::npos);
  const auto doc = json::parse(slurp(path("out.json")));
  for (const auto& inst : doc["instances"]) EXPECT_EQ(inst["status"], "skipped_positive");
}

TEST_F(Cli, StumpFixtureYieldsKnownCandidate) {
  const auto s = DecisionTree::split(0, 0.0, DecisionTree::leaf(-1), DecisionTree::leaf(1));
  save_model(TreeEnsemble({s}, tt_test::plain_space(1), {1.0}), path("stump.json"));
  write(path("x.csv"), "x0\n-1\n");
  const auto r = cli("tweak --model " + path("stump.json") + " --data " + path("x.csv") +
                     " --epsilon 0.1 --delta euclidean --out " + path("out.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto doc = json::parse(slurp(path("out.json")));
  const auto& t = doc["instances"][0]["transformations"][0];
  EXPECT_DOUBLE_EQ(t["candidate"][0].get<double>(), 0.1);
  EXPECT_DOUBLE_EQ(t["cost"].get<double>(), 1.1);
  EXPECT_EQ(t["recommendations"][0]["direction"], "increase");
  EXPECT_EQ(doc["coverage"], 1.0);
}

TEST_F(Cli, TweakOutputRevalidatesUnderLoadedModel) {
  const auto model_path = trained_model(15);
  const auto r = cli("tweak --model " + model_path + " --data " + path("data.csv") +
                     " --epsilon 0.1 --top-k 3 --out " + path("out.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("eligible"), std::string::npos);
  const auto model = load_model(model_path);
  const auto instances = load_instances(path("data.csv"), model.feature_space());
  const auto doc = recommendations_from_json(slurp(path("out.json")));
  std::size_t checked = 0, found = 0;
  for (const auto& inst : doc.instances) {
    const auto& x = instances.at(inst.instance);
    EXPECT_EQ(inst.status == "skipped_positive", model.predict(x) == 1);
    found += inst.status == "found";
    ASSERT_LE(inst.transformations.size(), 3u);
    for (const auto& t : inst.transformations) {
      EXPECT_EQ(model.predict(t.candidate), 1);
      const auto p = route(model.tree(t.source_tree), t.candidate);
      EXPECT_EQ(p.leaf_label, 1);
      EXPECT_EQ(p.path_index, t.source_path);
      ++checked;
    }
  }
  EXPECT_EQ(found, doc.covered);
  EXPECT_GT(checked, 0u);
}

TEST_F(Cli, SweepWritesTwentyFiveRowsAndCoverageMatchesLog) {
  const auto model = trained_model(10);
  const auto r = cli("sweep --model " + model + " --data " + path("data.csv") + " --out " +
                     path("sweep.csv") + " --log " + path("log.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = csv::read(path("sweep.csv"));
  ASSERT_EQ(report.rows.size(), 25u);
  const auto log = csv::read(path("log.csv"));
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> recount;
  for (const auto& row : log.rows) {
    auto& [cov, total] = recount[{row[0], row[1]}];
    cov += row[3] == "1";
    total += 1;
  }
  for (const auto& row : report.rows) {
    const auto& [cov, total] = recount.at({row[0], row[1]});
    EXPECT_EQ(std::stoi(row[2]), total);
    EXPECT_EQ(std::stoi(row[3]), cov);
    EXPECT_DOUBLE_EQ(*csv::parse_double(row[4]), static_cast<double>(cov) / total);
  }
}

TEST_F(Cli, SweepOfPositiveOnlyInstancesHasEmptyCosts) {
  const TreeEnsemble ens({DecisionTree::leaf(1)}, tt_test::plain_space(1));
  save_model(ens, path("pos.json"));
  write(path("x.csv"), "x0\n1\n");
  ASSERT_EQ(cli("sweep --model " + path("pos.json") + " --data " + path("x.csv") + " --out " +
                path("sweep.csv"))
                .status,
            0);
  const auto report = csv::read(path("sweep.csv"));
  ASSERT_EQ(report.rows.size(), 25u);
  for (const auto& row : report.rows) {
    EXPECT_EQ(row[4], "0");
    EXPECT_EQ(row[10], "");
    EXPECT_EQ(row[11], "");
  }
}

TEST_F(Cli, ReportFrequenciesHelpfulnessAndCorrelation) {
  const auto model = trained_model(15);
  ASSERT_EQ(cli("tweak --model " + model + " --data " + path("data.csv") + " --top-k 3 --out " +
                path("recs.json"))
                .status,
            0);
  write(path("ratings.csv"),
        "feature_name,verdict\nf0,helpful\nf0,helpful\nf0,helpful\nf0,non-helpful\n"
        "f1,helpful\nf1,non-actionable\nf1,non-helpful\n");
  const auto r = cli("report --recommendations " + path("recs.json") + " --ratings " +
                     path("ratings.csv") + " --out " + path("report.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rep = json::parse(slurp(path("report.json")));

  std::map<std::string, double> help;
  for (const auto& row : rep["helpfulness"]) help[row["feature"]] = row["helpfulness"];
  EXPECT_EQ(help.at("f0"), 0.75);
  EXPECT_EQ(help.at("f1"), 0.5);

  // Recount frequencies offline from the recommendations file.
  const auto doc = recommendations_from_json(slurp(path("recs.json")));
  const auto ranked = ranked_recommendations(doc);
  std::vector<std::map<std::string, double>> expected(3);
  for (std::size_t level = 1; level <= 3; ++level) {
    double total = 0;
    for (const auto& inst : ranked) {
      for (std::size_t t = 0; t < inst.size() && t < level; ++t) {
        for (const auto& rec : inst[t]) {
          expected[level - 1][rec.feature_name] += 1;
          total += 1;
        }
      }
    }
    for (auto& [name, v] : expected[level - 1]) v /= total;
  }
  std::vector<std::map<std::string, double>> got(3);
  for (std::size_t level = 0; level < 3; ++level) {
    double sum = 0;
    for (const auto& row : rep["frequency"]["top_" + std::to_string(level + 1)]) {
      got[level][row["feature"]] = row["frequency"];
      sum += row["frequency"].get<double>();
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    ASSERT_EQ(got[level].size(), expected[level].size());
    for (const auto& [name, v] : expected[level]) EXPECT_NEAR(got[level].at(name), v, 1e-12);
  }

  // Offline rank correlation between top-1 and top-2 frequency rankings over
  // the union of features (absent = 0).
  std::vector<std::string> names;
  for (const auto& lvl : got) {
    for (const auto& [name, v] : lvl) {
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    }
  }
  std::vector<double> s1, s2;
  for (const auto& n : names) {
    s1.push_back(got[0].count(n) ? got[0].at(n) : 0.0);
    s2.push_back(got[1].count(n) ? got[1].at(n) : 0.0);
  }
  const auto& corr = rep["rank_correlation"]["top_1_vs_top_2"];
  if (!corr.is_null()) {
    // Average ranks then Pearson, computed by hand.
    const auto ranks = [](const std::vector<double>& s) {
      std::vector<double> r(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        double greater = 0, equal = 0;
        for (double v : s) {
          greater += v > s[i];
          equal += v == s[i];
        }
        r[i] = greater + (equal + 1) / 2.0;
      }
      return r;
    };
    const auto a = ranks(s1);
    const auto b = ranks(s2);
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ma += a[i] / n;
      mb += b[i] / n;
    }
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sab += (a[i] - ma) * (b[i] - mb);
      saa += (a[i] - ma) * (a[i] - ma);
      sbb += (b[i] - mb) * (b[i] - mb);
    }
    EXPECT_NEAR(corr.get<double>(), sab / std::sqrt(saa * sbb), 1e-12);
  }
}

TEST_F(Cli, UnknownVerdictIsRejected) {
  const auto model = trained_model(5);
  ASSERT_EQ(cli("tweak --model " + model + " --data " + path("data.csv") + " --out " + path("recs.json")).status, 0);
  write(path("ratings.csv"), "feature_name,verdict\nf0,great\n");
  EXPECT_EQ(cli("report --recommendations " + path("recs.json") + " --ratings " + path("ratings.csv") +
                " --out " + path("r.json"))
                .status,
            1);
}

}  // namespace
