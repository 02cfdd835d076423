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

// treetweak command-line tool: train | tweak | sweep | report | synth.
//
// Exit status: 0 on success, 2 when an input file cannot be read or an
// output cannot be written, 1 for any other error. Diagnostics go to stderr;
// results go to the files named on the command line.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "treetweak/treetweak.hpp"

namespace tt = treetweak;

namespace {

struct TrainArgs {
  std::string data_path;
  std::string model_out;
  std::string criterion = "gini";
  std::size_t trees = 100;
  std::size_t max_depth = 0;
  std::size_t features_per_split = 0;
  std::size_t min_samples_split = 2;
  bool no_bootstrap = false;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  double test_fraction = 0.2;
  std::vector<std::string> immutable;
  bool adjustable_one_hot = false;
};

struct TweakArgs {
  std::string model_path;
  std::string instances_path;
  double epsilon = 0.05;
  std::string delta = "cosine";
  std::size_t top_k = 3;
  std::string out_path;
  std::size_t workers = 0;
  std::size_t budget = 0;
  bool allow_satisfied_skip = false;
};

struct SweepArgs {
  std::string model_path;
  std::string instances_path;
  std::vector<double> epsilon_grid{tt::kDefaultEpsilonGrid.begin(), tt::kDefaultEpsilonGrid.end()};
  std::vector<std::string> deltas;
  std::string report_out;
  std::string log_out;
  std::size_t workers = 0;
  std::size_t budget = 0;
  bool allow_satisfied_skip = false;
};

struct ReportArgs {
  std::string recommendations_path;
  std::string ratings_path;
  std::string out_path;
};

struct SynthArgs {
  std::string out_path;
  std::size_t rows = 2000;
  std::size_t features = 10;
  double separation = 1.0;
  std::uint64_t seed = 1;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw tt::Error(tt::ErrorKind::kIoError, "cannot write '" + path + "'");
  return out;
}

tt::CostFunction cost_by_name(const std::string& name) {
  const auto f = tt::parse_cost_function(name);
  if (!f) {
    throw tt::Error(tt::ErrorKind::kInvalidArgument,
                    "unknown delta '" + name +
                        "' (expected tweaked_feature_rate|euclidean|cosine|jaccard|pearson)");
  }
  return *f;
}

// ---------------------------------------------------------------------------

int cmd_train(const TrainArgs& args) {
  const auto table = tt::csv::read(args.data_path);
  auto schema = tt::infer_schema(table);
  for (const auto& name : args.immutable) {
    const auto it = std::find_if(schema.columns.begin(), schema.columns.end(),
                                 [&](const auto& c) { return c.name == name; });
    if (it == schema.columns.end()) {
      throw tt::Error(tt::ErrorKind::kSchemaMismatch, "--immutable names unknown column '" + name + "'");
    }
    it->adjustable = false;
  }
  if (args.adjustable_one_hot) {
    for (auto& c : schema.columns) {
      if (c.type == tt::ColumnType::kCategorical && !c.adjustable.has_value()) c.adjustable = true;
    }
  }
  const auto loaded = tt::load_table(table, schema);
  for (std::size_t i = 0; i < loaded.instances.size(); ++i) {
    if (!loaded.instances[i].label) {
      throw tt::Error(tt::ErrorKind::kSchemaMismatch, "training data needs a 'label' column");
    }
  }

  auto [train, test] = tt::stratified_split(loaded.instances, args.test_fraction, args.seed);
  if (train.empty()) throw tt::Error(tt::ErrorKind::kEmptyDataset, "no training rows after the split");

  tt::TrainConfig cfg;
  const auto criterion = tt::parse_criterion(args.criterion);
  if (!criterion) throw tt::Error(tt::ErrorKind::kInvalidArgument, "criterion must be gini or entropy");
  cfg.criterion = *criterion;
  cfg.num_trees = args.trees;
  cfg.max_depth = args.max_depth;
  cfg.features_per_split = args.features_per_split;
  cfg.min_samples_split = args.min_samples_split;
  if (args.no_bootstrap) cfg.bootstrap = false;
  cfg.seed = args.seed;
  cfg.workers = args.workers;

  const auto model = tt::train_forest(train, loaded.space, cfg);
  tt::save_model(model, args.model_out);
  std::cerr << "trained " << model.size() << " trees on " << train.size() << " rows, "
            << model.num_features() << " features; model written to " << args.model_out << "\n";
  if (test.empty()) {
    std::cerr << "no held-out rows; skipping evaluation\n";
    return 0;
  }
  try {
    const auto m = tt::evaluate_classifier(model, test);
    std::cerr << "holdout (" << test.size() << " rows): F1=" << tt::csv::format_number(m.f1, 6)
              << " MCC=" << tt::csv::format_number(m.mcc, 6)
              << " ROC_AUC=" << tt::csv::format_number(m.roc_auc, 6)
              << " accuracy=" << tt::csv::format_number(m.accuracy, 6) << "\n";
  } catch (const tt::Error& e) {
    std::cerr << "holdout evaluation skipped: " << e.what() << "\n";
  }
  return 0;
}

int cmd_tweak(const TweakArgs& args) {
  const auto model = tt::load_model(args.model_path);
  const auto instances = tt::load_instances(args.instances_path, model.feature_space());
  if (args.top_k < 1) throw tt::Error(tt::ErrorKind::kInvalidArgument, "--top-k must be >= 1");

  tt::TweakOptions opts;
  opts.epsilon = args.epsilon;
  opts.cost = cost_by_name(args.delta);
  opts.budget = args.budget;
  opts.skip_satisfied = args.allow_satisfied_skip;
  opts.workers = 1;
  opts.validate();

  const tt::FeatureTweaker tweaker(model);
  std::vector<tt::InstanceReport> reports(instances.size());
  tt::parallel_for(instances.size(), args.workers, [&](std::size_t i) {
    const auto& x = instances[i];
    auto& rep = reports[i];
    rep.instance = i;
    if (model.predict(x) != -1) {
      rep.status = "skipped_positive";
      return;
    }
    const auto outcome = tweaker.tweak(x, opts);
    if (!outcome.found()) {
      rep.status = "not_covered";
      return;
    }
    rep.status = "found";
    const auto top = tt::top_k_transformations(outcome, args.top_k);
    for (std::size_t r = 0; r < top.size(); ++r) {
      rep.transformations.push_back(tt::make_transformation_report(x, top[r], r + 1, model));
    }
  });

  tt::RecommendationDocument doc;
  doc.epsilon = opts.epsilon;
  doc.delta = std::string(tt::to_string(opts.cost));
  doc.top_k = args.top_k;
  for (const auto& rep : reports) {
    if (rep.status != "skipped_positive") ++doc.eligible;
    if (rep.status == "found") ++doc.covered;
  }
  doc.instances = std::move(reports);
  auto out = open_output(args.out_path);
  out << tt::to_json(doc);

  const std::size_t skipped = instances.size() - doc.eligible;
  if (doc.eligible == 0) {
    std::cerr << "0 eligible (" << skipped << " skipped as already positive)\n";
  } else {
    std::cerr << doc.eligible << " eligible, " << doc.covered << " covered, coverage "
              << tt::csv::format_number(static_cast<double>(doc.covered) / doc.eligible, 6) << " ("
              << skipped << " skipped as already positive)\n";
  }
  return 0;
}

int cmd_sweep(const SweepArgs& args) {
  const auto model = tt::load_model(args.model_path);
  const auto instances = tt::load_instances(args.instances_path, model.feature_space());
  std::vector<tt::CostFunction> costs;
  if (args.deltas.empty()) {
    costs.assign(tt::kAllCostFunctions.begin(), tt::kAllCostFunctions.end());
  } else {
    for (const auto& d : args.deltas) costs.push_back(cost_by_name(d));
  }
  tt::TweakOptions base;
  base.budget = args.budget;
  base.skip_satisfied = args.allow_satisfied_skip;
  base.workers = args.workers;
  for (double eps : args.epsilon_grid) {
    base.epsilon = eps;
    base.validate();
  }
  const auto report = tt::sweep(model, instances, args.epsilon_grid, costs, base);
  {
    auto out = open_output(args.report_out);
    tt::write_sweep_csv(report, out);
  }
  if (!args.log_out.empty()) {
    auto log = open_output(args.log_out);
    tt::write_outcome_log_csv(report, log);
  }
  const std::size_t eligible = report.rows.empty() ? 0 : report.rows.front().eligible;
  std::cerr << report.rows.size() << " rows written to " << args.report_out << " (" << eligible
            << " eligible of " << instances.size() << " instances)\n";
  return 0;
}

int cmd_report(const ReportArgs& args) {
  std::ifstream in(args.recommendations_path, std::ios::binary);
  if (!in) throw tt::Error(tt::ErrorKind::kIoError, "cannot open '" + args.recommendations_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto doc = tt::recommendations_from_json(buf.str());
  const auto ranked = tt::ranked_recommendations(doc);

  using ojson = nlohmann::ordered_json;
  ojson root;
  std::map<std::size_t, std::string> names;
  if (ranked.empty()) {
    root["frequency"] = nullptr;
    root["rank_correlation"] = nullptr;
    std::cerr << "no covered instances in " << args.recommendations_path << "\n";
  } else {
    const auto freq = tt::feature_frequency_report(ranked, 3);
    ojson tables;
    for (std::size_t level = 0; level < freq.levels.size(); ++level) {
      ojson rows = ojson::array();
      for (const auto& f : freq.levels[level]) {
        names[f.feature_index] = f.feature_name;
        rows.push_back(ojson{{"feature", f.feature_name},
                             {"count", f.count},
                             {"frequency", f.frequency}});
      }
      tables["top_" + std::to_string(level + 1)] = std::move(rows);
    }
    root["frequency"] = std::move(tables);

    // Rankings over the union of features, absent features scoring 0.
    std::vector<std::vector<double>> scores(freq.levels.size(), std::vector<double>(names.size(), 0.0));
    std::map<std::size_t, std::size_t> column;
    for (const auto& [idx, name] : names) column.emplace(idx, column.size());
    for (std::size_t level = 0; level < freq.levels.size(); ++level) {
      for (const auto& f : freq.levels[level]) scores[level][column[f.feature_index]] = f.frequency;
    }
    ojson corr;
    for (std::size_t a = 0; a < scores.size(); ++a) {
      for (std::size_t b = a + 1; b < scores.size(); ++b) {
        const std::string key = "top_" + std::to_string(a + 1) + "_vs_top_" + std::to_string(b + 1);
        try {
          corr[key] = tt::rank_correlation(tt::ranks_from_scores(scores[a]),
                                           tt::ranks_from_scores(scores[b]));
        } catch (const tt::Error&) {
          corr[key] = nullptr;
        }
      }
    }
    root["rank_correlation"] = std::move(corr);
  }

  if (!args.ratings_path.empty()) {
    // Ratings refer to features by name; resolve against every feature the
    // document recommends.
    std::vector<tt::FeatureMeta> metas;
    std::map<std::size_t, std::string> all_names;
    for (const auto& inst : doc.instances) {
      for (const auto& t : inst.transformations) {
        for (const auto& r : t.recommendations) all_names[r.feature_index] = r.feature_name;
      }
    }
    for (const auto& [idx, name] : all_names) metas.push_back(tt::continuous_feature(name));
    const tt::FeatureSpace recommended(std::move(metas));
    const auto ratings = tt::load_ratings(tt::csv::read(args.ratings_path), recommended);
    const auto scores = tt::helpfulness(ratings);
    std::map<std::size_t, std::array<std::size_t, 3>> tally;
    for (const auto& r : ratings) ++tally[r.feature_index][static_cast<int>(r.verdict)];
    std::vector<std::pair<std::size_t, double>> ranking(scores.begin(), scores.end());
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    ojson rows = ojson::array();
    for (const auto& [idx, score] : ranking) {
      rows.push_back(ojson{{"feature", recommended[idx].name},
                           {"helpfulness", score},
                           {"helpful", tally[idx][0]},
                           {"non_helpful", tally[idx][1]},
                           {"non_actionable", tally[idx][2]}});
    }
    root["helpfulness"] = std::move(rows);
  }

  auto out = open_output(args.out_path);
  out << root.dump(1) << "\n";
  return 0;
}

int cmd_synth(const SynthArgs& args) {
  const auto data = tt::synthetic::two_gaussians(args.rows, args.features, args.separation, args.seed);
  auto out = open_output(args.out_path);
  tt::synthetic::write_csv(data, tt::synthetic::default_names(args.features), out);
  return 0;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const tt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == tt::ErrorKind::kIoError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Actionable feature tweaking for tree ensembles"};
  app.require_subcommand(1);
  int status = 0;

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a random forest from a labelled CSV");
  train_cmd->add_option("--data", train.data_path, "Labelled CSV (last column 'label' in {-1,+1})")->required();
  train_cmd->add_option("--model", train.model_out, "Output model file")->required();
  train_cmd->add_option("--criterion", train.criterion, "gini | entropy");
  train_cmd->add_option("--trees,-K", train.trees, "Number of trees")->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-depth", train.max_depth, "Maximum depth (0: number of features)");
  train_cmd->add_option("--features-per-split", train.features_per_split, "Features tried per split (0: ceil(sqrt(n)))");
  train_cmd->add_option("--min-samples-split", train.min_samples_split, "Minimum samples to split a node");
  train_cmd->add_flag("--no-bootstrap", train.no_bootstrap, "Train every tree on the full data");
  train_cmd->add_option("--seed", train.seed, "Random seed");
  train_cmd->add_option("--workers", train.workers, "Worker threads (0: all cores)");
  train_cmd->add_option("--test-fraction", train.test_fraction, "Stratified holdout fraction")
      ->check(CLI::Range(0.0, 0.9));
  train_cmd->add_option("--immutable", train.immutable, "Columns that cannot be adjusted")->delimiter(',');
  train_cmd->add_flag("--adjustable-onehot", train.adjustable_one_hot, "Allow tweaking one-hot features");
  train_cmd->callback([&] { status = guarded([&] { return cmd_train(train); }); });

  TweakArgs tweak;
  auto* tweak_cmd = app.add_subcommand("tweak", "Recommend feature changes for negative instances");
  tweak_cmd->add_option("--model", tweak.model_path, "Model file")->required();
  tweak_cmd->add_option("--data", tweak.instances_path, "Instances CSV (raw units)")->required();
  tweak_cmd->add_option("--epsilon", tweak.epsilon, "Tolerance in standard deviations");
  tweak_cmd->add_option("--delta", tweak.delta, "Cost function");
  tweak_cmd->add_option("--top-k", tweak.top_k, "Transformations reported per instance");
  tweak_cmd->add_option("--out", tweak.out_path, "Output recommendations JSON")->required();
  tweak_cmd->add_option("--workers", tweak.workers, "Worker threads (0: all cores)");
  tweak_cmd->add_option("--budget", tweak.budget, "Maximum paths examined per instance (0: unlimited)");
  tweak_cmd->add_flag("--allow-satisfied-skip", tweak.allow_satisfied_skip,
                      "Leave features that already satisfy a path condition unchanged");
  tweak_cmd->callback([&] { status = guarded([&] { return cmd_tweak(tweak); }); });

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Coverage and cost over an epsilon x delta grid");
  sweep_cmd->add_option("--model", sweep.model_path, "Model file")->required();
  sweep_cmd->add_option("--data", sweep.instances_path, "Instances CSV (raw units)")->required();
  sweep_cmd->add_option("--epsilon-grid", sweep.epsilon_grid, "Comma-separated tolerances")->delimiter(',');
  sweep_cmd->add_option("--delta", sweep.deltas, "Comma-separated cost functions (default: all)")->delimiter(',');
  sweep_cmd->add_option("--out", sweep.report_out, "Output report CSV")->required();
  sweep_cmd->add_option("--log", sweep.log_out, "Optional per-instance outcome CSV");
  sweep_cmd->add_option("--workers", sweep.workers, "Worker threads (0: all cores)");
  sweep_cmd->add_option("--budget", sweep.budget, "Maximum paths examined per instance (0: unlimited)");
  sweep_cmd->add_flag("--allow-satisfied-skip", sweep.allow_satisfied_skip,
                      "Leave features that already satisfy a path condition unchanged");
  sweep_cmd->callback([&] { status = guarded([&] { return cmd_sweep(sweep); }); });

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Frequency, rank-correlation and helpfulness tables");
  report_cmd->add_option("--recommendations", report.recommendations_path, "JSON from 'tweak'")->required();
  report_cmd->add_option("--ratings", report.ratings_path, "Optional CSV feature_name,verdict");
  report_cmd->add_option("--out", report.out_path, "Output JSON")->required();
  report_cmd->callback([&] { status = guarded([&] { return cmd_report(report); }); });

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded two-Gaussian labelled CSV");
  synth_cmd->add_option("--out", synth.out_path, "Output CSV")->required();
  synth_cmd->add_option("--rows", synth.rows, "Number of rows");
  synth_cmd->add_option("--features", synth.features, "Number of features")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--separation", synth.separation, "Class mean gap per feature");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->callback([&] { status = guarded([&] { return cmd_synth(synth); }); });

  CLI11_PARSE(app, argc, argv);
  return status;
}
