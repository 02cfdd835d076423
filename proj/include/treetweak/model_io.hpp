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

// Versioned JSON model files.
//
// Layout (keys always emitted in this order):
//
//   { "format": "treetweak-model", "version": 1,
//     "feature_space": { "features": [ {name, kind, group, category,
//                                       adjustable, mean, std_dev} ... ],
//                        "one_hot_groups": { group: [indices] } },
//     "trees": [ { "depth": d, "nodes": [ {"feature", "threshold", "left",
//                                          "right"} | {"leaf": +-1} ] } ],
//     "importances": [ ... ],
//     "training": { criterion, max_depth, num_trees, features_per_split,
//                   min_samples_split, bootstrap, seed } | null }
//
// Doubles are written in shortest round-trip form, so load followed by save
// reproduces the original bytes.

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "treetweak/error.hpp"
#include "treetweak/feature_space.hpp"
#include "treetweak/forest.hpp"

namespace treetweak {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatName = "treetweak-model";

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson feature_space_to_json(const FeatureSpace& space) {
  ojson features = ojson::array();
  for (const auto& f : space.features()) {
    ojson item;
    item["name"] = f.name;
    if (const auto* m = f.one_hot()) {
      item["kind"] = "one_hot";
      item["group"] = m->group_id;
      item["category"] = m->category_value;
    } else {
      item["kind"] = "continuous";
    }
    item["adjustable"] = f.adjustable;
    item["mean"] = f.mean;
    item["std_dev"] = f.std_dev;
    features.push_back(std::move(item));
  }
  ojson groups = ojson::object();
  for (const auto& [group, members] : space.one_hot_groups()) groups[group] = members;
  ojson out;
  out["features"] = std::move(features);
  out["one_hot_groups"] = std::move(groups);
  return out;
}

inline FeatureSpace feature_space_from_json(const ojson& j) {
  std::vector<FeatureMeta> metas;
  for (const auto& item : j.at("features")) {
    FeatureMeta meta;
    meta.name = item.at("name").get<std::string>();
    const auto kind = item.at("kind").get<std::string>();
    if (kind == "one_hot") {
      meta.kind = OneHotMember{item.at("group").get<std::string>(),
                               item.at("category").get<std::string>()};
    } else if (kind != "continuous") {
      throw Error(ErrorKind::kCorruptModel, "unknown feature kind '" + kind + "'");
    }
    meta.adjustable = item.at("adjustable").get<bool>();
    meta.mean = item.at("mean").get<double>();
    meta.std_dev = item.at("std_dev").get<double>();
    metas.push_back(std::move(meta));
  }
  FeatureSpace space(std::move(metas));
  ojson groups = ojson::object();
  for (const auto& [group, members] : space.one_hot_groups()) groups[group] = members;
  if (groups != j.at("one_hot_groups")) {
    throw Error(ErrorKind::kCorruptModel, "one_hot_groups disagree with feature kinds");
  }
  return space;
}

inline ojson tree_to_json(const DecisionTree& tree) {
  ojson nodes = ojson::array();
  for (const auto& n : tree.nodes()) {
    ojson item;
    if (n.is_leaf()) {
      item["leaf"] = n.label;
    } else {
      item["feature"] = n.feature;
      item["threshold"] = n.threshold;
      item["left"] = n.left;
      item["right"] = n.right;
    }
    nodes.push_back(std::move(item));
  }
  ojson out;
  out["depth"] = tree.depth();
  out["nodes"] = std::move(nodes);
  return out;
}

inline DecisionTree tree_from_json(const ojson& j) {
  std::vector<Node> nodes;
  for (const auto& item : j.at("nodes")) {
    Node n;
    if (item.contains("leaf")) {
      n.label = item.at("leaf").get<int>();
    } else {
      n.feature = item.at("feature").get<std::size_t>();
      n.threshold = item.at("threshold").get<double>();
      n.left = item.at("left").get<std::size_t>();
      n.right = item.at("right").get<std::size_t>();
    }
    nodes.push_back(n);
  }
  DecisionTree tree(std::move(nodes));
  if (tree.depth() != j.at("depth").get<std::size_t>()) {
    throw Error(ErrorKind::kCorruptModel, "recorded tree depth does not match its nodes");
  }
  return tree;
}

}  // namespace detail

inline std::string model_to_string(const TreeEnsemble& ens) {
  detail::ojson doc;
  doc["format"] = kModelFormatName;
  doc["version"] = kModelFormatVersion;
  doc["feature_space"] = detail::feature_space_to_json(ens.feature_space());
  detail::ojson trees = detail::ojson::array();
  for (const auto& t : ens.trees()) trees.push_back(detail::tree_to_json(t));
  doc["trees"] = std::move(trees);
  doc["importances"] = ens.importances();
  if (const auto& info = ens.training()) {
    detail::ojson t;
    t["criterion"] = info->criterion;
    t["max_depth"] = info->max_depth;
    t["num_trees"] = info->num_trees;
    t["features_per_split"] = info->features_per_split;
    t["min_samples_split"] = info->min_samples_split;
    t["bootstrap"] = info->bootstrap;
    t["seed"] = info->seed;
    doc["training"] = std::move(t);
  } else {
    doc["training"] = nullptr;
  }
  return doc.dump(1) + "\n";
}

inline TreeEnsemble model_from_string(const std::string& text) {
  detail::ojson doc;
  try {
    doc = detail::ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kCorruptModel, e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != kModelFormatName) {
      throw Error(ErrorKind::kCorruptModel, "not a treetweak model file");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorKind::kSchemaVersionMismatch,
                  "model version " + std::to_string(version) + ", expected " +
                      std::to_string(kModelFormatVersion));
    }
    auto space = detail::feature_space_from_json(doc.at("feature_space"));
    std::vector<DecisionTree> trees;
    for (const auto& t : doc.at("trees")) trees.push_back(detail::tree_from_json(t));
    auto importances = doc.at("importances").get<std::vector<double>>();
    std::optional<TrainingInfo> training;
    if (const auto& t = doc.at("training"); !t.is_null()) {
      TrainingInfo info;
      info.criterion = t.at("criterion").get<std::string>();
      info.max_depth = t.at("max_depth").get<std::size_t>();
      info.num_trees = t.at("num_trees").get<std::size_t>();
      info.features_per_split = t.at("features_per_split").get<std::size_t>();
      info.min_samples_split = t.at("min_samples_split").get<std::size_t>();
      info.bootstrap = t.at("bootstrap").get<bool>();
      info.seed = t.at("seed").get<std::uint64_t>();
      training = info;
    }
    return TreeEnsemble(std::move(trees), std::move(space), std::move(importances),
                        std::move(training));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kCorruptModel, e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kSchemaVersionMismatch) throw;
    throw Error(ErrorKind::kCorruptModel, e.what());
  }
}

inline void save_model(const TreeEnsemble& ens, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write '" + path + "'");
  out << model_to_string(ens);
  if (!out) throw Error(ErrorKind::kIoError, "failed writing '" + path + "'");
}

inline TreeEnsemble load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_string(buffer.str());
}

}  // namespace treetweak
