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

// Turning transformations into ranked feature-change recommendations, plus
// the frequency / helpfulness / rank-correlation analyses run over them.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "treetweak/csv.hpp"
#include "treetweak/error.hpp"
#include "treetweak/feature_space.hpp"
#include "treetweak/forest.hpp"
#include "treetweak/tweaker.hpp"

namespace treetweak {

enum class ChangeDirection { kIncrease, kDecrease };

inline std::string_view to_string(ChangeDirection d) {
  return d == ChangeDirection::kIncrease ? "increase" : "decrease";
}

struct Recommendation {
  std::size_t feature_index = 0;
  std::string feature_name;
  ChangeDirection direction = ChangeDirection::kIncrease;
  double magnitude_std = 0.0;  // |x'[i] - x[i]|
  double magnitude_raw = 0.0;  // magnitude_std * std_dev
  double from_value_raw = 0.0;
  double to_value_raw = 0.0;
  std::size_t importance_rank = 0;  // 1 = most important feature

  /// x'[i] - x[i] in standardized units.
  double signed_delta() const {
    return direction == ChangeDirection::kIncrease ? magnitude_std : -magnitude_std;
  }
};

/// Feature indices by decreasing ensemble importance, ties by index.
inline std::vector<std::size_t> importance_order(const TreeEnsemble& ens) {
  const auto& imp = ens.importances();
  std::vector<std::size_t> order(imp.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&imp](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
  return order;
}

/// One recommendation per changed component, most important feature first.
inline std::vector<Recommendation> diff_to_recommendations(std::span<const double> x,
                                                           std::span<const double> x_prime,
                                                           const TreeEnsemble& ens) {
  const auto& space = ens.feature_space();
  check_length(x.size(), space.size(), "instance");
  check_length(x_prime.size(), space.size(), "transformation");
  const auto order = importance_order(ens);
  std::vector<std::size_t> rank_of(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank_of[order[r]] = r + 1;

  std::vector<Recommendation> out;
  for (std::size_t i : order) {
    const double r = x_prime[i] - x[i];
    if (x_prime[i] == x[i]) continue;
    const auto& f = space[i];
    Recommendation rec;
    rec.feature_index = i;
    rec.feature_name = f.name;
    rec.direction = r > 0 ? ChangeDirection::kIncrease : ChangeDirection::kDecrease;
    rec.magnitude_std = std::abs(r);
    rec.magnitude_raw = rec.magnitude_std * f.std_dev;
    rec.from_value_raw = f.mean + f.std_dev * x[i];
    rec.to_value_raw = f.mean + f.std_dev * x_prime[i];
    rec.importance_rank = rank_of[i];
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<Recommendation> diff_to_recommendations(const Instance& x,
                                                           const Transformation& t,
                                                           const TreeEnsemble& ens) {
  return diff_to_recommendations(x.values, t.candidate.values, ens);
}

/// "switch <group> from <from> to <to>" for one-hot groups a transformation
/// touches; each side is projected to its arg-max member.
struct CategorySwitch {
  std::string group;
  std::string from;
  std::string to;
};

inline std::vector<CategorySwitch> category_switches(std::span<const double> x,
                                                     std::span<const double> x_prime,
                                                     const FeatureSpace& space) {
  std::vector<CategorySwitch> out;
  const auto raw_x = destandardize(x, space);
  const auto raw_y = destandardize(x_prime, space);
  for (const auto& [group, members] : space.one_hot_groups()) {
    const bool touched = std::any_of(members.begin(), members.end(),
                                     [&](std::size_t i) { return x[i] != x_prime[i]; });
    if (!touched) continue;
    const auto argmax = [&](const std::vector<double>& raw) {
      std::size_t best = members.front();
      for (std::size_t i : members) {
        if (raw[i] > raw[best]) best = i;
      }
      return space[best].one_hot()->category_value;
    };
    CategorySwitch sw{group, argmax(raw_x), argmax(raw_y)};
    if (sw.from != sw.to) out.push_back(std::move(sw));
  }
  return out;
}

/// Up to k cheapest distinct candidates, ordered by (cost, tree, path).
inline std::vector<Transformation> top_k_transformations(const TweakOutcome& outcome,
                                                         std::size_t k) {
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "k must be >= 1");
  const auto* found = outcome.if_found();
  if (found == nullptr) return {};
  std::vector<Transformation> sorted = found->all_candidates;
  std::stable_sort(sorted.begin(), sorted.end(), cheaper);
  std::vector<Transformation> out;
  for (auto& t : sorted) {
    if (out.size() == k) break;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Transformation& o) {
      return o.candidate.values == t.candidate.values;
    });
    if (!duplicate) out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frequency of features among top-k transformations

struct FeatureFrequency {
  std::size_t feature_index = 0;
  std::string feature_name;
  std::size_t count = 0;
  double frequency = 0.0;
};

/// levels[j] describes the top-(j+1) transformations of every instance,
/// sorted by decreasing frequency (ties by feature index).
struct FrequencyReport {
  std::vector<std::vector<FeatureFrequency>> levels;
};

/// Ranked transformations of one instance, each given by its
/// recommendations.
using RankedRecommendations = std::vector<std::vector<Recommendation>>;

/// Relative frequency of each feature among the recommendations of the
/// top-1 .. top-`max_level` transformations of every instance. Every
/// recommendation occurrence counts once, so each level sums to 1.
inline FrequencyReport feature_frequency_report(std::span<const RankedRecommendations> instances,
                                                std::size_t max_level = 3) {
  if (instances.empty()) throw Error(ErrorKind::kEmptyInput, "no recommendation sets");
  FrequencyReport report;
  for (std::size_t level = 1; level <= max_level; ++level) {
    std::map<std::size_t, FeatureFrequency> counts;
    std::size_t total = 0;
    for (const auto& ranked : instances) {
      for (std::size_t t = 0; t < std::min(level, ranked.size()); ++t) {
        for (const auto& rec : ranked[t]) {
          auto& entry = counts[rec.feature_index];
          entry.feature_index = rec.feature_index;
          entry.feature_name = rec.feature_name;
          ++entry.count;
          ++total;
        }
      }
    }
    std::vector<FeatureFrequency> table;
    for (auto& [i, entry] : counts) {
      entry.frequency = static_cast<double>(entry.count) / static_cast<double>(total);
      table.push_back(entry);
    }
    std::stable_sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
      return a.count > b.count;
    });
    report.levels.push_back(std::move(table));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Ratings

enum class Verdict { kHelpful, kNonHelpful, kNonActionable };

inline std::optional<Verdict> parse_verdict(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != '-' && c != '_' && c != ' ') s.push_back(static_cast<char>(std::tolower(c)));
  }
  if (s == "helpful") return Verdict::kHelpful;
  if (s == "nonhelpful") return Verdict::kNonHelpful;
  if (s == "nonactionable") return Verdict::kNonActionable;
  return std::nullopt;
}

struct RatingRecord {
  std::size_t feature_index = 0;
  Verdict verdict = Verdict::kHelpful;
};

/// helpful / (helpful + non-helpful) per feature. Non-actionable ratings do
/// not enter the ratio; features with no helpful or non-helpful rating are
/// omitted.
inline std::map<std::size_t, double> helpfulness(std::span<const RatingRecord> ratings) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> tally;  // helpful, not
  for (const auto& r : ratings) {
    if (r.verdict == Verdict::kHelpful) ++tally[r.feature_index].first;
    if (r.verdict == Verdict::kNonHelpful) ++tally[r.feature_index].second;
  }
  std::map<std::size_t, double> out;
  for (const auto& [f, hn] : tally) {
    out[f] = static_cast<double>(hn.first) / static_cast<double>(hn.first + hn.second);
  }
  return out;
}

/// Reads a `feature_name,verdict` CSV and resolves names against `space`.
inline std::vector<RatingRecord> load_ratings(const csv::Table& table, const FeatureSpace& space) {
  if (table.header.size() != 2) {
    throw Error(ErrorKind::kSchemaMismatch, "ratings need columns feature_name,verdict");
  }
  std::vector<RatingRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = std::to_string(table.line_numbers[r]);
    const auto index = space.index_of(row[0]);
    if (!index) throw Error(ErrorKind::kParseError, "line " + line + ": unknown feature '" + row[0] + "'");
    const auto verdict = parse_verdict(row[1]);
    if (!verdict) throw Error(ErrorKind::kParseError, "line " + line + ": unknown verdict '" + row[1] + "'");
    out.push_back({*index, *verdict});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rank correlation

/// Fractional ranks (1 = largest score, ties share their mean rank).
inline std::vector<double> ranks_from_scores(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> ranks(scores.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = mean_rank;
    i = j;
  }
  return ranks;
}

/// Pearson correlation between two rank vectors over the same features.
inline double rank_correlation(std::span<const double> ranks_a, std::span<const double> ranks_b) {
  check_length(ranks_b.size(), ranks_a.size(), "ranking");
  if (ranks_a.size() < 2) {
    throw Error(ErrorKind::kDegenerateRanking, "need at least 2 ranked features");
  }
  const double n = static_cast<double>(ranks_a.size());
  const double ma = std::accumulate(ranks_a.begin(), ranks_a.end(), 0.0) / n;
  const double mb = std::accumulate(ranks_b.begin(), ranks_b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ranks_a.size(); ++i) {
    sab += (ranks_a[i] - ma) * (ranks_b[i] - mb);
    saa += (ranks_a[i] - ma) * (ranks_a[i] - ma);
    sbb += (ranks_b[i] - mb) * (ranks_b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw Error(ErrorKind::kDegenerateRanking, "a ranking is constant");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Recommendation documents (JSON)

struct TransformationReport {
  std::size_t rank = 1;
  std::optional<double> cost;  // empty: incomparable
  std::size_t source_tree = 0;
  std::size_t source_path = 0;
  std::vector<double> candidate;  // standardized x'
  std::vector<Recommendation> recommendations;
  std::vector<CategorySwitch> category_switches;
};

struct InstanceReport {
  std::size_t instance = 0;
  std::string status;  // "found" | "not_covered" | "skipped_positive"
  std::vector<TransformationReport> transformations;
};

struct RecommendationDocument {
  double epsilon = 0.0;
  std::string delta;
  std::size_t top_k = 1;
  std::size_t eligible = 0;
  std::size_t covered = 0;
  std::vector<InstanceReport> instances;
};

inline TransformationReport make_transformation_report(const Instance& x, const Transformation& t,
                                                       std::size_t rank,
                                                       const TreeEnsemble& ens) {
  TransformationReport out;
  out.rank = rank;
  if (t.comparable()) out.cost = t.cost;
  out.source_tree = t.source_tree;
  out.source_path = t.source_path;
  out.candidate = t.candidate.values;
  out.recommendations = diff_to_recommendations(x, t, ens);
  out.category_switches = category_switches(x.values, t.candidate.values, ens.feature_space());
  return out;
}

inline std::string to_json(const RecommendationDocument& doc) {
  using ojson = nlohmann::ordered_json;
  ojson root;
  root["epsilon"] = doc.epsilon;
  root["delta"] = doc.delta;
  root["top_k"] = doc.top_k;
  root["eligible"] = doc.eligible;
  root["covered"] = doc.covered;
  root["coverage"] = doc.eligible == 0 ? 0.0
                                       : static_cast<double>(doc.covered) /
                                             static_cast<double>(doc.eligible);
  ojson instances = ojson::array();
  for (const auto& inst : doc.instances) {
    ojson ji;
    ji["instance"] = inst.instance;
    ji["status"] = inst.status;
    ojson transformations = ojson::array();
    for (const auto& t : inst.transformations) {
      ojson jt;
      jt["rank"] = t.rank;
      jt["cost"] = t.cost ? ojson(*t.cost) : ojson(nullptr);
      jt["source_tree"] = t.source_tree;
      jt["source_path"] = t.source_path;
      jt["candidate"] = t.candidate;
      ojson recs = ojson::array();
      for (const auto& r : t.recommendations) {
        ojson jr;
        jr["feature"] = r.feature_name;
        jr["feature_index"] = r.feature_index;
        jr["direction"] = to_string(r.direction);
        jr["delta_std"] = r.magnitude_std;
        jr["delta_raw"] = r.magnitude_raw;
        jr["from_raw"] = r.from_value_raw;
        jr["to_raw"] = r.to_value_raw;
        jr["importance_rank"] = r.importance_rank;
        recs.push_back(std::move(jr));
      }
      jt["recommendations"] = std::move(recs);
      ojson switches = ojson::array();
      for (const auto& s : t.category_switches) {
        switches.push_back(ojson{{"group", s.group}, {"from", s.from}, {"to", s.to}});
      }
      jt["category_switches"] = std::move(switches);
      transformations.push_back(std::move(jt));
    }
    ji["transformations"] = std::move(transformations);
    instances.push_back(std::move(ji));
  }
  root["instances"] = std::move(instances);
  return root.dump(1) + "\n";
}

inline RecommendationDocument recommendations_from_json(const std::string& text) {
  try {
    const auto root = nlohmann::json::parse(text);
    RecommendationDocument doc;
    doc.epsilon = root.at("epsilon").get<double>();
    doc.delta = root.at("delta").get<std::string>();
    doc.top_k = root.at("top_k").get<std::size_t>();
    doc.eligible = root.at("eligible").get<std::size_t>();
    doc.covered = root.at("covered").get<std::size_t>();
    for (const auto& ji : root.at("instances")) {
      InstanceReport inst;
      inst.instance = ji.at("instance").get<std::size_t>();
      inst.status = ji.at("status").get<std::string>();
      for (const auto& jt : ji.at("transformations")) {
        TransformationReport t;
        t.rank = jt.at("rank").get<std::size_t>();
        if (!jt.at("cost").is_null()) t.cost = jt.at("cost").get<double>();
        t.source_tree = jt.at("source_tree").get<std::size_t>();
        t.source_path = jt.at("source_path").get<std::size_t>();
        t.candidate = jt.at("candidate").get<std::vector<double>>();
        for (const auto& jr : jt.at("recommendations")) {
          Recommendation r;
          r.feature_name = jr.at("feature").get<std::string>();
          r.feature_index = jr.at("feature_index").get<std::size_t>();
          const auto dir = jr.at("direction").get<std::string>();
          if (dir != "increase" && dir != "decrease") {
            throw Error(ErrorKind::kParseError, "unknown direction '" + dir + "'");
          }
          r.direction = dir == "increase" ? ChangeDirection::kIncrease : ChangeDirection::kDecrease;
          r.magnitude_std = jr.at("delta_std").get<double>();
          r.magnitude_raw = jr.at("delta_raw").get<double>();
          r.from_value_raw = jr.at("from_raw").get<double>();
          r.to_value_raw = jr.at("to_raw").get<double>();
          r.importance_rank = jr.at("importance_rank").get<std::size_t>();
          t.recommendations.push_back(std::move(r));
        }
        for (const auto& js : jt.at("category_switches")) {
          t.category_switches.push_back({js.at("group").get<std::string>(),
                                         js.at("from").get<std::string>(),
                                         js.at("to").get<std::string>()});
        }
        inst.transformations.push_back(std::move(t));
      }
      doc.instances.push_back(std::move(inst));
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, std::string("recommendations: ") + e.what());
  }
}

/// Per-instance ranked recommendation lists of the covered instances.
inline std::vector<RankedRecommendations> ranked_recommendations(const RecommendationDocument& doc) {
  std::vector<RankedRecommendations> out;
  for (const auto& inst : doc.instances) {
    if (inst.transformations.empty()) continue;
    RankedRecommendations ranked;
    for (const auto& t : inst.transformations) ranked.push_back(t.recommendations);
    out.push_back(std::move(ranked));
  }
  return out;
}

}  // namespace treetweak
