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

// Tolerance x cost grid study: coverage, candidate-count distribution and
// cost summaries for a set of model-negative instances.

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "treetweak/costs.hpp"
#include "treetweak/csv.hpp"
#include "treetweak/forest.hpp"
#include "treetweak/parallel.hpp"
#include "treetweak/tweaker.hpp"

namespace treetweak {

inline constexpr std::array<double, 5> kDefaultEpsilonGrid = {0.01, 0.05, 0.1, 0.5, 1.0};

/// Result for one eligible instance at one grid point.
struct InstanceOutcome {
  std::size_t instance_index = 0;  // position in the input list
  bool covered = false;
  std::size_t candidates = 0;
  std::optional<double> best_cost;
  std::optional<double> mean_cost;  // over comparable candidates
};

struct SweepRow {
  double epsilon = 0.0;
  CostFunction cost = CostFunction::kEuclidean;
  std::size_t eligible = 0;
  std::size_t covered = 0;
  double coverage = 0.0;
  // min, 25%, median, 75%, max of per-instance candidate counts
  std::array<double, 5> candidate_quantiles{};
  std::optional<double> micro_average_cost;
  std::optional<double> median_instance_cost;
  std::vector<InstanceOutcome> outcomes;
};

struct SweepReport {
  std::size_t total_instances = 0;
  std::vector<SweepRow> rows;
};

/// Linear-interpolation quantile of sorted data (q in [0,1]).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

/// Runs the tweaker on every model-negative instance for each (epsilon,
/// cost) pair. Instances the ensemble already labels +1 are not eligible.
inline SweepReport sweep(const TreeEnsemble& ens, std::span<const Instance> instances,
                         std::span<const double> epsilon_grid,
                         std::span<const CostFunction> costs, const TweakOptions& base = {}) {
  const FeatureTweaker tweaker(ens);
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (ens.predict(instances[i]) == -1) eligible.push_back(i);
  }

  SweepReport report;
  report.total_instances = instances.size();
  for (double eps : epsilon_grid) {
    for (CostFunction cost_fn : costs) {
      TweakOptions opts = base;
      opts.epsilon = eps;
      opts.cost = cost_fn;
      const std::size_t workers = opts.workers;
      opts.workers = 1;  // parallelism is across instances here

      SweepRow row;
      row.epsilon = eps;
      row.cost = cost_fn;
      row.eligible = eligible.size();
      row.outcomes.resize(eligible.size());
      std::vector<std::vector<double>> costs_of(eligible.size());
      parallel_for(eligible.size(), workers, [&](std::size_t e) {
        const auto& x = instances[eligible[e]];
        const auto candidates = tweaker.candidate_set(x, opts);
        auto& out = row.outcomes[e];
        out.instance_index = eligible[e];
        out.candidates = candidates.size();
        out.covered = !candidates.empty();
        for (const auto& t : candidates) {
          if (t.comparable()) costs_of[e].push_back(t.cost);
        }
        if (!costs_of[e].empty()) {
          out.best_cost = *std::min_element(costs_of[e].begin(), costs_of[e].end());
          double sum = 0.0;
          for (double c : costs_of[e]) sum += c;
          out.mean_cost = sum / static_cast<double>(costs_of[e].size());
        }
      });

      std::vector<double> counts;
      std::vector<double> instance_means;
      double cost_sum = 0.0;
      std::size_t cost_n = 0;
      for (std::size_t e = 0; e < eligible.size(); ++e) {
        const auto& out = row.outcomes[e];
        row.covered += out.covered ? 1 : 0;
        counts.push_back(static_cast<double>(out.candidates));
        if (out.mean_cost) instance_means.push_back(*out.mean_cost);
        for (double c : costs_of[e]) cost_sum += c;
        cost_n += costs_of[e].size();
      }
      row.coverage = eligible.empty() ? 0.0
                                      : static_cast<double>(row.covered) /
                                            static_cast<double>(eligible.size());
      std::sort(counts.begin(), counts.end());
      constexpr std::array<double, 5> kQ = {0.0, 0.25, 0.5, 0.75, 1.0};
      for (std::size_t q = 0; q < kQ.size(); ++q) {
        row.candidate_quantiles[q] = quantile_sorted(counts, kQ[q]);
      }
      if (cost_n > 0) row.micro_average_cost = cost_sum / static_cast<double>(cost_n);
      if (!instance_means.empty()) row.median_instance_cost = median(instance_means);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

inline constexpr const char* kSweepCsvHeader =
    "epsilon,delta,eligible,covered,coverage,candidates_min,candidates_q25,"
    "candidates_median,candidates_q75,candidates_max,micro_average_cost,"
    "median_instance_cost";

/// One row per (epsilon, cost); cost columns are empty when nothing was
/// covered.
inline void write_sweep_csv(const SweepReport& report, std::ostream& out) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? csv::format_number(*v) : std::string();
  };
  out << kSweepCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << csv::format_number(r.epsilon) << ',' << to_string(r.cost) << ',' << r.eligible << ','
        << r.covered << ',' << csv::format_number(r.coverage);
    for (double q : r.candidate_quantiles) out << ',' << csv::format_number(q);
    out << ',' << opt(r.micro_average_cost) << ',' << opt(r.median_instance_cost) << '\n';
  }
}

/// Per-instance log: one line per (epsilon, cost, eligible instance).
inline void write_outcome_log_csv(const SweepReport& report, std::ostream& out) {
  out << "epsilon,delta,instance,covered,candidates,best_cost,mean_cost\n";
  for (const auto& r : report.rows) {
    for (const auto& o : r.outcomes) {
      out << csv::format_number(r.epsilon) << ',' << to_string(r.cost) << ','
          << o.instance_index << ',' << (o.covered ? 1 : 0) << ',' << o.candidates << ','
          << (o.best_cost ? csv::format_number(*o.best_cost) : "") << ','
          << (o.mean_cost ? csv::format_number(*o.mean_cost) : "") << '\n';
    }
  }
}

}  // namespace treetweak
