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

// Seeded synthetic datasets for demos and tests.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "treetweak/csv.hpp"
#include "treetweak/feature_space.hpp"

namespace treetweak::synthetic {

/// Balanced two-class Gaussian data in raw units: every feature is
/// N(-separation/2, 1) for label -1 and N(+separation/2, 1) for label +1,
/// so the class means differ by `separation` along each axis. Labels
/// alternate -1, +1, -1, ...
inline std::vector<Instance> two_gaussians(std::size_t rows, std::size_t features,
                                           double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Instance> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const int label = r % 2 == 0 ? -1 : 1;
    out[r].label = label;
    out[r].values.resize(features);
    for (auto& v : out[r].values) v = label * separation / 2.0 + noise(rng);
  }
  return out;
}

/// Only feature 0 carries signal (separation `separation`); the remaining
/// features are pure N(0, 1) noise.
inline std::vector<Instance> one_informative(std::size_t rows, std::size_t features,
                                             double separation, std::uint64_t seed) {
  auto out = two_gaussians(rows, features, 0.0, seed);
  for (auto& inst : out) inst.values[0] += *inst.label * separation / 2.0;
  return out;
}

inline std::vector<std::string> default_names(std::size_t features) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < features; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

/// Writes instances (raw units) as CSV with a trailing label column when
/// the first instance is labelled.
inline void write_csv(std::span<const Instance> data, std::span<const std::string> names,
                      std::ostream& out) {
  const bool labelled = !data.empty() && data.front().label.has_value();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << csv::quote(names[j]);
  if (labelled) out << ',' << kLabelColumn;
  out << '\n';
  for (const auto& inst : data) {
    for (std::size_t j = 0; j < inst.values.size(); ++j) {
      out << (j ? "," : "") << csv::format_number(inst.values[j], 17);
    }
    if (labelled) out << ',' << *inst.label;
    out << '\n';
  }
}

}  // namespace treetweak::synthetic
