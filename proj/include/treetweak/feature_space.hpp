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

// Feature schema, z-score standardization and one-hot encoding.
//
// Everything downstream of this header (trees, tweaking, costs) works in
// standardized space: value = (raw - mean) / std_dev, with sample statistics
// (n - 1 denominator). Categorical columns become one binary member feature
// per category, named "<column>=<category>".

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "treetweak/csv.hpp"
#include "treetweak/error.hpp"

namespace treetweak {

inline constexpr std::string_view kLabelColumn = "label";

struct Continuous {
  friend bool operator==(const Continuous&, const Continuous&) = default;
};

struct OneHotMember {
  std::string group_id;
  std::string category_value;
  friend bool operator==(const OneHotMember&, const OneHotMember&) = default;
};

using FeatureKind = std::variant<Continuous, OneHotMember>;

struct FeatureMeta {
  std::string name;
  FeatureKind kind = Continuous{};
  bool adjustable = true;
  double mean = 0.0;
  double std_dev = 1.0;

  bool is_one_hot() const { return std::holds_alternative<OneHotMember>(kind); }
  const OneHotMember* one_hot() const { return std::get_if<OneHotMember>(&kind); }
};

inline FeatureMeta continuous_feature(std::string name, bool adjustable = true) {
  return FeatureMeta{std::move(name), Continuous{}, adjustable, 0.0, 1.0};
}

inline std::string one_hot_member_name(std::string_view group,
                                       std::string_view category) {
  return std::string(group) + "=" + std::string(category);
}

/// One-hot members are non-adjustable by default: moving a single indicator
/// independently can break the exactly-one-hot property of its group.
inline FeatureMeta one_hot_feature(std::string group, std::string category,
                                   bool adjustable = false) {
  std::string name = one_hot_member_name(group, category);
  return FeatureMeta{std::move(name),
                     OneHotMember{std::move(group), std::move(category)},
                     adjustable, 0.0, 1.0};
}

/// Ordered, immutable schema of the n features.
class FeatureSpace {
 public:
  using GroupMap = std::map<std::string, std::vector<std::size_t>>;

  FeatureSpace() = default;

  explicit FeatureSpace(std::vector<FeatureMeta> features)
      : features_(std::move(features)) {
    for (std::size_t i = 0; i < features_.size(); ++i) {
      const auto& meta = features_[i];
      if (meta.name.empty()) {
        throw Error(ErrorKind::kSchemaMismatch,
                    "feature " + std::to_string(i) + " has an empty name");
      }
      if (!index_.emplace(meta.name, i).second) {
        throw Error(ErrorKind::kSchemaMismatch,
                    "duplicate feature name '" + meta.name + "'");
      }
      if (const auto* member = meta.one_hot()) {
        groups_[member->group_id].push_back(i);
      }
    }
  }

  std::size_t size() const { return features_.size(); }
  const std::vector<FeatureMeta>& features() const { return features_; }
  const FeatureMeta& operator[](std::size_t i) const { return features_.at(i); }
  const GroupMap& one_hot_groups() const { return groups_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool adjustable(std::size_t i) const { return features_.at(i).adjustable; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(features_.size());
    for (const auto& f : features_) out.push_back(f.name);
    return out;
  }

  /// Returns a copy with the given features' adjustability flag changed.
  FeatureSpace with_adjustable(std::span<const std::size_t> indices,
                               bool adjustable) const {
    auto features = features_;
    for (std::size_t i : indices) features.at(i).adjustable = adjustable;
    return FeatureSpace(std::move(features));
  }

  friend bool operator==(const FeatureSpace& a, const FeatureSpace& b) {
    if (a.features_.size() != b.features_.size()) return false;
    for (std::size_t i = 0; i < a.features_.size(); ++i) {
      const auto& x = a.features_[i];
      const auto& y = b.features_[i];
      if (x.name != y.name || x.kind != y.kind || x.adjustable != y.adjustable ||
          x.mean != y.mean || x.std_dev != y.std_dev) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<FeatureMeta> features_;
  std::unordered_map<std::string, std::size_t> index_;
  GroupMap groups_;
};

/// A point of the standardized feature space, optionally labelled in {-1,+1}.
struct Instance {
  std::vector<double> values;
  std::optional<int> label;

  std::size_t size() const { return values.size(); }
  std::span<const double> view() const { return values; }
};

inline int checked_label(int label) {
  if (label != -1 && label != 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "label must be -1 or +1, got " + std::to_string(label));
  }
  return label;
}

/// Numeric table in raw (unstandardized) units whose columns are already
/// one-hot expanded, i.e. one column per feature of the target space.
struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void check_length(std::size_t got, std::size_t want, std::string_view what) {
  if (got != want) {
    throw Error(ErrorKind::kLengthMismatch,
                std::string(what) + ": expected " + std::to_string(want) +
                    " values, got " + std::to_string(got));
  }
}

/// Fills mean/std_dev of every feature of `schema` from the sample
/// statistics of `table`.
inline FeatureSpace fit_standardizer(const RawTable& table,
                                     const FeatureSpace& schema) {
  if (table.columns != schema.names()) {
    throw Error(ErrorKind::kSchemaMismatch,
                "table columns do not match the feature schema");
  }
  if (table.rows.size() < 2) {
    throw Error(ErrorKind::kEmptyDataset,
                "at least 2 rows are needed to fit a standardizer");
  }
  const std::size_t n = schema.size();
  const double m = static_cast<double>(table.rows.size());
  auto features = schema.features();
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (const auto& row : table.rows) {
      check_length(row.size(), n, "table row");
      sum += row[j];
    }
    const double mean = sum / m;
    double ss = 0.0;
    for (const auto& row : table.rows) ss += (row[j] - mean) * (row[j] - mean);
    const double sd = std::sqrt(ss / (m - 1.0));
    if (!(sd > 0.0)) {
      throw Error(ErrorKind::kZeroVariance,
                  "feature '" + features[j].name + "' has zero variance");
    }
    features[j].mean = mean;
    features[j].std_dev = sd;
  }
  return FeatureSpace(std::move(features));
}

inline Instance standardize(std::span<const double> raw, const FeatureSpace& space) {
  check_length(raw.size(), space.size(), "standardize");
  Instance out;
  out.values.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& f = space[i];
    out.values[i] = (raw[i] - f.mean) / f.std_dev;
  }
  return out;
}

inline std::vector<double> destandardize(std::span<const double> values,
                                         const FeatureSpace& space) {
  check_length(values.size(), space.size(), "destandardize");
  std::vector<double> raw(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& f = space[i];
    raw[i] = f.mean + f.std_dev * values[i];
  }
  return raw;
}

inline std::vector<double> destandardize(const Instance& inst,
                                         const FeatureSpace& space) {
  return destandardize(inst.view(), space);
}

/// Indicator vector of `value` over `categories`.
inline std::vector<double> one_hot_encode(std::string_view value,
                                          std::span<const std::string> categories) {
  std::vector<double> out(categories.size(), 0.0);
  const auto it = std::find(categories.begin(), categories.end(), value);
  if (it == categories.end()) {
    throw Error(ErrorKind::kUnknownCategory, "'" + std::string(value) + "'");
  }
  out[static_cast<std::size_t>(it - categories.begin())] = 1.0;
  return out;
}

/// Encodes a whole categorical column into k binary columns (column-major).
inline std::vector<std::vector<double>> one_hot_encode(
    std::span<const std::string> column, std::span<const std::string> categories) {
  std::vector<std::vector<double>> out(categories.size(),
                                       std::vector<double>(column.size(), 0.0));
  for (std::size_t r = 0; r < column.size(); ++r) {
    const auto row = one_hot_encode(column[r], categories);
    for (std::size_t c = 0; c < categories.size(); ++c) out[c][r] = row[c];
  }
  return out;
}

/// Category with the largest indicator (first one on ties). Exact one-hot
/// rows decode to their unique hot member.
inline const std::string& one_hot_decode(std::span<const double> indicators,
                                         std::span<const std::string> categories) {
  check_length(indicators.size(), categories.size(), "one_hot_decode");
  if (categories.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "no categories to decode");
  }
  const auto it = std::max_element(indicators.begin(), indicators.end());
  return categories[static_cast<std::size_t>(it - indicators.begin())];
}

// ---------------------------------------------------------------------------
// Tabular ingestion

enum class ColumnType { kNumeric, kCategorical };

struct ColumnSpec {
  std::string name;
  ColumnType type = ColumnType::kNumeric;
  std::vector<std::string> categories;  // empty: sorted distinct values seen
  std::optional<bool> adjustable;       // empty: numeric true, categorical false
};

/// Declares the raw columns of a CSV file (excluding the optional trailing
/// "label" column).
struct TableSchema {
  std::vector<ColumnSpec> columns;
};

struct LoadedTable {
  FeatureSpace space;
  std::vector<Instance> instances;
};

namespace detail {

inline int parse_label(std::string_view text, std::size_t line) {
  const auto value = csv::parse_double(text);
  if (!value || (*value != -1.0 && *value != 1.0)) {
    throw Error(ErrorKind::kParseError,
                "line " + std::to_string(line) + ": label must be -1 or +1, got '" +
                    std::string(text) + "'");
  }
  return static_cast<int>(*value);
}

inline double parse_cell(std::string_view text, std::size_t line,
                         std::string_view column) {
  const auto value = csv::parse_double(text);
  if (!value) {
    throw Error(ErrorKind::kParseError,
                "line " + std::to_string(line) + ": column '" + std::string(column) +
                    "' is not a number: '" + std::string(text) + "'");
  }
  return *value;
}

inline bool has_label_column(const csv::Table& table) {
  return !table.header.empty() && table.header.back() == kLabelColumn;
}

}  // namespace detail

/// Guesses a schema from file contents: a column is numeric when every cell
/// parses as a finite number, categorical otherwise.
inline TableSchema infer_schema(const csv::Table& table) {
  TableSchema schema;
  const std::size_t ncols =
      table.header.size() - (detail::has_label_column(table) ? 1 : 0);
  for (std::size_t c = 0; c < ncols; ++c) {
    ColumnSpec spec;
    spec.name = table.header[c];
    for (const auto& row : table.rows) {
      if (!csv::parse_double(row[c])) {
        spec.type = ColumnType::kCategorical;
        break;
      }
    }
    schema.columns.push_back(std::move(spec));
  }
  return schema;
}

/// Parses rows of `table` against `schema`, one-hot encodes categorical
/// columns, fits the standardizer and returns standardized instances.
inline LoadedTable load_table(const csv::Table& table, const TableSchema& schema) {
  const bool labelled = detail::has_label_column(table);
  const std::size_t ncols = table.header.size() - (labelled ? 1 : 0);
  if (ncols != schema.columns.size()) {
    throw Error(ErrorKind::kSchemaMismatch,
                "file has " + std::to_string(ncols) + " feature columns, schema has " +
                    std::to_string(schema.columns.size()));
  }
  for (std::size_t c = 0; c < ncols; ++c) {
    if (table.header[c] != schema.columns[c].name) {
      throw Error(ErrorKind::kSchemaMismatch, "header column '" + table.header[c] +
                                                  "' does not match schema column '" +
                                                  schema.columns[c].name + "'");
    }
  }

  std::vector<FeatureMeta> metas;
  std::vector<std::vector<std::string>> categories(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    const auto& spec = schema.columns[c];
    if (spec.type == ColumnType::kNumeric) {
      metas.push_back(continuous_feature(spec.name, spec.adjustable.value_or(true)));
      continue;
    }
    categories[c] = spec.categories;
    if (categories[c].empty()) {
      std::set<std::string> seen;
      for (const auto& row : table.rows) seen.insert(row[c]);
      categories[c].assign(seen.begin(), seen.end());
    }
    for (const auto& cat : categories[c]) {
      metas.push_back(one_hot_feature(spec.name, cat, spec.adjustable.value_or(false)));
    }
  }
  FeatureSpace schema_space(std::move(metas));

  RawTable raw;
  raw.columns = schema_space.names();
  std::vector<std::optional<int>> labels;
  raw.rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    std::vector<double> values;
    values.reserve(schema_space.size());
    for (std::size_t c = 0; c < ncols; ++c) {
      if (schema.columns[c].type == ColumnType::kNumeric) {
        values.push_back(detail::parse_cell(row[c], line, table.header[c]));
      } else {
        try {
          const auto hot = one_hot_encode(row[c], categories[c]);
          values.insert(values.end(), hot.begin(), hot.end());
        } catch (const Error&) {
          throw Error(ErrorKind::kParseError,
                      "line " + std::to_string(line) + ": unknown category '" + row[c] +
                          "' in column '" + table.header[c] + "'");
        }
      }
    }
    raw.rows.push_back(std::move(values));
    labels.push_back(labelled ? std::optional<int>(detail::parse_label(row.back(), line))
                              : std::nullopt);
  }

  LoadedTable out;
  out.space = fit_standardizer(raw, schema_space);
  out.instances.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    auto inst = standardize(raw.rows[r], out.space);
    inst.label = labels[r];
    out.instances.push_back(std::move(inst));
  }
  return out;
}

inline LoadedTable load_table(const std::string& path, const TableSchema& schema) {
  return load_table(csv::read(path), schema);
}

inline LoadedTable load_table(const std::string& path) {
  const auto table = csv::read(path);
  return load_table(table, infer_schema(table));
}

/// Reads raw rows in the layout of an already-fitted space (continuous
/// columns by feature name, categorical columns by group id) and
/// standardizes them with the stored statistics. Column order is free.
inline std::vector<Instance> load_instances(const csv::Table& table,
                                            const FeatureSpace& space) {
  std::unordered_map<std::string, std::size_t> column_of;
  for (std::size_t c = 0; c < table.header.size(); ++c) column_of[table.header[c]] = c;
  const auto lookup = [&](const std::string& name) {
    const auto it = column_of.find(name);
    if (it == column_of.end()) {
      throw Error(ErrorKind::kSchemaMismatch, "missing column '" + name + "'");
    }
    return it->second;
  };
  const auto label_it = column_of.find(std::string(kLabelColumn));

  std::vector<std::size_t> source(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& f = space[i];
    source[i] = lookup(f.is_one_hot() ? f.one_hot()->group_id : f.name);
  }
  std::vector<Instance> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    std::vector<double> raw(space.size());
    for (const auto& [group, members] : space.one_hot_groups()) {
      const std::string& cell = row[source[members.front()]];
      bool matched = false;
      for (std::size_t i : members) {
        const bool hot = space[i].one_hot()->category_value == cell;
        raw[i] = hot ? 1.0 : 0.0;
        matched = matched || hot;
      }
      if (!matched) {
        throw Error(ErrorKind::kParseError, "line " + std::to_string(line) +
                                                ": unknown category '" + cell +
                                                "' in column '" + group + "'");
      }
    }
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (!space[i].is_one_hot()) {
        raw[i] = detail::parse_cell(row[source[i]], line, space[i].name);
      }
    }
    auto inst = standardize(raw, space);
    if (label_it != column_of.end()) inst.label = detail::parse_label(row[label_it->second], line);
    out.push_back(std::move(inst));
  }
  return out;
}

inline std::vector<Instance> load_instances(const std::string& path,
                                            const FeatureSpace& space) {
  return load_instances(csv::read(path), space);
}

}  // namespace treetweak
