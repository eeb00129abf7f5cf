/*
 * Copyright 2026 The CoFact Authors.
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

// Typed, immutable tabular datasets: CSV loading with kind inference,
// per-feature summaries, and the standardized encoding used for distances.

#ifndef COFACT_TABULAR_H_
#define COFACT_TABULAR_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cofact {

enum class FeatureKind { kNumeric, kCategorical };

std::string_view FeatureKindName(FeatureKind kind);
FeatureKind ParseFeatureKind(std::string_view name);

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  std::size_t index = 0;

  bool operator==(const Feature&) const = default;
};

// Storage for one column. Numeric columns use `values`; categorical columns
// use `codes` into `levels` (levels ordered by first appearance).
struct Column {
  std::vector<double> values;
  std::vector<std::int32_t> codes;
  std::vector<std::string> levels;

  bool operator==(const Column&) const = default;
};

class Dataset {
 public:
  Dataset() = default;

  // Takes ownership of fully built columns. Validates that names are unique
  // and non-empty, that every column has the same length, and that numeric
  // values are finite.
  Dataset(std::vector<Feature> features, std::vector<Column> columns);

  const std::vector<Feature>& features() const { return features_; }
  std::size_t feature_count() const { return features_.size(); }
  std::size_t row_count() const { return row_count_; }

  // Rows removed by MissingPolicy::kDropRows during load.
  std::size_t dropped_rows() const { return dropped_rows_; }
  void set_dropped_rows(std::size_t n) { dropped_rows_ = n; }

  std::optional<std::size_t> FindFeature(std::string_view name) const;
  // Throws kNotFound.
  const Feature& feature(std::string_view name) const;

  std::span<const double> numeric(std::size_t column) const;
  std::span<const std::int32_t> codes(std::size_t column) const;
  const std::vector<std::string>& levels(std::size_t column) const;

  // Text form of a cell, as it would be written to CSV.
  std::string CellText(std::size_t row, std::size_t column) const;

  bool operator==(const Dataset& other) const {
    return features_ == other.features_ && columns_ == other.columns_ &&
           row_count_ == other.row_count_;
  }

 private:
  std::vector<Feature> features_;
  std::vector<Column> columns_;
  std::size_t row_count_ = 0;
  std::size_t dropped_rows_ = 0;
};

enum class MissingPolicy { kReject, kDropRows };

struct LoadOptions {
  std::map<std::string, FeatureKind, std::less<>> type_hints;
  MissingPolicy missing = MissingPolicy::kReject;
};

// RFC-4180 style CSV with a mandatory header row. A column is numeric iff
// every value parses as a finite decimal number, unless hinted otherwise.
Dataset LoadCsv(std::istream& in, const LoadOptions& options = {});
Dataset LoadCsvFile(const std::string& path, const LoadOptions& options = {});
Dataset LoadCsvString(std::string_view text, const LoadOptions& options = {});

// Writes numbers in shortest round-trip form, quoting fields when needed.
void WriteCsv(const Dataset& dataset, std::ostream& out);
std::string WriteCsvString(const Dataset& dataset);

// Parses the type-hint sidecar: {"name": "numeric"|"categorical"}.
std::map<std::string, FeatureKind, std::less<>> ParseTypeHints(
    std::string_view json_text);

// Parses a finite decimal or scientific-notation number. Rejects NaN/Inf
// tokens and trailing garbage.
std::optional<double> ParseFiniteNumber(std::string_view text);

// Shortest text that parses back to exactly `value`.
std::string FormatNumber(double value);

struct FeatureSummary {
  Feature feature;
  std::size_t count = 0;
  // Numeric features.
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double sd = 0.0;  // Sample standard deviation; 0 when count < 2.
  // Categorical features.
  std::map<std::string, std::size_t> category_counts;
};

FeatureSummary SummarizeFeature(const Dataset& dataset, std::string_view name);

// Numeric columns are z-scored (or left raw); categorical columns are one-hot
// encoded with each indicator scaled by 1/sqrt(2) so that a single category
// mismatch contributes Euclidean distance exactly 1.
enum class Scaling { kStandardize, kRaw };

struct EncodedColumn {
  Feature feature;
  double mean = 0.0;
  double sd = 1.0;
  bool zero_variance = false;
  std::size_t offset = 0;  // First encoded dimension.
  std::size_t width = 1;   // 1 for numeric, #levels for categorical.
};

// Row-major matrix of encoded points.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> data;

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }
};

class StandardizedView {
 public:
  // Fits means and sample standard deviations over every row of `dataset`.
  // Throws on unknown names, an empty name list, or an empty dataset.
  static StandardizedView Fit(const Dataset& dataset,
                              std::span<const std::string> features,
                              Scaling scaling = Scaling::kStandardize);

  const std::vector<EncodedColumn>& columns() const { return columns_; }
  std::size_t encoded_width() const { return width_; }
  Scaling scaling() const { return scaling_; }

  void EncodeRow(const Dataset& dataset, std::size_t row,
                 std::span<double> out) const;
  PointSet Encode(const Dataset& dataset,
                  std::span<const std::size_t> rows) const;
  PointSet EncodeAll(const Dataset& dataset) const;

 private:
  std::vector<EncodedColumn> columns_;
  std::size_t width_ = 0;
  Scaling scaling_ = Scaling::kStandardize;
};

// Sample mean / standard deviation helpers shared across modules.
double Mean(std::span<const double> values);
double SampleVariance(std::span<const double> values);

}  // namespace cofact

#endif  // COFACT_TABULAR_H_
