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

#include "cofact/tabular.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cofact/error.h"
#include "json.hpp"

namespace cofact {
namespace {

// One CSV record plus the physical line it started on (1-based).
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {
    // Skip a UTF-8 byte order mark.
    if (in_.peek() == 0xEF) {
      char bom[3];
      in_.read(bom, 3);
      if (!(bom[0] == '\xEF' && bom[1] == '\xBB' && bom[2] == '\xBF')) {
        in_.clear();
        in_.seekg(0);
      }
    }
  }

  // Returns false at end of input. Blank lines are skipped.
  bool Next(Record& record) {
    record.fields.clear();
    while (true) {
      int c = in_.peek();
      if (c == std::char_traits<char>::eof()) return false;
      if (c == '\n') {
        in_.get();
        ++line_;
        continue;
      }
      if (c == '\r') {
        in_.get();
        if (in_.peek() == '\n') in_.get();
        ++line_;
        continue;
      }
      break;
    }
    record.line = line_;
    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    while (true) {
      int c = in_.get();
      if (c == std::char_traits<char>::eof()) {
        if (in_quotes) {
          throw Error(ErrorCode::kParse,
                      "line " + std::to_string(record.line) +
                          ": unterminated quoted field");
        }
        record.fields.push_back(std::move(field));
        ++line_;
        return true;
      }
      const char ch = static_cast<char>(c);
      if (in_quotes) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '"') {
        if (!field.empty() || was_quoted) {
          throw Error(ErrorCode::kParse,
                      "line " + std::to_string(line_) +
                          ": unexpected quote inside unquoted field");
        }
        in_quotes = true;
        was_quoted = true;
      } else if (ch == ',') {
        record.fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (ch == '\n' || ch == '\r') {
        if (ch == '\r' && in_.peek() == '\n') in_.get();
        record.fields.push_back(std::move(field));
        ++line_;
        return true;
      } else {
        if (was_quoted) {
          throw Error(ErrorCode::kParse,
                      "line " + std::to_string(line_) +
                          ": characters after closing quote");
        }
        field.push_back(ch);
      }
    }
  }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

std::string_view Trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool NeedsQuoting(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos ||
         (!s.empty() && (s.front() == ' ' || s.back() == ' '));
}

void WriteField(std::ostream& out, std::string_view s) {
  if (!NeedsQuoting(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

std::string_view FeatureKindName(FeatureKind kind) {
  return kind == FeatureKind::kNumeric ? "numeric" : "categorical";
}

FeatureKind ParseFeatureKind(std::string_view name) {
  if (name == "numeric") return FeatureKind::kNumeric;
  if (name == "categorical") return FeatureKind::kCategorical;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown feature kind '" + std::string(name) +
                  "' (expected numeric or categorical)");
}

std::optional<double> ParseFiniteNumber(std::string_view text) {
  text = Trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  // from_chars accepts "inf"/"nan" spellings; those are rejected below.
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string FormatNumber(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

Dataset::Dataset(std::vector<Feature> features, std::vector<Column> columns)
    : features_(std::move(features)), columns_(std::move(columns)) {
  if (features_.size() != columns_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "feature and column counts differ");
  }
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    Feature& f = features_[i];
    if (f.name.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "feature " + std::to_string(i) + " has an empty name");
    }
    if (!seen.insert(f.name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate feature name '" + f.name + "'");
    }
    f.index = i;
    const Column& c = columns_[i];
    const std::size_t n = f.kind == FeatureKind::kNumeric ? c.values.size()
                                                          : c.codes.size();
    if (i == 0) row_count_ = n;
    if (n != row_count_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "column '" + f.name + "' has " + std::to_string(n) +
                      " rows, expected " + std::to_string(row_count_));
    }
    if (f.kind == FeatureKind::kNumeric) {
      for (double v : c.values) {
        if (!std::isfinite(v)) {
          throw Error(ErrorCode::kInvalidArgument,
                      "column '" + f.name + "' contains a non-finite value");
        }
      }
    } else {
      for (std::int32_t code : c.codes) {
        if (code < 0 || static_cast<std::size_t>(code) >= c.levels.size()) {
          throw Error(ErrorCode::kInvalidArgument,
                      "column '" + f.name + "' has an invalid category code");
        }
      }
    }
  }
}

std::optional<std::size_t> Dataset::FindFeature(std::string_view name) const {
  for (const Feature& f : features_) {
    if (f.name == name) return f.index;
  }
  return std::nullopt;
}

const Feature& Dataset::feature(std::string_view name) const {
  auto index = FindFeature(name);
  if (!index) {
    throw Error(ErrorCode::kNotFound,
                "unknown feature '" + std::string(name) + "'");
  }
  return features_[*index];
}

std::span<const double> Dataset::numeric(std::size_t column) const {
  return columns_.at(column).values;
}

std::span<const std::int32_t> Dataset::codes(std::size_t column) const {
  return columns_.at(column).codes;
}

const std::vector<std::string>& Dataset::levels(std::size_t column) const {
  return columns_.at(column).levels;
}

std::string Dataset::CellText(std::size_t row, std::size_t column) const {
  const Column& c = columns_.at(column);
  if (features_[column].kind == FeatureKind::kNumeric) {
    return FormatNumber(c.values.at(row));
  }
  return c.levels[c.codes.at(row)];
}

Dataset LoadCsv(std::istream& in, const LoadOptions& options) {
  CsvReader reader(in);
  Record header;
  if (!reader.Next(header) ||
      (header.fields.size() == 1 && header.fields[0].empty())) {
    throw Error(ErrorCode::kParse, "empty header row");
  }
  const std::size_t width = header.fields.size();
  for (std::size_t i = 0; i < width; ++i) {
    if (header.fields[i].empty()) {
      throw Error(ErrorCode::kParse, "header column " + std::to_string(i + 1) +
                                         " has an empty name");
    }
  }
  for (const auto& [name, kind] : options.type_hints) {
    if (std::find(header.fields.begin(), header.fields.end(), name) ==
        header.fields.end()) {
      throw Error(ErrorCode::kNotFound,
                  "type hint names unknown column '" + name + "'");
    }
  }

  std::vector<std::vector<std::string>> cells(width);
  std::size_t dropped = 0;
  std::size_t data_row = 0;
  Record record;
  while (reader.Next(record)) {
    ++data_row;
    if (record.fields.size() != width) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(record.line) + ": expected " +
                      std::to_string(width) + " fields, got " +
                      std::to_string(record.fields.size()));
    }
    bool missing = false;
    for (std::size_t c = 0; c < width; ++c) {
      if (!Trim(record.fields[c]).empty()) continue;
      if (options.missing == MissingPolicy::kReject) {
        throw Error(ErrorCode::kInvalidArgument,
                    "missing value at row " + std::to_string(data_row) +
                        " (line " + std::to_string(record.line) +
                        "), column '" + header.fields[c] + "'");
      }
      missing = true;
    }
    if (missing) {
      ++dropped;
      continue;
    }
    for (std::size_t c = 0; c < width; ++c) {
      cells[c].push_back(std::move(record.fields[c]));
    }
  }

  std::vector<Feature> features;
  std::vector<Column> columns;
  for (std::size_t c = 0; c < width; ++c) {
    const std::string& name = header.fields[c];
    std::optional<FeatureKind> hint;
    if (auto it = options.type_hints.find(name);
        it != options.type_hints.end()) {
      hint = it->second;
    }
    Column column;
    bool numeric = !hint || *hint == FeatureKind::kNumeric;
    if (numeric) {
      column.values.reserve(cells[c].size());
      for (std::size_t r = 0; r < cells[c].size(); ++r) {
        auto v = ParseFiniteNumber(cells[c][r]);
        if (!v) {
          if (hint) {
            throw Error(ErrorCode::kInvalidArgument,
                        "column '" + name + "' is hinted numeric but value '" +
                            cells[c][r] + "' is not a finite number");
          }
          numeric = false;
          column.values.clear();
          break;
        }
        column.values.push_back(*v);
      }
    }
    if (!numeric) {
      std::unordered_map<std::string, std::int32_t> lookup;
      column.codes.reserve(cells[c].size());
      for (std::string& label : cells[c]) {
        auto [it, inserted] = lookup.try_emplace(
            label, static_cast<std::int32_t>(column.levels.size()));
        if (inserted) column.levels.push_back(label);
        column.codes.push_back(it->second);
      }
    }
    features.push_back({name,
                        numeric ? FeatureKind::kNumeric
                                : FeatureKind::kCategorical,
                        c});
    columns.push_back(std::move(column));
  }
  Dataset dataset(std::move(features), std::move(columns));
  dataset.set_dropped_rows(dropped);
  return dataset;
}

Dataset LoadCsvFile(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return LoadCsv(in, options);
}

Dataset LoadCsvString(std::string_view text, const LoadOptions& options) {
  std::istringstream in{std::string(text)};
  return LoadCsv(in, options);
}

void WriteCsv(const Dataset& dataset, std::ostream& out) {
  const auto& features = dataset.features();
  for (std::size_t c = 0; c < features.size(); ++c) {
    if (c) out << ',';
    WriteField(out, features[c].name);
  }
  out << '\n';
  for (std::size_t r = 0; r < dataset.row_count(); ++r) {
    for (std::size_t c = 0; c < features.size(); ++c) {
      if (c) out << ',';
      WriteField(out, dataset.CellText(r, c));
    }
    out << '\n';
  }
}

std::string WriteCsvString(const Dataset& dataset) {
  std::ostringstream out;
  WriteCsv(dataset, out);
  return out.str();
}

std::map<std::string, FeatureKind, std::less<>> ParseTypeHints(
    std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("type hints: ") + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "type hints must be a JSON object");
  }
  std::map<std::string, FeatureKind, std::less<>> hints;
  for (const auto& [name, kind] : doc.items()) {
    if (!kind.is_string()) {
      throw Error(ErrorCode::kParse,
                  "type hint for '" + name + "' must be a string");
    }
    hints[name] = ParseFeatureKind(kind.get<std::string>());
  }
  return hints;
}

double Mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double SampleVariance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mean = Mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

FeatureSummary SummarizeFeature(const Dataset& dataset, std::string_view name) {
  const Feature& f = dataset.feature(name);
  FeatureSummary summary;
  summary.feature = f;
  summary.count = dataset.row_count();
  if (f.kind == FeatureKind::kNumeric) {
    auto values = dataset.numeric(f.index);
    if (!values.empty()) {
      auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      summary.min = *lo;
      summary.max = *hi;
      summary.mean = std::clamp(Mean(values), summary.min, summary.max);
      summary.sd = std::sqrt(SampleVariance(values));
    }
  } else {
    const auto& levels = dataset.levels(f.index);
    std::vector<std::size_t> counts(levels.size(), 0);
    for (std::int32_t code : dataset.codes(f.index)) ++counts[code];
    for (std::size_t i = 0; i < levels.size(); ++i) {
      summary.category_counts[levels[i]] = counts[i];
    }
  }
  return summary;
}

StandardizedView StandardizedView::Fit(const Dataset& dataset,
                                       std::span<const std::string> features,
                                       Scaling scaling) {
  if (features.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "standardization needs at least one feature");
  }
  if (dataset.row_count() == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot standardize an empty dataset");
  }
  StandardizedView view;
  view.scaling_ = scaling;
  for (const std::string& name : features) {
    const Feature& f = dataset.feature(name);
    EncodedColumn col;
    col.feature = f;
    col.offset = view.width_;
    if (f.kind == FeatureKind::kNumeric) {
      auto values = dataset.numeric(f.index);
      col.mean = Mean(values);
      col.sd = std::sqrt(SampleVariance(values));
      col.zero_variance = !(col.sd > 0.0);
      col.width = 1;
    } else {
      col.width = dataset.levels(f.index).size();
      col.zero_variance = col.width < 2;
    }
    view.width_ += col.width;
    view.columns_.push_back(std::move(col));
  }
  return view;
}

void StandardizedView::EncodeRow(const Dataset& dataset, std::size_t row,
                                 std::span<double> out) const {
  static const double kIndicator = 1.0 / std::sqrt(2.0);
  for (const EncodedColumn& col : columns_) {
    if (col.feature.kind == FeatureKind::kNumeric) {
      const double x = dataset.numeric(col.feature.index)[row];
      if (scaling_ == Scaling::kRaw) {
        out[col.offset] = x;
      } else {
        out[col.offset] = col.zero_variance ? 0.0 : (x - col.mean) / col.sd;
      }
    } else {
      std::fill_n(out.begin() + col.offset, col.width, 0.0);
      out[col.offset + dataset.codes(col.feature.index)[row]] = kIndicator;
    }
  }
}

PointSet StandardizedView::Encode(const Dataset& dataset,
                                  std::span<const std::size_t> rows) const {
  PointSet points;
  points.dim = width_;
  points.data.resize(rows.size() * width_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EncodeRow(dataset, rows[i],
              std::span<double>(points.data.data() + i * width_, width_));
  }
  return points;
}

PointSet StandardizedView::EncodeAll(const Dataset& dataset) const {
  std::vector<std::size_t> rows(dataset.row_count());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return Encode(dataset, rows);
}

}  // namespace cofact
