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

#include "cofact/filtering.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "cofact/error.h"

namespace cofact {
namespace {

using nlohmann::json;

[[noreturn]] void SyntaxError(std::size_t pos, const std::string& message) {
  throw Error(ErrorCode::kParse,
              "filter syntax error at position " + std::to_string(pos) + ": " +
                  message);
}

bool IsPunct(char c) {
  return c == '<' || c == '>' || c == '=' || c == '[' || c == ']' ||
         c == '{' || c == '}' || c == ',' || c == '"';
}

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) ==
                  std::toupper(static_cast<unsigned char>(y));
         });
}

class FilterParser {
 public:
  explicit FilterParser(std::string_view text) : text_(text) {}

  FilterSpec Parse() {
    std::vector<Clause> clauses;
    SkipSpace();
    if (AtEnd()) SyntaxError(pos_, "empty filter expression");
    clauses.push_back(ParseClause());
    while (true) {
      SkipSpace();
      if (AtEnd()) break;
      const std::size_t at = pos_;
      std::string word = ReadBare();
      if (EqualsIgnoreCase(word, "AND")) {
        clauses.push_back(ParseClause());
      } else if (EqualsIgnoreCase(word, "OR")) {
        SyntaxError(at, "OR is reserved; only AND conjunctions are supported");
      } else {
        SyntaxError(at, "expected AND");
      }
    }
    return FilterSpec(std::move(clauses));
  }

 private:
  bool AtEnd() const { return pos_ >= text_.size(); }
  char Peek() const { return AtEnd() ? '\0' : text_[pos_]; }

  void SkipSpace() {
    while (!AtEnd() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  void Expect(char c) {
    SkipSpace();
    if (Peek() != c) {
      SyntaxError(pos_, std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  std::string ReadBare() {
    std::size_t start = pos_;
    while (!AtEnd() && !IsPunct(text_[pos_]) &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string ReadQuoted() {
    const std::size_t start = pos_;
    ++pos_;  // opening quote
    std::string out;
    while (true) {
      if (AtEnd()) SyntaxError(start, "unterminated quoted string");
      char c = text_[pos_++];
      if (c == '"') {
        if (Peek() == '"') {
          out.push_back('"');
          ++pos_;
          continue;
        }
        return out;
      }
      out.push_back(c);
    }
  }

  std::string ReadName() {
    SkipSpace();
    const std::size_t at = pos_;
    std::string name = Peek() == '"' ? ReadQuoted() : ReadBare();
    if (name.empty()) SyntaxError(at, "expected a feature name");
    return name;
  }

  double ReadNumber() {
    SkipSpace();
    const std::size_t at = pos_;
    std::string token = ReadBare();
    if (token.empty()) SyntaxError(at, "expected a number");
    auto value = ParseFiniteNumber(token);
    if (!value) SyntaxError(at, "'" + token + "' is not a finite number");
    return *value;
  }

  // A set member: quoted string, or raw text up to ',' or '}' (trimmed).
  std::string ReadValue() {
    SkipSpace();
    const std::size_t at = pos_;
    if (Peek() == '"') return ReadQuoted();
    std::size_t end = pos_;
    while (end < text_.size() && text_[end] != ',' && text_[end] != '}') {
      ++end;
    }
    std::string_view raw = text_.substr(pos_, end - pos_);
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) {
      raw.remove_suffix(1);
    }
    pos_ = end;
    if (raw.empty()) SyntaxError(at, "expected a category value");
    return std::string(raw);
  }

  Clause ParseClause() {
    std::string name = ReadName();
    SkipSpace();
    const std::size_t at = pos_;
    const char c = Peek();
    if (c == '<' || c == '>' || c == '=') {
      ++pos_;
      bool or_equal = false;
      if (c != '=' && Peek() == '=') {
        or_equal = true;
        ++pos_;
      }
      const double bound = ReadNumber();
      RangeClause range;
      range.feature = name;
      if (c == '=') {
        range.lower = bound;
        range.upper = bound;
      } else if (c == '<') {
        range.upper = bound;
        range.upper_inclusive = or_equal;
      } else {
        range.lower = bound;
        range.lower_inclusive = or_equal;
      }
      return range;
    }
    std::string word = ReadBare();
    if (!EqualsIgnoreCase(word, "IN")) {
      SyntaxError(at, "expected a comparison operator or IN");
    }
    SkipSpace();
    if (Peek() == '[') {
      ++pos_;
      RangeClause range;
      range.feature = name;
      range.lower = ReadNumber();
      Expect(',');
      range.upper = ReadNumber();
      Expect(']');
      return range;
    }
    if (Peek() == '{') {
      ++pos_;
      SetClause set;
      set.feature = name;
      set.values.push_back(ReadValue());
      while (true) {
        SkipSpace();
        if (Peek() == ',') {
          ++pos_;
          set.values.push_back(ReadValue());
        } else {
          break;
        }
      }
      Expect('}');
      return set;
    }
    SyntaxError(pos_, "expected '[' or '{' after IN");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Clause evaluation with categorical membership resolved to codes.
struct CompiledClause {
  std::size_t column = 0;
  const RangeClause* range = nullptr;
  std::vector<bool> allowed_codes;
};

std::vector<CompiledClause> Compile(const FilterSpec& filter,
                                    const Dataset& dataset) {
  std::vector<CompiledClause> compiled;
  for (const Clause& clause : filter.clauses()) {
    CompiledClause cc;
    cc.column = dataset.feature(ClauseFeature(clause)).index;
    if (const auto* range = std::get_if<RangeClause>(&clause)) {
      cc.range = range;
    } else {
      const auto& set = std::get<SetClause>(clause);
      const auto& levels = dataset.levels(cc.column);
      cc.allowed_codes.assign(levels.size(), false);
      for (std::size_t i = 0; i < levels.size(); ++i) {
        cc.allowed_codes[i] = std::find(set.values.begin(), set.values.end(),
                                        levels[i]) != set.values.end();
      }
    }
    compiled.push_back(std::move(cc));
  }
  return compiled;
}

bool RangeContains(const RangeClause& range, double x) {
  if (range.lower) {
    if (range.lower_inclusive ? x < *range.lower : x <= *range.lower) {
      return false;
    }
  }
  if (range.upper) {
    if (range.upper_inclusive ? x > *range.upper : x >= *range.upper) {
      return false;
    }
  }
  return true;
}

bool Evaluate(const std::vector<CompiledClause>& clauses,
              const Dataset& dataset, std::size_t row) {
  for (const CompiledClause& cc : clauses) {
    if (cc.range) {
      if (!RangeContains(*cc.range, dataset.numeric(cc.column)[row])) {
        return false;
      }
    } else if (!cc.allowed_codes[dataset.codes(cc.column)[row]]) {
      return false;
    }
  }
  return true;
}

}  // namespace

const std::string& ClauseFeature(const Clause& clause) {
  return std::visit([](const auto& c) -> const std::string& { return c.feature; },
                    clause);
}

std::vector<std::string> FilterSpec::Features() const {
  std::vector<std::string> names;
  for (const Clause& clause : clauses_) {
    const std::string& name = ClauseFeature(clause);
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      names.push_back(name);
    }
  }
  return names;
}

bool FilterSpec::Matches(const Dataset& dataset, std::size_t row) const {
  return Evaluate(Compile(*this, dataset), dataset, row);
}

void Validate(const FilterSpec& filter, const Dataset& dataset) {
  if (filter.clauses().empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "filter needs at least one clause");
  }
  for (const Clause& clause : filter.clauses()) {
    const Feature& f = dataset.feature(ClauseFeature(clause));
    if (const auto* range = std::get_if<RangeClause>(&clause)) {
      if (f.kind != FeatureKind::kNumeric) {
        throw Error(ErrorCode::kInvalidArgument,
                    "kind mismatch: range clause on categorical feature '" +
                        f.name + "'");
      }
      if (!range->lower && !range->upper) {
        throw Error(ErrorCode::kInvalidArgument,
                    "range clause on '" + f.name + "' has no bounds");
      }
      if ((range->lower && !std::isfinite(*range->lower)) ||
          (range->upper && !std::isfinite(*range->upper))) {
        throw Error(ErrorCode::kInvalidArgument,
                    "range clause on '" + f.name + "' has a non-finite bound");
      }
      if (range->lower && range->upper && *range->lower > *range->upper) {
        throw Error(ErrorCode::kInvalidArgument,
                    "bound order: lower bound exceeds upper bound on '" +
                        f.name + "'");
      }
    } else {
      const auto& set = std::get<SetClause>(clause);
      if (f.kind != FeatureKind::kCategorical) {
        throw Error(ErrorCode::kInvalidArgument,
                    "kind mismatch: set clause on numeric feature '" + f.name +
                        "'");
      }
      if (set.values.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "set clause on '" + f.name + "' has no values");
      }
    }
  }
}

FilterSpec ParseFilter(std::string_view expression, const Dataset& dataset) {
  FilterSpec filter = FilterParser(expression).Parse();
  Validate(filter, dataset);
  return filter;
}

nlohmann::json FilterToJson(const FilterSpec& filter) {
  json clauses = json::array();
  for (const Clause& clause : filter.clauses()) {
    json c;
    if (const auto* range = std::get_if<RangeClause>(&clause)) {
      c["feature"] = range->feature;
      c["type"] = "range";
      if (range->lower) {
        c["min"] = *range->lower;
        c["minInclusive"] = range->lower_inclusive;
      }
      if (range->upper) {
        c["max"] = *range->upper;
        c["maxInclusive"] = range->upper_inclusive;
      }
    } else {
      const auto& set = std::get<SetClause>(clause);
      c["feature"] = set.feature;
      c["type"] = "set";
      c["values"] = set.values;
    }
    clauses.push_back(std::move(c));
  }
  return json{{"clauses", std::move(clauses)}};
}

FilterSpec FilterFromJson(const nlohmann::json& doc, const Dataset& dataset) {
  if (!doc.is_object() || !doc.contains("clauses") ||
      !doc["clauses"].is_array()) {
    throw Error(ErrorCode::kParse, "filter JSON needs a \"clauses\" array");
  }
  std::vector<Clause> clauses;
  try {
    for (const json& c : doc["clauses"]) {
      const std::string feature = c.at("feature").get<std::string>();
      const std::string type = c.at("type").get<std::string>();
      if (type == "range") {
        RangeClause range;
        range.feature = feature;
        if (c.contains("min") && !c["min"].is_null()) {
          range.lower = c["min"].get<double>();
          range.lower_inclusive = c.value("minInclusive", true);
        }
        if (c.contains("max") && !c["max"].is_null()) {
          range.upper = c["max"].get<double>();
          range.upper_inclusive = c.value("maxInclusive", true);
        }
        clauses.emplace_back(std::move(range));
      } else if (type == "set") {
        clauses.emplace_back(
            SetClause{feature, c.at("values").get<std::vector<std::string>>()});
      } else {
        throw Error(ErrorCode::kParse, "unknown clause type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("filter JSON: ") + e.what());
  }
  FilterSpec filter(std::move(clauses));
  Validate(filter, dataset);
  return filter;
}

SubsetPartition Partition(const Dataset& dataset, const FilterSpec& filter) {
  Validate(filter, dataset);
  const auto compiled = Compile(filter, dataset);
  SubsetPartition partition;
  partition.filter = filter;
  for (std::size_t row = 0; row < dataset.row_count(); ++row) {
    (Evaluate(compiled, dataset, row) ? partition.included
                                      : partition.excluded)
        .push_back(row);
  }
  return partition;
}

}  // namespace cofact
