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

// Inclusion filters and the included/excluded row partition.
//
// Grammar (conjunction only; OR is reserved):
//   filter := clause ("AND" clause)*
//   clause := name op number          op in {<, <=, >, >=, =}
//           | name "IN" "[" number "," number "]"
//           | name "IN" "{" value ("," value)* "}"
// Names and values are bare tokens or double-quoted strings.

#ifndef COFACT_FILTERING_H_
#define COFACT_FILTERING_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cofact/tabular.h"
#include "json.hpp"

namespace cofact {

struct RangeClause {
  std::string feature;
  std::optional<double> lower;
  std::optional<double> upper;
  bool lower_inclusive = true;
  bool upper_inclusive = true;

  bool operator==(const RangeClause&) const = default;
};

struct SetClause {
  std::string feature;
  std::vector<std::string> values;

  bool operator==(const SetClause&) const = default;
};

using Clause = std::variant<RangeClause, SetClause>;

const std::string& ClauseFeature(const Clause& clause);

class FilterSpec {
 public:
  FilterSpec() = default;
  explicit FilterSpec(std::vector<Clause> clauses)
      : clauses_(std::move(clauses)) {}

  const std::vector<Clause>& clauses() const { return clauses_; }

  // Distinct feature names referenced by the clauses, in clause order.
  std::vector<std::string> Features() const;

  // Conjunction of every clause. Assumes Validate() passed for `dataset`.
  bool Matches(const Dataset& dataset, std::size_t row) const;

  bool operator==(const FilterSpec&) const = default;

 private:
  std::vector<Clause> clauses_;
};

// Throws kInvalidArgument / kNotFound when the filter does not fit `dataset`.
void Validate(const FilterSpec& filter, const Dataset& dataset);

// Syntax errors carry the 0-based character offset in the message.
FilterSpec ParseFilter(std::string_view expression, const Dataset& dataset);

nlohmann::json FilterToJson(const FilterSpec& filter);
FilterSpec FilterFromJson(const nlohmann::json& doc, const Dataset& dataset);

struct SubsetPartition {
  FilterSpec filter;
  std::vector<std::size_t> included;  // Sorted.
  std::vector<std::size_t> excluded;  // Sorted.
};

SubsetPartition Partition(const Dataset& dataset, const FilterSpec& filter);

}  // namespace cofact

#endif  // COFACT_FILTERING_H_
