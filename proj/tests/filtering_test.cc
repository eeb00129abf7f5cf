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
#include <functional>
#include <random>
#include <string>

#include "cofact/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace cofact {
namespace {

using ::cofact::testing::FixturePath;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected cofact::Error";
  return ErrorCode::kIo;
}

std::string ErrorText(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

Dataset Sample() {
  return LoadCsvString(
      "price,city,\"lot size\"\n"
      "100,Austin,1\n"
      "200,Boston,2\n"
      "300,Austin,3\n"
      "400,New York,4\n"
      "500,Boston,5\n");
}

std::vector<std::size_t> Included(const Dataset& d, std::string_view expr) {
  return Partition(d, ParseFilter(expr, d)).included;
}

TEST(ParseFilter, Comparisons) {
  const Dataset d = Sample();
  EXPECT_EQ(Included(d, "price > 300"), (std::vector<std::size_t>{3, 4}));
  EXPECT_EQ(Included(d, "price >= 300"), (std::vector<std::size_t>{2, 3, 4}));
  EXPECT_EQ(Included(d, "price < 200"), (std::vector<std::size_t>{0}));
  EXPECT_EQ(Included(d, "price <= 200"), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(Included(d, "price = 400"), (std::vector<std::size_t>{3}));
  EXPECT_EQ(Included(d, "price>=1e2"), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(Included(d, "price > -5"), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(ParseFilter, ClosedInterval) {
  const Dataset d = Sample();
  const FilterSpec f = ParseFilter("price IN [200, 400]", d);
  ASSERT_EQ(f.clauses().size(), 1u);
  const auto& r = std::get<RangeClause>(f.clauses()[0]);
  EXPECT_EQ(r.lower, 200.0);
  EXPECT_EQ(r.upper, 400.0);
  EXPECT_TRUE(r.lower_inclusive && r.upper_inclusive);
  EXPECT_EQ(Partition(d, f).included, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(ParseFilter, SetsQuotingAndConjunction) {
  const Dataset d = Sample();
  EXPECT_EQ(Included(d, R"(city IN {Boston, "New York"})"),
            (std::vector<std::size_t>{1, 3, 4}));
  EXPECT_EQ(Included(d, R"(city in {Austin} and "lot size" > 1)"),
            (std::vector<std::size_t>{2}));
  EXPECT_EQ(Included(d, "city IN {Austin} AND price < 300 AND price > 50"),
            (std::vector<std::size_t>{0}));
  EXPECT_EQ(ParseFilter("city IN {Austin} AND price > 1", d).Features(),
            (std::vector<std::string>{"city", "price"}));
}

TEST(ParseFilter, UnseenCategoryMatchesNothing) {
  const Dataset d = Sample();
  EXPECT_TRUE(Included(d, "city IN {Denver}").empty());
}

TEST(ParseFilter, SyntaxErrorsCarryPosition) {
  const Dataset d = Sample();
  struct Case {
    const char* text;
    std::size_t position;
  };
  for (const Case& c : {Case{"", 0}, Case{"price >", 7}, Case{"price ~ 3", 6},
                        Case{"price > 3 OR price < 1", 10},
                        Case{"price > 3 price < 1", 10},
                        Case{"price IN (1, 2)", 9}, Case{"price > abc", 8},
                        Case{"\"price > 3", 0}, Case{"price > nan", 8}}) {
    const std::string msg = ErrorText([&] { ParseFilter(c.text, d); });
    EXPECT_NE(msg.find("position " + std::to_string(c.position) + ":"),
              std::string::npos)
        << c.text << " -> " << msg;
    EXPECT_EQ(CodeOf([&] { ParseFilter(c.text, d); }), ErrorCode::kParse);
  }
}

TEST(ParseFilter, OrIsReserved) {
  const Dataset d = Sample();
  EXPECT_NE(ErrorText([&] { ParseFilter("price > 1 or price < 0", d); }).find("OR"),
            std::string::npos);
}

TEST(Validate, KindMismatch) {
  const Dataset d = Sample();
  EXPECT_NE(ErrorText([&] { ParseFilter("city > 3", d); }).find("kind mismatch"),
            std::string::npos);
  EXPECT_NE(ErrorText([&] { ParseFilter("price IN {1}", d); }).find("kind mismatch"),
            std::string::npos);
}

TEST(Validate, BoundOrder) {
  const Dataset d = Sample();
  EXPECT_NE(ErrorText([&] { ParseFilter("price IN [5, 1]", d); }).find("bound order"),
            std::string::npos);
  EXPECT_EQ(CodeOf([&] { ParseFilter("price IN [5, 1]", d); }),
            ErrorCode::kInvalidArgument);
}

TEST(Validate, UnknownFeatureAndEmptyFilter) {
  const Dataset d = Sample();
  EXPECT_EQ(CodeOf([&] { ParseFilter("nope > 1", d); }), ErrorCode::kNotFound);
  EXPECT_EQ(CodeOf([&] { Validate(FilterSpec{}, d); }), ErrorCode::kInvalidArgument);
  RangeClause unbounded;
  unbounded.feature = "price";
  EXPECT_EQ(CodeOf([&] { Validate(FilterSpec({unbounded}), d); }),
            ErrorCode::kInvalidArgument);
  SetClause empty_set;
  empty_set.feature = "city";
  EXPECT_EQ(CodeOf([&] { Validate(FilterSpec({empty_set}), d); }),
            ErrorCode::kInvalidArgument);
}

TEST(FilterJson, RoundTrip) {
  const Dataset d = Sample();
  const FilterSpec f =
      ParseFilter(R"(price > 150 AND city IN {Boston, "New York"} AND "lot size" <= 4)", d);
  const nlohmann::json doc = FilterToJson(f);
  EXPECT_EQ(doc["clauses"][0]["type"], "range");
  EXPECT_EQ(doc["clauses"][0]["min"], 150.0);
  EXPECT_EQ(doc["clauses"][0]["minInclusive"], false);
  EXPECT_EQ(doc["clauses"][1]["type"], "set");
  EXPECT_EQ(FilterFromJson(doc, d), f);
  EXPECT_EQ(FilterFromJson(nlohmann::json::parse(doc.dump()), d), f);
}

TEST(FilterJson, Errors) {
  const Dataset d = Sample();
  EXPECT_EQ(CodeOf([&] { FilterFromJson(nlohmann::json::object(), d); }),
            ErrorCode::kParse);
  EXPECT_EQ(CodeOf([&] {
              FilterFromJson(nlohmann::json::parse(
                                 R"({"clauses":[{"feature":"price","type":"glob"}]})"),
                             d);
            }),
            ErrorCode::kParse);
  EXPECT_EQ(CodeOf([&] {
              FilterFromJson(
                  nlohmann::json::parse(
                      R"({"clauses":[{"feature":"price","type":"range","min":5,"max":1}]})"),
                  d);
            }),
            ErrorCode::kInvalidArgument);
}

// Property: included and excluded are disjoint, sorted, and cover every row,
// and each row lands on the side its own Matches() call predicts.
TEST(Partition, ComplementProperty) {
  std::mt19937_64 rng(5);
  const Dataset d = testing::RandomNumericDataset(400, 3, 11);
  for (int trial = 0; trial < 50; ++trial) {
    std::normal_distribution<double> normal;
    std::vector<Clause> clauses;
    const int count = 1 + static_cast<int>(rng() % 3);
    for (int c = 0; c < count; ++c) {
      RangeClause r;
      r.feature = "x" + std::to_string(rng() % 3);
      double a = normal(rng);
      double b = normal(rng);
      if (a > b) std::swap(a, b);
      if (rng() % 3 != 0) r.lower = a;
      if (rng() % 3 != 0 || !r.lower) r.upper = b;
      r.lower_inclusive = rng() % 2 == 0;
      r.upper_inclusive = rng() % 2 == 0;
      clauses.push_back(r);
    }
    const FilterSpec f(clauses);
    const SubsetPartition p = Partition(d, f);
    EXPECT_EQ(p.included.size() + p.excluded.size(), d.row_count());
    EXPECT_TRUE(std::is_sorted(p.included.begin(), p.included.end()));
    EXPECT_TRUE(std::is_sorted(p.excluded.begin(), p.excluded.end()));
    std::vector<std::size_t> all(p.included);
    all.insert(all.end(), p.excluded.begin(), p.excluded.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) ASSERT_EQ(all[i], i);
    for (std::size_t row : p.included) EXPECT_TRUE(f.Matches(d, row));
    for (std::size_t row : p.excluded) EXPECT_FALSE(f.Matches(d, row));
  }
}

TEST(Partition, HousingAtMedianSqft) {
  // 253 of 506 rows have sqft >= 1707 (recomputed independently from the CSV).
  const Dataset d = LoadCsvFile(FixturePath("housing.csv"));
  const SubsetPartition p = Partition(d, ParseFilter("sqft >= 1707", d));
  EXPECT_EQ(p.included.size(), 253u);
  EXPECT_EQ(p.excluded.size(), 253u);
}

}  // namespace
}  // namespace cofact
