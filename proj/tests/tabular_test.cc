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
#include <cmath>
#include <functional>
#include <fstream>
#include <random>
#include <sstream>
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

TEST(LoadCsv, InfersNumericAndCategorical) {
  const Dataset d = LoadCsvString("x,y\n1,a\n2,b\n");
  ASSERT_EQ(d.feature_count(), 2u);
  EXPECT_EQ(d.row_count(), 2u);
  EXPECT_EQ(d.feature("x").kind, FeatureKind::kNumeric);
  EXPECT_EQ(d.feature("y").kind, FeatureKind::kCategorical);
  EXPECT_EQ(d.numeric(0)[1], 2.0);
  EXPECT_EQ(d.CellText(1, 1), "b");
}

TEST(LoadCsv, MixedColumnFallsBackToCategorical) {
  const Dataset d = LoadCsvString("x\n1\noops\n");
  EXPECT_EQ(d.feature("x").kind, FeatureKind::kCategorical);
  EXPECT_EQ(d.levels(0), (std::vector<std::string>{"1", "oops"}));
}

TEST(LoadCsv, ScientificNotationAndNonFiniteTokens) {
  EXPECT_EQ(ParseFiniteNumber("1.5e3"), 1500.0);
  EXPECT_EQ(ParseFiniteNumber("-2E-2"), -0.02);
  EXPECT_EQ(ParseFiniteNumber("+4"), 4.0);
  EXPECT_EQ(ParseFiniteNumber(" 7 "), 7.0);
  for (const char* bad : {"nan", "NaN", "inf", "-Infinity", "1e999", "1.2.3",
                          "12abc", "", "-"}) {
    EXPECT_FALSE(ParseFiniteNumber(bad).has_value()) << bad;
  }
  const Dataset d = LoadCsvString("x\n1\nNaN\n");
  EXPECT_EQ(d.feature("x").kind, FeatureKind::kCategorical);
}

TEST(LoadCsv, QuotedFields) {
  const Dataset d =
      LoadCsvString("name,\"note, with comma\"\n\"a \"\"b\"\"\",\"x\ny\"\nc,z\n");
  EXPECT_EQ(d.features()[1].name, "note, with comma");
  EXPECT_EQ(d.CellText(0, 0), "a \"b\"");
  EXPECT_EQ(d.CellText(0, 1), "x\ny");
  EXPECT_EQ(d.row_count(), 2u);
}

TEST(LoadCsv, CrLfAndBom) {
  const Dataset d = LoadCsvString("\xEF\xBB\xBFx,y\r\n1,2\r\n3,4\r\n");
  EXPECT_EQ(d.features()[0].name, "x");
  EXPECT_EQ(d.row_count(), 2u);
}

TEST(LoadCsv, RaggedRowNamesLine) {
  EXPECT_EQ(CodeOf([] { LoadCsvString("a,b\n1,2\n3\n"); }), ErrorCode::kParse);
  EXPECT_NE(ErrorText([] { LoadCsvString("a,b\n1,2\n3\n"); }).find("line 3"),
            std::string::npos);
}

TEST(LoadCsv, EmptyHeader) {
  EXPECT_EQ(CodeOf([] { LoadCsvString(""); }), ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] { LoadCsvString("\n\n"); }), ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] { LoadCsvString("a,,c\n1,2,3\n"); }), ErrorCode::kParse);
}

TEST(LoadCsv, DuplicateHeader) {
  EXPECT_EQ(CodeOf([] { LoadCsvString("a,a\n1,2\n"); }),
            ErrorCode::kInvalidArgument);
}

TEST(LoadCsv, MissingCellRejectedByDefault) {
  const std::string csv = "a,b\n1,2\n3,\n5,6\n";
  const std::string msg = ErrorText([&] { LoadCsvString(csv); });
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
}

TEST(LoadCsv, DropPolicyReportsCount) {
  LoadOptions options;
  options.missing = MissingPolicy::kDropRows;
  const Dataset d = LoadCsvString("a,b\n1,2\n3,\n,\n5,6\n", options);
  EXPECT_EQ(d.row_count(), 2u);
  EXPECT_EQ(d.dropped_rows(), 2u);
  EXPECT_EQ(d.numeric(0)[1], 5.0);
}

TEST(LoadCsv, TypeHints) {
  LoadOptions options;
  options.type_hints = ParseTypeHints(R"({"zip": "categorical"})");
  const Dataset d = LoadCsvString("zip,v\n27599,1\n27514,2\n", options);
  EXPECT_EQ(d.feature("zip").kind, FeatureKind::kCategorical);

  options.type_hints = ParseTypeHints(R"({"name": "numeric"})");
  EXPECT_EQ(CodeOf([&] { LoadCsvString("name\nbob\n", options); }),
            ErrorCode::kInvalidArgument);
  options.type_hints = ParseTypeHints(R"({"nope": "numeric"})");
  EXPECT_EQ(CodeOf([&] { LoadCsvString("a\n1\n", options); }),
            ErrorCode::kNotFound);
  EXPECT_EQ(CodeOf([] { ParseTypeHints(R"({"a": "text"})"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { ParseTypeHints("[1]"); }), ErrorCode::kParse);
}

TEST(LoadCsv, MissingFileIsIo) {
  EXPECT_EQ(CodeOf([] { LoadCsvFile("/nonexistent/data.csv"); }), ErrorCode::kIo);
}

TEST(LoadCsv, HousingFixtureShape) {
  // Independent count: the fixture has no quoted fields, so a plain split works.
  std::ifstream in(FixturePath("housing.csv"));
  std::string line;
  std::size_t lines = 0;
  std::size_t header_fields = 0;
  while (std::getline(in, line)) {
    const auto fields =
        static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (lines == 0) header_fields = fields;
    EXPECT_EQ(fields, header_fields);
    ++lines;
  }
  EXPECT_EQ(lines - 1, 506u);
  EXPECT_EQ(header_fields, 14u);

  const Dataset d = LoadCsvFile(FixturePath("housing.csv"));
  EXPECT_EQ(d.row_count(), 506u);
  EXPECT_EQ(d.feature_count(), 14u);
  for (const Feature& f : d.features()) {
    EXPECT_EQ(f.kind, FeatureKind::kNumeric) << f.name;
  }
}

TEST(SummarizeFeature, Numeric) {
  const Dataset d = LoadCsvString("x\n1\n2\n3\n");
  const FeatureSummary s = SummarizeFeature(d, "x");
  EXPECT_EQ(s.count, 3u);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 3.0);
  EXPECT_EQ(s.mean, 2.0);
  EXPECT_EQ(s.sd, 1.0);
}

TEST(SummarizeFeature, Categorical) {
  const Dataset d = LoadCsvString("c\na\na\nb\n");
  const FeatureSummary s = SummarizeFeature(d, "c");
  EXPECT_EQ(s.category_counts, (std::map<std::string, std::size_t>{{"a", 2}, {"b", 1}}));
}

TEST(SummarizeFeature, UnknownFeature) {
  const Dataset d = LoadCsvString("c\na\n");
  EXPECT_EQ(CodeOf([&] { SummarizeFeature(d, "zzz"); }), ErrorCode::kNotFound);
}

TEST(SummarizeFeature, HousingPriceMatchesScriptRecomputation) {
  // Values from a one-off Python statistics recomputation of the fixture.
  const Dataset d = LoadCsvFile(FixturePath("housing.csv"));
  const FeatureSummary s = SummarizeFeature(d, "price");
  EXPECT_EQ(s.count, 506u);
  EXPECT_EQ(s.min, 109900.0);
  EXPECT_EQ(s.max, 1094000.0);
  EXPECT_NEAR(s.mean, 381142.8853754941, 1e-7);
  EXPECT_NEAR(s.sd, 127814.6938312762, 1e-7);
}

TEST(SummarizeFeature, CountsSumToRowCount) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::ostringstream csv;
    csv << "c\n";
    const int n = 1 + static_cast<int>(rng() % 50);
    for (int i = 0; i < n; ++i) csv << "L" << rng() % 5 << "\n";
    const Dataset d = LoadCsvString(csv.str());
    std::size_t total = 0;
    for (const auto& [label, count] : SummarizeFeature(d, "c").category_counts) {
      total += count;
    }
    EXPECT_EQ(total, d.row_count());
  }
}

TEST(Standardizer, TwoValueColumn) {
  const Dataset d = LoadCsvString("x\n2\n4\n");
  const std::vector<std::string> names{"x"};
  const auto view = StandardizedView::Fit(d, names);
  EXPECT_EQ(view.columns()[0].mean, 3.0);
  EXPECT_DOUBLE_EQ(view.columns()[0].sd, std::sqrt(2.0));
  const PointSet p = view.EncodeAll(d);
  EXPECT_NEAR(p.data[0], -1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(p.data[1], 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Standardizer, ZeroVarianceMapsToZero) {
  const Dataset d = LoadCsvString("x\n5\n5\n5\n");
  const std::vector<std::string> names{"x"};
  const auto view = StandardizedView::Fit(d, names);
  EXPECT_TRUE(view.columns()[0].zero_variance);
  EXPECT_EQ(view.EncodeAll(d).data, (std::vector<double>{0, 0, 0}));
}

TEST(Standardizer, CategoryMismatchCostsDistanceOne) {
  const Dataset d = LoadCsvString("c\na\nb\na\n");
  const std::vector<std::string> names{"c"};
  const auto view = StandardizedView::Fit(d, names);
  EXPECT_EQ(view.encoded_width(), 2u);
  const PointSet p = view.EncodeAll(d);
  double sq = 0.0;
  for (std::size_t j = 0; j < 2; ++j) sq += std::pow(p.row(0)[j] - p.row(1)[j], 2);
  EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-15);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(p.row(0)[j], p.row(2)[j]);
}

TEST(Standardizer, Errors) {
  const Dataset d = LoadCsvString("x\n1\n");
  const std::vector<std::string> none;
  const std::vector<std::string> unknown{"y"};
  EXPECT_EQ(CodeOf([&] { StandardizedView::Fit(d, none); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { StandardizedView::Fit(d, unknown); }),
            ErrorCode::kNotFound);
  const Dataset empty = LoadCsvString("x\n");
  const std::vector<std::string> x{"x"};
  EXPECT_EQ(CodeOf([&] { StandardizedView::Fit(empty, x); }),
            ErrorCode::kInvalidArgument);
}

TEST(Standardizer, RawScalingPassesValuesThrough) {
  const Dataset d = LoadCsvString("x\n10\n30\n");
  const std::vector<std::string> names{"x"};
  const auto view = StandardizedView::Fit(d, names, Scaling::kRaw);
  EXPECT_EQ(view.EncodeAll(d).data, (std::vector<double>{10, 30}));
}

// Property: every nonconstant numeric column has mean 0 and sd 1 after
// standardizing its own fit population.
TEST(Standardizer, MeanZeroSdOneProperty) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    const double scale = std::pow(10.0, static_cast<double>(rng() % 9) - 4.0);
    const double location = static_cast<double>(rng() % 1000);
    std::normal_distribution<double> normal(location, scale);
    std::vector<double> values(n);
    for (double& v : values) v = normal(rng);
    const Dataset d = testing::NumericDataset({"x"}, {values});
    const std::vector<std::string> names{"x"};
    const PointSet p = StandardizedView::Fit(d, names).EncodeAll(d);
    // Cancellation error grows with location / scale.
    EXPECT_NEAR(Mean(p.data), 0.0, 1e-12 * (1.0 + location / scale));
    EXPECT_NEAR(std::sqrt(SampleVariance(p.data)), 1.0, 1e-9);
  }
}

// Property: write -> load reproduces kinds, values, and order exactly.
TEST(CsvRoundTrip, Property) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uniform(-1e6, 1e6);
  const std::vector<std::string> labels{"a", "b c", "d,e", "q\"uote", "multi\nline",
                                        " padded "};
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<Feature> features;
    std::vector<Column> columns;
    const std::size_t width = 1 + rng() % 5;
    for (std::size_t c = 0; c < width; ++c) {
      Column col;
      const bool numeric = rng() % 2 == 0;
      if (numeric) {
        for (std::size_t i = 0; i < n; ++i) {
          double v = uniform(rng);
          if (rng() % 4 == 0) v = std::ldexp(v, -static_cast<int>(rng() % 60));
          col.values.push_back(v);
        }
      } else {
        std::vector<int> used(labels.size(), -1);
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t l = rng() % labels.size();
          if (used[l] < 0) {
            used[l] = static_cast<int>(col.levels.size());
            col.levels.push_back(labels[l]);
          }
          col.codes.push_back(used[l]);
        }
      }
      features.push_back({"col " + std::to_string(c),
                          numeric ? FeatureKind::kNumeric : FeatureKind::kCategorical,
                          c});
      columns.push_back(std::move(col));
    }
    const Dataset original(std::move(features), std::move(columns));
    const Dataset reloaded = LoadCsvString(WriteCsvString(original));
    EXPECT_EQ(reloaded, original) << WriteCsvString(original);
  }
}

TEST(Dataset, RejectsInvalidConstruction) {
  EXPECT_EQ(CodeOf([] {
              Dataset({{"", FeatureKind::kNumeric, 0}}, {Column{{1.0}, {}, {}}});
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] {
              Dataset({{"a", FeatureKind::kNumeric, 0}, {"b", FeatureKind::kNumeric, 1}},
                      {Column{{1.0}, {}, {}}, Column{{1.0, 2.0}, {}, {}}});
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] {
              Dataset({{"a", FeatureKind::kNumeric, 0}},
                      {Column{{std::nan("")}, {}, {}}});
            }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace cofact
