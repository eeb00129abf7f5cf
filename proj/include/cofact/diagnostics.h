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

// Outcome comparisons between row groups, covariate balance, and the
// support classification of a filter -> outcome relationship.

#ifndef COFACT_DIAGNOSTICS_H_
#define COFACT_DIAGNOSTICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cofact/filtering.h"
#include "cofact/matching.h"
#include "cofact/tabular.h"

namespace cofact {

// |mean_a - mean_b| / sqrt((var_a + var_b) / 2) with sample variances.
// Returns 0 when both variances are zero and the means agree, and +inf when
// they are zero and the means differ.
double StandardizedMeanDifference(std::span<const double> a,
                                  std::span<const double> b);

// Exact two-sample Kolmogorov-Smirnov statistic via a sorted merge.
double KsStatistic(std::span<const double> a, std::span<const double> b);

// Signed (mean_a - mean_b) / pooled sd, pooled with Bessel correction.
double CohensD(std::span<const double> a, std::span<const double> b);

struct Histogram {
  std::vector<double> bin_edges;  // bins + 1 edges over the union range.
  std::vector<std::size_t> counts_a;
  std::vector<std::size_t> counts_b;
};

// Equal-width bins over [min, max] of both samples; max lands in the last
// bin. A degenerate range is widened to [v - 0.5, v + 0.5]. An explicit
// `range` must cover both samples.
using ValueRange = std::pair<double, double>;
Histogram SharedHistogram(std::span<const double> a, std::span<const double> b,
                          std::size_t bins,
                          std::optional<ValueRange> range = std::nullopt);

struct GroupComparison {
  std::string outcome;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  double group_a_mean = 0.0;
  double group_b_mean = 0.0;
  double mean_difference = 0.0;  // a - b
  double cohens_d = 0.0;
  double ks_statistic = 0.0;
  Histogram histogram;
};

inline constexpr std::size_t kDefaultBins = 20;

GroupComparison CompareGroups(const Dataset& dataset,
                              std::span<const std::size_t> rows_a,
                              std::span<const std::size_t> rows_b,
                              std::string_view outcome,
                              std::size_t bins = kDefaultBins,
                              std::optional<ValueRange> range = std::nullopt);

struct CovariateBalance {
  std::string name;
  double smd_naive = 0.0;           // included vs. excluded
  double smd_counterfactual = 0.0;  // included vs. counterfactual
};

struct BalanceReport {
  std::vector<CovariateBalance> covariates;
  double max_smd_naive = 0.0;
  double max_smd_cf = 0.0;
  bool has_infinite = false;
};

// Categorical covariates report the largest SMD over their category
// indicators.
BalanceReport ComputeBalance(const Dataset& dataset,
                             const SubsetPartition& partition,
                             std::span<const std::size_t> counterfactual,
                             std::span<const std::string> covariates);

enum class SupportClass { kWeakened, kPreserved, kIndeterminate };

std::string_view SupportClassName(SupportClass support);

struct SupportThresholds {
  double weakened_below = 0.5;
  double preserved_at_least = 0.7;
  // Naive gaps below this many pooled standard deviations are negligible.
  double negligible_gap_sd = 0.05;
};

struct AnalysisReport {
  std::string outcome;
  FilterSpec filter;
  std::size_t row_count = 0;
  std::size_t included_count = 0;
  std::size_t excluded_count = 0;
  CounterfactualResult counterfactual;
  GroupComparison naive;
  GroupComparison cf;
  BalanceReport balance;
  std::optional<double> support_ratio;  // Undefined when the naive gap is 0.
  SupportClass support_class = SupportClass::kIndeterminate;
  SupportThresholds thresholds;
};

// Implements the classification rule: indeterminate when |naive Cohen's d| is
// below negligible_gap_sd or the ratio is undefined, otherwise weakened below
// weakened_below, preserved at or above preserved_at_least.
SupportClass ClassifySupport(const GroupComparison& naive,
                             std::optional<double> support_ratio,
                             const SupportThresholds& thresholds);

AnalysisReport BuildReport(const Dataset& dataset,
                           const SubsetPartition& partition,
                           const CounterfactualResult& cf_result,
                           std::string_view outcome,
                           std::size_t bins = kDefaultBins,
                           const SupportThresholds& thresholds = {});

}  // namespace cofact

#endif  // COFACT_DIAGNOSTICS_H_
