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

#include "cofact/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cofact/error.h"

namespace cofact {
namespace {

std::vector<double> Gather(std::span<const double> column,
                           std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(column[r]);
  return out;
}

std::vector<double> Indicator(std::span<const std::int32_t> codes,
                              std::span<const std::size_t> rows,
                              std::int32_t level) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(codes[r] == level ? 1.0 : 0.0);
  return out;
}

}  // namespace

double StandardizedMeanDifference(std::span<const double> a,
                                  std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "standardized mean difference needs nonempty samples");
  }
  const double gap = std::abs(Mean(a) - Mean(b));
  const double pooled = std::sqrt((SampleVariance(a) + SampleVariance(b)) / 2.0);
  if (pooled == 0.0) {
    return gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return gap / pooled;
}

double KsStatistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "KS statistic needs nonempty samples");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx -
                             static_cast<double>(j) / ny));
  }
  return d;
}

double CohensD(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "Cohen's d needs nonempty samples");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double diff = Mean(a) - Mean(b);
  const double dof = na + nb - 2.0;
  const double pooled_var =
      dof > 0.0 ? ((na - 1.0) * SampleVariance(a) + (nb - 1.0) * SampleVariance(b)) /
                      dof
                : 0.0;
  if (pooled_var == 0.0) {
    if (diff == 0.0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return diff / std::sqrt(pooled_var);
}

Histogram SharedHistogram(std::span<const double> a, std::span<const double> b,
                          std::size_t bins, std::optional<ValueRange> range) {
  if (bins == 0) {
    throw Error(ErrorCode::kInvalidArgument, "histogram needs at least one bin");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : a) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : b) lo = std::min(lo, v), hi = std::max(hi, v);
  if (range) {
    if (range->first > lo || range->second < hi) {
      throw Error(ErrorCode::kInvalidArgument,
                  "histogram range does not cover the samples");
    }
    lo = range->first;
    hi = range->second;
  }
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.bin_edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.bin_edges[i] = lo + width * static_cast<double>(i);
  }
  h.bin_edges[bins] = hi;
  const auto fill = [&](std::span<const double> values) {
    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) {
      auto bin = static_cast<std::size_t>((v - lo) / width);
      ++counts[std::min(bin, bins - 1)];
    }
    return counts;
  };
  h.counts_a = fill(a);
  h.counts_b = fill(b);
  return h;
}

GroupComparison CompareGroups(const Dataset& dataset,
                              std::span<const std::size_t> rows_a,
                              std::span<const std::size_t> rows_b,
                              std::string_view outcome, std::size_t bins,
                              std::optional<ValueRange> range) {
  const Feature& f = dataset.feature(outcome);
  if (f.kind != FeatureKind::kNumeric) {
    throw Error(ErrorCode::kInvalidArgument,
                "outcome '" + f.name + "' must be numeric");
  }
  if (rows_a.empty() || rows_b.empty()) {
    throw Error(ErrorCode::kEmptySubset, "cannot compare an empty group");
  }
  // Sorted copies make every statistic depend only on the multiset of values.
  std::vector<double> a = Gather(dataset.numeric(f.index), rows_a);
  std::vector<double> b = Gather(dataset.numeric(f.index), rows_b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  GroupComparison cmp;
  cmp.outcome = f.name;
  cmp.size_a = a.size();
  cmp.size_b = b.size();
  cmp.group_a_mean = Mean(a);
  cmp.group_b_mean = Mean(b);
  cmp.mean_difference = cmp.group_a_mean - cmp.group_b_mean;
  cmp.cohens_d = CohensD(a, b);
  cmp.ks_statistic = KsStatistic(a, b);
  cmp.histogram = SharedHistogram(a, b, bins, range);
  return cmp;
}

BalanceReport ComputeBalance(const Dataset& dataset,
                             const SubsetPartition& partition,
                             std::span<const std::size_t> counterfactual,
                             std::span<const std::string> covariates) {
  BalanceReport report;
  for (const std::string& name : covariates) {
    const Feature& f = dataset.feature(name);
    CovariateBalance entry{f.name};
    if (f.kind == FeatureKind::kNumeric) {
      const auto column = dataset.numeric(f.index);
      const auto inc = Gather(column, partition.included);
      entry.smd_naive =
          StandardizedMeanDifference(inc, Gather(column, partition.excluded));
      entry.smd_counterfactual =
          StandardizedMeanDifference(inc, Gather(column, counterfactual));
    } else {
      const auto codes = dataset.codes(f.index);
      const auto levels = static_cast<std::int32_t>(dataset.levels(f.index).size());
      for (std::int32_t level = 0; level < levels; ++level) {
        const auto inc = Indicator(codes, partition.included, level);
        entry.smd_naive = std::max(
            entry.smd_naive,
            StandardizedMeanDifference(
                inc, Indicator(codes, partition.excluded, level)));
        entry.smd_counterfactual = std::max(
            entry.smd_counterfactual,
            StandardizedMeanDifference(inc,
                                       Indicator(codes, counterfactual, level)));
      }
    }
    report.max_smd_naive = std::max(report.max_smd_naive, entry.smd_naive);
    report.max_smd_cf = std::max(report.max_smd_cf, entry.smd_counterfactual);
    if (std::isinf(entry.smd_naive) || std::isinf(entry.smd_counterfactual)) {
      report.has_infinite = true;
    }
    report.covariates.push_back(std::move(entry));
  }
  return report;
}

std::string_view SupportClassName(SupportClass support) {
  switch (support) {
    case SupportClass::kWeakened:
      return "weakened";
    case SupportClass::kPreserved:
      return "preserved";
    case SupportClass::kIndeterminate:
      return "indeterminate";
  }
  return "";
}

SupportClass ClassifySupport(const GroupComparison& naive,
                             std::optional<double> support_ratio,
                             const SupportThresholds& thresholds) {
  if (!support_ratio || !(std::abs(naive.cohens_d) >= thresholds.negligible_gap_sd)) {
    return SupportClass::kIndeterminate;
  }
  if (*support_ratio < thresholds.weakened_below) return SupportClass::kWeakened;
  if (*support_ratio >= thresholds.preserved_at_least) {
    return SupportClass::kPreserved;
  }
  return SupportClass::kIndeterminate;
}

AnalysisReport BuildReport(const Dataset& dataset,
                           const SubsetPartition& partition,
                           const CounterfactualResult& cf_result,
                           std::string_view outcome, std::size_t bins,
                           const SupportThresholds& thresholds) {
  if (cf_result.counterfactual.empty()) {
    throw Error(ErrorCode::kEmptySubset, "counterfactual subset is empty");
  }
  AnalysisReport report;
  report.outcome = std::string(outcome);
  report.filter = partition.filter;
  report.row_count = dataset.row_count();
  report.included_count = partition.included.size();
  report.excluded_count = partition.excluded.size();
  report.counterfactual = cf_result;
  report.naive = CompareGroups(dataset, partition.included, partition.excluded,
                               outcome, bins);
  // Same bin edges for all three subsets.
  report.cf = CompareGroups(
      dataset, partition.included, cf_result.counterfactual, outcome, bins,
      ValueRange{report.naive.histogram.bin_edges.front(),
                 report.naive.histogram.bin_edges.back()});
  report.balance = ComputeBalance(dataset, partition, cf_result.counterfactual,
                                  cf_result.config.covariates);
  if (report.naive.mean_difference != 0.0) {
    report.support_ratio =
        std::abs(report.cf.mean_difference) / std::abs(report.naive.mean_difference);
  }
  report.thresholds = thresholds;
  report.support_class =
      ClassifySupport(report.naive, report.support_ratio, thresholds);
  return report;
}

}  // namespace cofact
