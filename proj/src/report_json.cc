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

#include "cofact/report_json.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>

namespace cofact {

using nlohmann::json;

json NumberOrNull(double value) {
  return std::isfinite(value) ? json(value) : json(nullptr);
}

json GroupComparisonToJson(const GroupComparison& cmp, std::string_view group_a,
                           std::string_view group_b) {
  json edges = json::array();
  for (double e : cmp.histogram.bin_edges) edges.push_back(e);
  return json{
      {"outcome", cmp.outcome},
      {"groupA", group_a},
      {"groupB", group_b},
      {"sizeA", cmp.size_a},
      {"sizeB", cmp.size_b},
      {"groupAMean", cmp.group_a_mean},
      {"groupBMean", cmp.group_b_mean},
      {"meanDifference", cmp.mean_difference},
      {"cohensD", NumberOrNull(cmp.cohens_d)},
      {"cohensDInfinite", std::isinf(cmp.cohens_d)},
      {"ksStatistic", cmp.ks_statistic},
      {"histogram",
       {{"binEdges", std::move(edges)},
        {"countsA", cmp.histogram.counts_a},
        {"countsB", cmp.histogram.counts_b}}},
  };
}

json BalanceToJson(const BalanceReport& balance) {
  json covariates = json::array();
  for (const CovariateBalance& c : balance.covariates) {
    covariates.push_back({{"name", c.name},
                          {"smdNaive", NumberOrNull(c.smd_naive)},
                          {"smdCounterfactual", NumberOrNull(c.smd_counterfactual)},
                          {"smdNaiveInfinite", std::isinf(c.smd_naive)},
                          {"smdCounterfactualInfinite",
                           std::isinf(c.smd_counterfactual)}});
  }
  return json{{"covariates", std::move(covariates)},
              {"maxSmdNaive", NumberOrNull(balance.max_smd_naive)},
              {"maxSmdCounterfactual", NumberOrNull(balance.max_smd_cf)},
              {"hasInfinite", balance.has_infinite}};
}

json PropensityModelToJson(const PropensityModel& model) {
  return json{{"weights", model.weights},
              {"intercept", model.intercept},
              {"lambda", model.lambda},
              {"converged", model.converged},
              {"iterations", model.iterations},
              {"gradientNorm", model.gradient_norm},
              {"diagnostic", model.diagnostic}};
}

json FeatureSummaryToJson(const FeatureSummary& summary) {
  json doc{{"name", summary.feature.name},
           {"kind", FeatureKindName(summary.feature.kind)},
           {"count", summary.count}};
  if (summary.feature.kind == FeatureKind::kNumeric) {
    doc["min"] = summary.min;
    doc["max"] = summary.max;
    doc["mean"] = summary.mean;
    doc["sd"] = summary.sd;
  } else {
    json counts = json::object();
    for (const auto& [label, n] : summary.category_counts) counts[label] = n;
    doc["categoryCounts"] = std::move(counts);
  }
  return doc;
}

json DeterministicReportJson(const AnalysisReport& report) {
  const CounterfactualResult& cf = report.counterfactual;
  json cf_summary{
      {"method", MatchMethodName(cf.config.method)},
      {"indexPolicyUsed", IndexPolicyName(cf.index_used)},
      {"encodedWidth", cf.encoded_width},
      {"size", cf.counterfactual.size()},
  };
  // Scores of the selected rows.
  double score_max = 0.0;
  double score_sum = 0.0;
  for (std::size_t i = 0; i < cf.scored_rows.size(); ++i) {
    if (std::binary_search(cf.counterfactual.begin(), cf.counterfactual.end(),
                           cf.scored_rows[i])) {
      score_max = std::max(score_max, cf.scores[i]);
      score_sum += cf.scores[i];
    }
  }
  cf_summary["selectedScoreMax"] = NumberOrNull(score_max);
  cf_summary["selectedScoreMean"] = NumberOrNull(
      score_sum / static_cast<double>(std::max<std::size_t>(1, cf.counterfactual.size())));
  if (cf.propensity_model) {
    cf_summary["propensityModel"] = PropensityModelToJson(*cf.propensity_model);
  }
  if (cf.covariance) {
    cf_summary["covariance"] = {{"dimension", cf.covariance->matrix.rows()},
                                {"ridge", cf.covariance->ridge}};
  }

  return json{
      {"outcome", report.outcome},
      {"filter", FilterToJson(report.filter)},
      {"match", MatchConfigToJson(cf.config)},
      {"partition",
       {{"rowCount", report.row_count},
        {"included", report.included_count},
        {"excluded", report.excluded_count},
        {"counterfactual", cf.counterfactual.size()}}},
      {"counterfactualSummary", std::move(cf_summary)},
      {"naive", GroupComparisonToJson(report.naive, "included", "excluded")},
      {"counterfactual",
       GroupComparisonToJson(report.cf, "included", "counterfactual")},
      {"balance", BalanceToJson(report.balance)},
      {"supportRatio", report.support_ratio ? NumberOrNull(*report.support_ratio)
                                            : json(nullptr)},
      {"supportClass", SupportClassName(report.support_class)},
      {"thresholds",
       {{"weakenedBelow", report.thresholds.weakened_below},
        {"preservedAtLeast", report.thresholds.preserved_at_least},
        {"negligibleGapSd", report.thresholds.negligible_gap_sd},
        {"note",
         "heuristic cutoffs on |counterfactual gap| / |naive gap|; not a "
         "statistical test"}}},
  };
}

json ReportDocument(const AnalysisReport& report,
                    const std::optional<std::string>& generated_at) {
  json doc{{"reportVersion", kReportVersion},
           {"deterministic", DeterministicReportJson(report)}};
  if (generated_at) doc["generatedAt"] = *generated_at;
  return doc;
}

std::string DumpReport(const json& document) { return document.dump(2) + "\n"; }

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace cofact
