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

#ifndef COFACT_REPORT_JSON_H_
#define COFACT_REPORT_JSON_H_

#include <optional>
#include <string>

#include "cofact/diagnostics.h"
#include "cofact/tabular.h"
#include "json.hpp"

namespace cofact {

inline constexpr int kReportVersion = 1;

// Non-finite numbers serialize as null.
nlohmann::json NumberOrNull(double value);

nlohmann::json GroupComparisonToJson(const GroupComparison& cmp,
                                     std::string_view group_a,
                                     std::string_view group_b);
nlohmann::json BalanceToJson(const BalanceReport& balance);
nlohmann::json PropensityModelToJson(const PropensityModel& model);
nlohmann::json FeatureSummaryToJson(const FeatureSummary& summary);

// The reproducible part of a report.
nlohmann::json DeterministicReportJson(const AnalysisReport& report);

// {"reportVersion": 1, "deterministic": {...}} plus "generatedAt" when a
// timestamp is supplied. Only "generatedAt" may differ between identical runs.
nlohmann::json ReportDocument(const AnalysisReport& report,
                              const std::optional<std::string>& generated_at);

// Serialized form shared by the HTTP API and the CLI.
std::string DumpReport(const nlohmann::json& document);

// UTC ISO-8601 timestamp of the current time.
std::string UtcTimestamp();

}  // namespace cofact

#endif  // COFACT_REPORT_JSON_H_
