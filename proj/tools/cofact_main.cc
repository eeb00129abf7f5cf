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

// cofact command line: batch analysis, fixture generation, and the HTTP
// server.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "cofact/causal.h"
#include "cofact/error.h"
#include "cofact/report_json.h"
#include "cofact/service.h"
#include "cofact/tabular.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cofact::Error(cofact::ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteOutput(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cofact::Error(cofact::ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) throw cofact::Error(cofact::ErrorCode::kIo, "write to '" + path + "' failed");
}

json ParseJsonFile(const std::string& path) {
  json doc = json::parse(ReadFile(path), nullptr, false);
  if (doc.is_discarded()) {
    throw cofact::Error(cofact::ErrorCode::kParse, "'" + path + "' is not valid JSON");
  }
  return doc;
}

struct AnalyzeArgs {
  std::string data;
  std::string filter;
  std::string outcome;
  std::string match_path;
  std::string type_hints_path;
  std::string output;
  std::string method;
  std::string index_policy;
  std::vector<std::string> covariates;
  std::size_t cf_size = 0;
  std::size_t bins = 0;
  bool drop_missing = false;
  bool no_timestamp = false;
};

int RunAnalyze(const AnalyzeArgs& args) {
  cofact::LoadOptions options;
  if (!args.type_hints_path.empty()) {
    options.type_hints = cofact::ParseTypeHints(ReadFile(args.type_hints_path));
  }
  if (args.drop_missing) options.missing = cofact::MissingPolicy::kDropRows;
  const cofact::Dataset dataset = cofact::LoadCsvFile(args.data, options);
  if (dataset.dropped_rows() > 0) {
    std::cerr << "dropped " << dataset.dropped_rows()
              << " rows with missing values\n";
  }

  json match = args.match_path.empty() ? json::object()
                                       : ParseJsonFile(args.match_path);
  if (!args.method.empty()) match["method"] = args.method;
  if (!args.index_policy.empty()) match["indexPolicy"] = args.index_policy;
  if (!args.covariates.empty()) match["covariates"] = args.covariates;
  if (args.cf_size > 0) match["cfSize"] = args.cf_size;

  json request{{"filter", args.filter}, {"outcome", args.outcome}, {"match", match}};
  if (args.bins > 0) request["bins"] = args.bins;

  const cofact::AnalysisRun run =
      cofact::RunAnalysis(dataset, cofact::ParseAnalysisRequest(request));
  std::optional<std::string> stamp;
  if (!args.no_timestamp) stamp = cofact::UtcTimestamp();
  WriteOutput(args.output,
              cofact::DumpReport(cofact::ReportDocument(run.report, stamp)));
  if (!args.output.empty() && args.output != "-") {
    std::cerr << "support: " << cofact::SupportClassName(run.report.support_class)
              << "\n";
  }
  return 0;
}

int RunGenerate(const std::string& name, const std::string& spec_path,
                const std::string& output, const std::string& truth_path) {
  const cofact::ScmSpec spec =
      spec_path.empty() ? cofact::DefaultFixture(name)
                        : cofact::ScmSpecFromJson(ParseJsonFile(spec_path));
  const cofact::GeneratedData data = cofact::Generate(spec);
  WriteOutput(output, cofact::WriteCsvString(data.dataset));
  if (!truth_path.empty()) {
    json truth{{"treatment", data.truth.treatment},
               {"outcome", data.truth.outcome},
               {"directEffect", data.truth.direct_effect},
               {"spec", cofact::ScmSpecToJson(spec)}};
    WriteOutput(truth_path, truth.dump(2) + "\n");
  }
  return 0;
}

std::size_t EnvSize(const char* name, std::size_t fallback) {
  const char* value = std::getenv(name);
  if (!value || !*value) return fallback;
  auto parsed = cofact::ParseFiniteNumber(value);
  if (!parsed || *parsed < 1) {
    throw cofact::Error(cofact::ErrorCode::kInvalidArgument,
                        std::string(name) + " must be a positive integer");
  }
  return static_cast<std::size_t>(*parsed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual subset analysis for tabular data"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand(
      "analyze", "Partition by a filter, match a counterfactual subset, report");
  analyze_cmd->add_option("--data", analyze.data, "CSV dataset")->required();
  analyze_cmd->add_option("--filter", analyze.filter, "Inclusion filter expression")
      ->required();
  analyze_cmd->add_option("--outcome", analyze.outcome, "Numeric outcome feature")
      ->required();
  analyze_cmd->add_option("--match", analyze.match_path, "MatchConfig JSON file");
  analyze_cmd->add_option("--method", analyze.method,
                          "euclidean_nn | mahalanobis | propensity");
  analyze_cmd->add_option("--index-policy", analyze.index_policy,
                          "auto | brute_force | spatial_index");
  analyze_cmd->add_option("--covariates", analyze.covariates, "Covariate names")
      ->delimiter(',');
  analyze_cmd->add_option("--cf-size", analyze.cf_size, "Counterfactual size");
  analyze_cmd->add_option("--bins", analyze.bins, "Histogram bins");
  analyze_cmd->add_option("--type-hints", analyze.type_hints_path,
                          "JSON {feature: numeric|categorical}");
  analyze_cmd->add_flag("--drop-missing", analyze.drop_missing,
                        "Drop rows with missing cells instead of failing");
  analyze_cmd->add_flag("--no-timestamp", analyze.no_timestamp,
                        "Omit generatedAt from the report");
  analyze_cmd->add_option("-o,--output", analyze.output, "Report path (default stdout)");

  std::string fixture_name;
  std::string spec_path;
  std::string fixture_output;
  std::string truth_path;
  auto* generate_cmd = app.add_subcommand(
      "generate-fixture", "Sample a dataset from a structural causal model");
  auto* name_opt = generate_cmd->add_option("--name", fixture_name, "Built-in fixture");
  auto* spec_opt = generate_cmd->add_option("--spec", spec_path, "ScmSpec JSON file");
  name_opt->excludes(spec_opt);
  generate_cmd->add_option("-o,--output", fixture_output, "CSV path (default stdout)");
  generate_cmd->add_option("--truth", truth_path, "Ground-truth JSON path");

  std::string host = "0.0.0.0";
  int port = 0;
  std::size_t session_cap = 0;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP JSON API");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (default $COFACT_PORT or 8080)");
  serve_cmd->add_option("--session-cap", session_cap,
                        "Max sessions (default $COFACT_SESSION_CAP or 32)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*analyze_cmd) return RunAnalyze(analyze);
    if (*generate_cmd) {
      if (fixture_name.empty() && spec_path.empty()) {
        std::cerr << "generate-fixture: pass --name or --spec\n";
        return kExitValidation;
      }
      return RunGenerate(fixture_name, spec_path, fixture_output, truth_path);
    }
    if (*serve_cmd) {
      if (port == 0) port = static_cast<int>(EnvSize("COFACT_PORT", 8080));
      if (session_cap == 0) session_cap = EnvSize("COFACT_SESSION_CAP", 32);
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!cofact::Serve(host, port, session_cap)) {
        std::cerr << "cannot listen on " << host << ":" << port << "\n";
        return kExitIo;
      }
      return 0;
    }
  } catch (const cofact::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == cofact::ErrorCode::kIo ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
