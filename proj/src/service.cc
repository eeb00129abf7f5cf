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

#include "cofact/service.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "cofact/causal.h"
#include "cofact/report_json.h"
#include "httplib.h"

namespace cofact {

using nlohmann::json;

AnalysisRequest ParseAnalysisRequest(const json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "analysis request must be a JSON object");
  }
  AnalysisRequest request;
  if (!doc.contains("filter") ||
      !(doc["filter"].is_object() || doc["filter"].is_string())) {
    throw Error(ErrorCode::kParse,
                "analysis request needs \"filter\" (object or expression)");
  }
  request.filter = doc["filter"];
  if (!doc.contains("outcome") || !doc["outcome"].is_string()) {
    throw Error(ErrorCode::kParse, "analysis request needs \"outcome\"");
  }
  request.outcome = doc["outcome"].get<std::string>();
  if (doc.contains("match") && !doc["match"].is_null()) {
    request.match = MatchConfigFromJson(doc["match"]);
  }
  if (doc.contains("bins") && !doc["bins"].is_null()) {
    if (!doc["bins"].is_number_integer() || doc["bins"].get<long long>() < 1) {
      throw Error(ErrorCode::kInvalidArgument, "bins must be a positive integer");
    }
    request.bins = doc["bins"].get<std::size_t>();
  }
  return request;
}

AnalysisRun RunAnalysis(const Dataset& dataset, const AnalysisRequest& request) {
  FilterSpec filter = request.filter.is_string()
                          ? ParseFilter(request.filter.get<std::string>(), dataset)
                          : FilterFromJson(request.filter, dataset);
  const Feature& outcome = dataset.feature(request.outcome);
  if (outcome.kind != FeatureKind::kNumeric) {
    throw Error(ErrorCode::kInvalidArgument,
                "outcome '" + outcome.name + "' must be numeric");
  }
  MatchConfig config = request.match;
  config.outcome = request.outcome;
  if (config.covariates.empty()) {
    config.covariates = DefaultCovariates(dataset, filter, request.outcome);
  }
  AnalysisRun run;
  run.partition = Partition(dataset, filter);
  const CounterfactualResult cf =
      ComputeCounterfactual(dataset, run.partition, config);
  run.report = BuildReport(dataset, run.partition, cf, request.outcome,
                           request.bins);
  return run;
}

SessionStore::SessionStore(std::size_t capacity)
    : capacity_(std::max<std::size_t>(1, capacity)),
      salt_(std::random_device{}() | (std::uint64_t{std::random_device{}()} << 32)) {}

std::string SessionStore::NewId() {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "s%016llx%08llx",
                static_cast<unsigned long long>(CounterRng::Finalize(salt_ + counter_)),
                static_cast<unsigned long long>(counter_));
  ++counter_;
  return buf;
}

std::shared_ptr<Session> SessionStore::Create(Dataset dataset,
                                              std::string source) {
  auto session = std::make_shared<Session>();
  session->dataset = std::make_shared<const Dataset>(std::move(dataset));
  session->source = std::move(source);
  session->created_at = std::chrono::system_clock::now();
  std::lock_guard lock(mu_);
  session->id = NewId();
  lru_.push_front(session);
  index_[session->id] = lru_.begin();
  while (lru_.size() > capacity_) {
    index_.erase(lru_.back()->id);
    lru_.pop_back();
  }
  return session;
}

std::shared_ptr<Session> SessionStore::Get(std::string_view id) {
  std::lock_guard lock(mu_);
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return nullptr;
  lru_.splice(lru_.begin(), lru_, it->second);
  return *it->second;
}

bool SessionStore::Erase(std::string_view id) {
  std::lock_guard lock(mu_);
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return false;
  lru_.erase(it->second);
  index_.erase(it);
  return true;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
    case ErrorCode::kNotFound:
      return 400;
    case ErrorCode::kEmptySubset:
    case ErrorCode::kNumerical:
      return 422;
    case ErrorCode::kIo:
      return 500;
  }
  return 500;
}

ApiResponse ErrorResponse(int status, std::string_view code,
                          const std::string& message) {
  ApiResponse response;
  response.status = status;
  response.body = {{"error", {{"code", code}, {"message", message}}}};
  response.text = response.body.dump() + "\n";
  return response;
}

namespace {

ApiResponse FromError(const Error& e) {
  return ErrorResponse(HttpStatusFor(e.code()), ErrorCodeName(e.code()), e.what());
}

ApiResponse SessionNotFound(std::string_view id) {
  return ErrorResponse(404, "SESSION_NOT_FOUND",
                       "unknown session '" + std::string(id) + "'");
}

ApiResponse Ok(json body, int status = 200) {
  ApiResponse response;
  response.status = status;
  response.text = body.dump(2) + "\n";
  response.body = std::move(body);
  return response;
}

json FeatureCatalog(const Dataset& dataset) {
  json features = json::array();
  for (const Feature& f : dataset.features()) {
    features.push_back(FeatureSummaryToJson(SummarizeFeature(dataset, f.name)));
  }
  return features;
}

}  // namespace

ApiResponse Api::SessionCreated(const std::shared_ptr<Session>& session) {
  return Ok({{"sessionId", session->id},
             {"source", session->source},
             {"rowCount", session->dataset->row_count()},
             {"droppedRows", session->dataset->dropped_rows()},
             {"features", FeatureCatalog(*session->dataset)}},
            201);
}

ApiResponse Api::CreateSessionFromCsv(std::string_view csv,
                                      std::optional<std::string> type_hints) {
  try {
    LoadOptions options;
    if (type_hints) options.type_hints = ParseTypeHints(*type_hints);
    return SessionCreated(sessions_.Create(LoadCsvString(csv, options), "upload"));
  } catch (const Error& e) {
    return ErrorResponse(400, ErrorCodeName(e.code()), e.what());
  }
}

ApiResponse Api::CreateSessionFromJson(const json& body) {
  try {
    if (!body.is_object() || !body.contains("fixture") ||
        !body["fixture"].is_string()) {
      throw Error(ErrorCode::kParse,
                  "expected {\"fixture\": name} or a CSV upload");
    }
    const std::string name = body["fixture"].get<std::string>();
    GeneratedData data = Generate(DefaultFixture(name));
    return SessionCreated(
        sessions_.Create(std::move(data.dataset), "fixture:" + name));
  } catch (const Error& e) {
    return ErrorResponse(400, ErrorCodeName(e.code()), e.what());
  }
}

ApiResponse Api::GetFeatures(std::string_view id) {
  auto session = sessions_.Get(id);
  if (!session) return SessionNotFound(id);
  return Ok({{"sessionId", session->id},
             {"rowCount", session->dataset->row_count()},
             {"features", FeatureCatalog(*session->dataset)}});
}

ApiResponse Api::Analyze(std::string_view id, const json& body) {
  auto session = sessions_.Get(id);
  if (!session) return SessionNotFound(id);
  try {
    const AnalysisRequest request = ParseAnalysisRequest(body);
    std::lock_guard lock(session->mu);
    AnalysisRun run = RunAnalysis(*session->dataset, request);
    session->last_partition = run.partition;
    session->last_counterfactual = run.report.counterfactual.counterfactual;
    ApiResponse response;
    response.body = ReportDocument(run.report, UtcTimestamp());
    response.text = DumpReport(response.body);
    return response;
  } catch (const Error& e) {
    return FromError(e);
  }
}

ApiResponse Api::GetRows(std::string_view id, std::string_view subset,
                         std::size_t page, std::size_t page_size) {
  auto session = sessions_.Get(id);
  if (!session) return SessionNotFound(id);
  if (page_size == 0 || page_size > kMaxPageSize) {
    return ErrorResponse(400, "INVALID_ARGUMENT",
                         "pageSize must be in [1, " +
                             std::to_string(kMaxPageSize) + "]");
  }
  std::vector<std::size_t> rows;
  {
    std::lock_guard lock(session->mu);
    if (!session->last_partition) {
      return ErrorResponse(409, "NO_ANALYSIS",
                           "run an analysis before requesting subset rows");
    }
    if (subset == "included") {
      rows = session->last_partition->included;
    } else if (subset == "excluded") {
      rows = session->last_partition->excluded;
    } else if (subset == "counterfactual") {
      rows = session->last_counterfactual;
    } else {
      return ErrorResponse(400, "INVALID_ARGUMENT",
                           "subset must be included, excluded, or counterfactual");
    }
  }
  const Dataset& dataset = *session->dataset;
  json columns = json::array();
  for (const Feature& f : dataset.features()) columns.push_back(f.name);
  json out = json::array();
  const std::size_t begin = std::min(rows.size(), page * page_size);
  const std::size_t end = std::min(rows.size(), begin + page_size);
  for (std::size_t i = begin; i < end; ++i) {
    json values = json::array();
    for (const Feature& f : dataset.features()) {
      if (f.kind == FeatureKind::kNumeric) {
        values.push_back(dataset.numeric(f.index)[rows[i]]);
      } else {
        values.push_back(dataset.CellText(rows[i], f.index));
      }
    }
    out.push_back({{"row", rows[i]}, {"values", std::move(values)}});
  }
  return Ok({{"subset", subset},
             {"page", page},
             {"pageSize", page_size},
             {"total", rows.size()},
             {"columns", std::move(columns)},
             {"rows", std::move(out)}});
}

ApiResponse Api::DeleteSession(std::string_view id) {
  if (!sessions_.Erase(id)) return SessionNotFound(id);
  return Ok({{"deleted", std::string(id)}});
}

namespace {

void Send(httplib::Response& res, const ApiResponse& response) {
  res.status = response.status;
  res.set_content(response.text, "application/json");
}

std::optional<std::size_t> ParseIndexParam(const httplib::Request& req,
                                           const std::string& key,
                                           std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  auto value = ParseFiniteNumber(req.get_param_value(key));
  if (!value || *value < 0 || *value != std::floor(*value)) return std::nullopt;
  return static_cast<std::size_t>(*value);
}

}  // namespace

void RegisterRoutes(httplib::Server& server, Api& api) {
  server.Post("/sessions", [&api](const httplib::Request& req,
                                  httplib::Response& res) {
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) {
        Send(res, ErrorResponse(400, "PARSE_ERROR",
                                "multipart upload needs a \"file\" part"));
        return;
      }
      std::optional<std::string> hints;
      if (req.has_file("typeHints")) hints = req.get_file_value("typeHints").content;
      Send(res, api.CreateSessionFromCsv(req.get_file_value("file").content, hints));
      return;
    }
    const std::string type = req.get_header_value("Content-Type");
    if (type.rfind("application/json", 0) == 0) {
      json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded()) {
        Send(res, ErrorResponse(400, "PARSE_ERROR", "request body is not JSON"));
        return;
      }
      Send(res, api.CreateSessionFromJson(body));
      return;
    }
    Send(res, api.CreateSessionFromCsv(req.body));
  });

  server.Get(R"(/sessions/([^/]+)/features)",
             [&api](const httplib::Request& req, httplib::Response& res) {
               Send(res, api.GetFeatures(req.matches[1].str()));
             });

  server.Post(R"(/sessions/([^/]+)/analysis)",
              [&api](const httplib::Request& req, httplib::Response& res) {
                json body = json::parse(req.body, nullptr, false);
                if (body.is_discarded()) {
                  Send(res, ErrorResponse(400, "PARSE_ERROR",
                                          "request body is not JSON"));
                  return;
                }
                Send(res, api.Analyze(req.matches[1].str(), body));
              });

  server.Get(R"(/sessions/([^/]+)/rows)",
             [&api](const httplib::Request& req, httplib::Response& res) {
               auto page = ParseIndexParam(req, "page", 0);
               auto size = ParseIndexParam(req, "pageSize", kDefaultPageSize);
               if (!page || !size) {
                 Send(res, ErrorResponse(400, "INVALID_ARGUMENT",
                                         "page and pageSize must be integers"));
                 return;
               }
               Send(res, api.GetRows(req.matches[1].str(),
                                     req.get_param_value("subset"), *page, *size));
             });

  server.Delete(R"(/sessions/([^/]+))",
                [&api](const httplib::Request& req, httplib::Response& res) {
                  Send(res, api.DeleteSession(req.matches[1].str()));
                });
}

bool Serve(const std::string& host, int port, std::size_t session_cap) {
  Api api(session_cap);
  httplib::Server server;
  RegisterRoutes(server, api);
  return server.listen(host, port);
}

}  // namespace cofact
