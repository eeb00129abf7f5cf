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

// Analysis pipeline entry point shared by the HTTP API and the CLI, plus the
// in-memory session store and HTTP routes.

#ifndef COFACT_SERVICE_H_
#define COFACT_SERVICE_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cofact/diagnostics.h"
#include "cofact/error.h"
#include "cofact/filtering.h"
#include "cofact/matching.h"
#include "cofact/tabular.h"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace cofact {

// Wire form: {"filter": FilterSpec JSON or expression string,
//             "match": MatchConfig JSON (optional),
//             "outcome": name, "bins": count (optional)}.
// Missing covariates default to every non-filter, non-outcome feature.
struct AnalysisRequest {
  nlohmann::json filter;
  MatchConfig match;
  std::string outcome;
  std::size_t bins = kDefaultBins;
};

AnalysisRequest ParseAnalysisRequest(const nlohmann::json& doc);

struct AnalysisRun {
  SubsetPartition partition;
  AnalysisReport report;
};

// partition -> compute_counterfactual -> build_report.
AnalysisRun RunAnalysis(const Dataset& dataset, const AnalysisRequest& request);

struct Session {
  std::string id;
  std::shared_ptr<const Dataset> dataset;
  std::string source;
  std::chrono::system_clock::time_point created_at;

  // Guards the cached last analysis; run_analysis on one session serializes.
  std::mutex mu;
  std::optional<SubsetPartition> last_partition;
  std::vector<std::size_t> last_counterfactual;
};

// In-memory sessions with least-recently-used eviction.
class SessionStore {
 public:
  explicit SessionStore(std::size_t capacity = 32);

  std::shared_ptr<Session> Create(Dataset dataset, std::string source);
  std::shared_ptr<Session> Get(std::string_view id);  // nullptr if unknown.
  bool Erase(std::string_view id);
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

 private:
  std::string NewId();

  mutable std::mutex mu_;
  std::size_t capacity_;
  std::uint64_t counter_ = 0;
  std::uint64_t salt_;
  std::list<std::shared_ptr<Session>> lru_;  // Front is most recent.
  std::unordered_map<std::string, std::list<std::shared_ptr<Session>>::iterator>
      index_;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
  std::string text;  // Serialized body.
};

// Transport-independent implementation of the HTTP endpoints.
class Api {
 public:
  explicit Api(std::size_t session_cap = 32) : sessions_(session_cap) {}

  // POST /sessions with CSV bytes (optional type-hint JSON).
  ApiResponse CreateSessionFromCsv(std::string_view csv,
                                   std::optional<std::string> type_hints = {});
  // POST /sessions with {"fixture": name}.
  ApiResponse CreateSessionFromJson(const nlohmann::json& body);
  // GET /sessions/{id}/features
  ApiResponse GetFeatures(std::string_view id);
  // POST /sessions/{id}/analysis
  ApiResponse Analyze(std::string_view id, const nlohmann::json& body);
  // GET /sessions/{id}/rows?subset=...&page=...&pageSize=...
  ApiResponse GetRows(std::string_view id, std::string_view subset,
                      std::size_t page, std::size_t page_size);
  // DELETE /sessions/{id}
  ApiResponse DeleteSession(std::string_view id);

  SessionStore& sessions() { return sessions_; }

 private:
  ApiResponse SessionCreated(const std::shared_ptr<Session>& session);

  SessionStore sessions_;
};

inline constexpr std::size_t kDefaultPageSize = 100;
inline constexpr std::size_t kMaxPageSize = 1000;

ApiResponse ErrorResponse(int status, std::string_view code,
                          const std::string& message);
int HttpStatusFor(ErrorCode code);

void RegisterRoutes(httplib::Server& server, Api& api);

// Blocks serving on host:port.
bool Serve(const std::string& host, int port, std::size_t session_cap);

}  // namespace cofact

#endif  // COFACT_SERVICE_H_
