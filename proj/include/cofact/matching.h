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

// Counterfactual subset selection: every excluded row gets a similarity score
// against the included subset, and the cf_size lowest-scoring excluded rows
// (ties to the lowest row index) form the counterfactual subset.

#ifndef COFACT_MATCHING_H_
#define COFACT_MATCHING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cofact/filtering.h"
#include "cofact/kd_tree.h"
#include "cofact/propensity.h"
#include "cofact/tabular.h"
#include "json.hpp"

namespace cofact {

enum class MatchMethod { kEuclideanNn, kMahalanobis, kPropensity };
enum class IndexPolicy { kAuto, kBruteForce, kSpatialIndex };

std::string_view MatchMethodName(MatchMethod method);
MatchMethod ParseMatchMethod(std::string_view name);
std::string_view IndexPolicyName(IndexPolicy policy);
IndexPolicy ParseIndexPolicy(std::string_view name);

struct MatchConfig {
  MatchMethod method = MatchMethod::kEuclideanNn;
  std::vector<std::string> covariates;
  std::optional<std::size_t> cf_size;  // Defaults to min(|included|, |excluded|).
  IndexPolicy index_policy = IndexPolicy::kAuto;
  Scaling scaling = Scaling::kStandardize;
  // The outcome may only be a covariate when explicitly allowed.
  std::optional<std::string> outcome;
  bool allow_outcome_covariate = false;
  PropensityOptions propensity;
};

nlohmann::json MatchConfigToJson(const MatchConfig& config);
// Does not resolve defaults or validate against a dataset.
MatchConfig MatchConfigFromJson(const nlohmann::json& doc);

// Every feature that is neither referenced by `filter` nor the outcome.
std::vector<std::string> DefaultCovariates(const Dataset& dataset,
                                           const FilterSpec& filter,
                                           std::string_view outcome);

// Dimension and included-set size thresholds for IndexPolicy::kAuto.
inline constexpr std::size_t kAutoIndexMaxDim = 16;
inline constexpr std::size_t kAutoIndexMinPoints = 256;

IndexPolicy ResolveIndexPolicy(IndexPolicy policy, std::size_t dim,
                               std::size_t included_count);

struct CovarianceRecord {
  Eigen::MatrixXd matrix;   // Sample covariance before ridging.
  Eigen::MatrixXd inverse;  // (matrix + ridge * I)^-1
  double ridge = 0.0;
  // W with inverse = W^T W, so |W (x - y)| is the Mahalanobis distance.
  Eigen::MatrixXd whitening;
};

// Ridge defaults to 1e-6 * trace / d (1e-6 when the trace is zero).
CovarianceRecord FitCovariance(const PointSet& points,
                               std::optional<double> ridge = std::nullopt);
CovarianceRecord CovarianceFromMatrix(const Eigen::MatrixXd& matrix,
                                      double ridge);

// sqrt((x - y)^T inverse (x - y)). Throws kNumerical on a non-finite result.
double MahalanobisDistance(std::span<const double> x, std::span<const double> y,
                           const CovarianceRecord& cov);

// Minimum Euclidean (or Mahalanobis) distance from `point` to any member of
// `set`. Throws on an empty set or mismatched dimensions.
double PointToSetDistance(std::span<const double> point, const PointSet& set);
double PointToSetDistance(std::span<const double> point, const PointSet& set,
                          const CovarianceRecord& cov);

KdTree BuildNnIndex(PointSet points);

// Maps every point through the whitening transform of `cov`.
PointSet Whiten(const PointSet& points, const CovarianceRecord& cov);

struct CounterfactualResult {
  std::vector<std::size_t> counterfactual;  // Sorted, subset of excluded.
  std::vector<std::size_t> scored_rows;     // Equal to partition.excluded.
  std::vector<double> scores;               // Parallel to scored_rows.
  MatchConfig config;                       // cf_size resolved.
  IndexPolicy index_used = IndexPolicy::kBruteForce;
  std::size_t encoded_width = 0;
  std::optional<PropensityModel> propensity_model;
  std::optional<CovarianceRecord> covariance;
};

// Throws kEmptySubset when either subset is empty and kInvalidArgument for an
// invalid config (unknown or filter-feature covariates, bad cf_size).
CounterfactualResult ComputeCounterfactual(const Dataset& dataset,
                                           const SubsetPartition& partition,
                                           const MatchConfig& config);

// Picks the k lowest scores, ties to the lower row, and returns those rows
// sorted ascending.
std::vector<std::size_t> SelectLowest(std::span<const std::size_t> rows,
                                      std::span<const double> scores,
                                      std::size_t k);

}  // namespace cofact

#endif  // COFACT_MATCHING_H_
