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

#include "cofact/matching.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "cofact/error.h"

namespace cofact {
namespace {

using nlohmann::json;

void CheckDims(std::span<const double> point, const PointSet& set) {
  if (set.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "point-to-set distance needs a nonempty set");
  }
  if (point.size() != set.dim) {
    throw Error(ErrorCode::kInvalidArgument,
                "dimension mismatch: point has " + std::to_string(point.size()) +
                    ", set has " + std::to_string(set.dim));
  }
}

void ValidateConfig(const Dataset& dataset, const SubsetPartition& partition,
                    const MatchConfig& config) {
  if (config.covariates.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "covariate list is empty");
  }
  const auto filter_features = partition.filter.Features();
  std::unordered_set<std::string> seen;
  for (const std::string& name : config.covariates) {
    dataset.feature(name);
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "covariate '" + name + "' listed twice");
    }
    if (std::find(filter_features.begin(), filter_features.end(), name) !=
        filter_features.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "covariate '" + name +
                      "' is a filter feature; the counterfactual must differ "
                      "on it");
    }
    if (config.outcome && name == *config.outcome &&
        !config.allow_outcome_covariate) {
      throw Error(ErrorCode::kInvalidArgument,
                  "covariate '" + name +
                      "' is the outcome; set allowOutcomeCovariate to match on "
                      "it");
    }
  }
}

// Nearest-neighbor distance from every query to `reference`, through either
// a kd-tree or a linear scan.
std::vector<double> NearestDistances(const PointSet& queries,
                                     const PointSet& reference,
                                     IndexPolicy policy) {
  std::vector<double> out(queries.size());
  if (policy == IndexPolicy::kSpatialIndex) {
    const KdTree tree(reference);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      out[i] = tree.Nearest(queries.row(i)).distance;
    }
  } else {
    for (std::size_t i = 0; i < queries.size(); ++i) {
      out[i] = LinearScanNearest(reference, queries.row(i)).distance;
    }
  }
  return out;
}

}  // namespace

std::string_view MatchMethodName(MatchMethod method) {
  switch (method) {
    case MatchMethod::kEuclideanNn:
      return "euclidean_nn";
    case MatchMethod::kMahalanobis:
      return "mahalanobis";
    case MatchMethod::kPropensity:
      return "propensity";
  }
  return "";
}

MatchMethod ParseMatchMethod(std::string_view name) {
  if (name == "euclidean_nn") return MatchMethod::kEuclideanNn;
  if (name == "mahalanobis") return MatchMethod::kMahalanobis;
  if (name == "propensity") return MatchMethod::kPropensity;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown match method '" + std::string(name) + "'");
}

std::string_view IndexPolicyName(IndexPolicy policy) {
  switch (policy) {
    case IndexPolicy::kAuto:
      return "auto";
    case IndexPolicy::kBruteForce:
      return "brute_force";
    case IndexPolicy::kSpatialIndex:
      return "spatial_index";
  }
  return "";
}

IndexPolicy ParseIndexPolicy(std::string_view name) {
  if (name == "auto") return IndexPolicy::kAuto;
  if (name == "brute_force") return IndexPolicy::kBruteForce;
  if (name == "spatial_index") return IndexPolicy::kSpatialIndex;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown index policy '" + std::string(name) + "'");
}

json MatchConfigToJson(const MatchConfig& config) {
  json doc;
  doc["method"] = MatchMethodName(config.method);
  doc["covariates"] = config.covariates;
  doc["cfSize"] = config.cf_size ? json(*config.cf_size) : json(nullptr);
  doc["indexPolicy"] = IndexPolicyName(config.index_policy);
  doc["scaling"] =
      config.scaling == Scaling::kStandardize ? "standardized" : "raw";
  doc["allowOutcomeCovariate"] = config.allow_outcome_covariate;
  if (config.method == MatchMethod::kPropensity) {
    doc["lambda"] = config.propensity.lambda;
    doc["maxIter"] = config.propensity.max_iter;
    doc["tol"] = config.propensity.tol;
  }
  return doc;
}

MatchConfig MatchConfigFromJson(const json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "match config must be a JSON object");
  }
  MatchConfig config;
  try {
    if (doc.contains("method")) {
      config.method = ParseMatchMethod(doc["method"].get<std::string>());
    }
    if (doc.contains("covariates") && !doc["covariates"].is_null()) {
      config.covariates = doc["covariates"].get<std::vector<std::string>>();
    }
    if (doc.contains("cfSize") && !doc["cfSize"].is_null()) {
      const auto& k = doc["cfSize"];
      if (!k.is_number_integer() || k.get<long long>() < 1) {
        throw Error(ErrorCode::kInvalidArgument,
                    "cfSize must be a positive integer");
      }
      config.cf_size = k.get<std::size_t>();
    }
    if (doc.contains("indexPolicy")) {
      config.index_policy =
          ParseIndexPolicy(doc["indexPolicy"].get<std::string>());
    }
    if (doc.contains("scaling")) {
      const auto scaling = doc["scaling"].get<std::string>();
      if (scaling == "standardized") {
        config.scaling = Scaling::kStandardize;
      } else if (scaling == "raw") {
        config.scaling = Scaling::kRaw;
      } else {
        throw Error(ErrorCode::kInvalidArgument,
                    "scaling must be \"standardized\" or \"raw\"");
      }
    }
    config.allow_outcome_covariate = doc.value("allowOutcomeCovariate", false);
    config.propensity.lambda = doc.value("lambda", config.propensity.lambda);
    config.propensity.max_iter = doc.value("maxIter", config.propensity.max_iter);
    config.propensity.tol = doc.value("tol", config.propensity.tol);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("match config: ") + e.what());
  }
  return config;
}

std::vector<std::string> DefaultCovariates(const Dataset& dataset,
                                           const FilterSpec& filter,
                                           std::string_view outcome) {
  const auto filter_features = filter.Features();
  std::vector<std::string> names;
  for (const Feature& f : dataset.features()) {
    if (f.name == outcome) continue;
    if (std::find(filter_features.begin(), filter_features.end(), f.name) !=
        filter_features.end()) {
      continue;
    }
    names.push_back(f.name);
  }
  return names;
}

IndexPolicy ResolveIndexPolicy(IndexPolicy policy, std::size_t dim,
                               std::size_t included_count) {
  if (policy != IndexPolicy::kAuto) return policy;
  return dim <= kAutoIndexMaxDim && included_count >= kAutoIndexMinPoints
             ? IndexPolicy::kSpatialIndex
             : IndexPolicy::kBruteForce;
}

CovarianceRecord CovarianceFromMatrix(const Eigen::MatrixXd& matrix,
                                      double ridge) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "covariance must be a nonempty square matrix");
  }
  CovarianceRecord cov;
  cov.matrix = 0.5 * (matrix + matrix.transpose());
  cov.ridge = ridge;
  Eigen::MatrixXd ridged = cov.matrix;
  ridged.diagonal().array() += ridge;
  const auto d = ridged.rows();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(ridged);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw Error(ErrorCode::kNumerical,
                "covariance is not positive definite; increase the ridge");
  }
  Eigen::MatrixXd inverse = ldlt.solve(Eigen::MatrixXd::Identity(d, d));
  cov.inverse = 0.5 * (inverse + inverse.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(cov.inverse);
  if (!cov.inverse.allFinite() || llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumerical,
                "covariance inverse is ill-conditioned; increase the ridge");
  }
  cov.whitening = llt.matrixL().transpose();
  return cov;
}

CovarianceRecord FitCovariance(const PointSet& points,
                               std::optional<double> ridge) {
  const auto n = static_cast<Eigen::Index>(points.size());
  const auto d = static_cast<Eigen::Index>(points.dim);
  if (n < 2 || d == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "covariance needs at least two rows and one dimension");
  }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      x(points.data.data(), n, d);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd sample =
      centered.transpose() * centered / static_cast<double>(n - 1);
  double eps = 0.0;
  if (ridge) {
    eps = *ridge;
  } else {
    const double trace = sample.trace();
    eps = trace > 0.0 ? 1e-6 * trace / static_cast<double>(d) : 1e-6;
  }
  return CovarianceFromMatrix(sample, eps);
}

double MahalanobisDistance(std::span<const double> x, std::span<const double> y,
                           const CovarianceRecord& cov) {
  const auto d = cov.inverse.rows();
  if (static_cast<Eigen::Index>(x.size()) != d ||
      static_cast<Eigen::Index>(y.size()) != d) {
    throw Error(ErrorCode::kInvalidArgument,
                "dimension mismatch with covariance");
  }
  Eigen::VectorXd diff(d);
  for (Eigen::Index i = 0; i < d; ++i) diff(i) = x[i] - y[i];
  const double q = diff.dot(cov.inverse * diff);
  if (!std::isfinite(q)) {
    throw Error(ErrorCode::kNumerical,
                "non-finite Mahalanobis distance; increase the ridge");
  }
  return std::sqrt(std::max(q, 0.0));
}

double PointToSetDistance(std::span<const double> point, const PointSet& set) {
  CheckDims(point, set);
  return LinearScanNearest(set, point).distance;
}

double PointToSetDistance(std::span<const double> point, const PointSet& set,
                          const CovarianceRecord& cov) {
  CheckDims(point, set);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < set.size(); ++i) {
    best = std::min(best, MahalanobisDistance(point, set.row(i), cov));
  }
  return best;
}

KdTree BuildNnIndex(PointSet points) { return KdTree(std::move(points)); }

PointSet Whiten(const PointSet& points, const CovarianceRecord& cov) {
  const auto d = static_cast<Eigen::Index>(points.dim);
  PointSet out;
  out.dim = points.dim;
  out.data.resize(points.data.size());
  Eigen::VectorXd v(d);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto row = points.row(i);
    for (Eigen::Index j = 0; j < d; ++j) v(j) = row[j];
    const Eigen::VectorXd w = cov.whitening * v;
    std::copy(w.data(), w.data() + d, out.data.begin() + i * points.dim);
  }
  return out;
}

std::vector<std::size_t> SelectLowest(std::span<const std::size_t> rows,
                                      std::span<const double> scores,
                                      std::size_t k) {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  k = std::min(k, order.size());
  const auto before = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return rows[a] < rows[b];
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), before);
  std::vector<std::size_t> selected;
  selected.reserve(k);
  for (std::size_t i = 0; i < k; ++i) selected.push_back(rows[order[i]]);
  std::sort(selected.begin(), selected.end());
  return selected;
}

CounterfactualResult ComputeCounterfactual(const Dataset& dataset,
                                           const SubsetPartition& partition,
                                           const MatchConfig& config) {
  if (partition.included.empty() || partition.excluded.empty()) {
    throw Error(ErrorCode::kEmptySubset,
                "counterfactual undefined without both subsets (included: " +
                    std::to_string(partition.included.size()) +
                    ", excluded: " + std::to_string(partition.excluded.size()) +
                    ")");
  }
  ValidateConfig(dataset, partition, config);

  CounterfactualResult result;
  result.config = config;
  const std::size_t k = config.cf_size.value_or(
      std::min(partition.included.size(), partition.excluded.size()));
  if (k < 1 || k > partition.excluded.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "cfSize " + std::to_string(k) + " outside [1, " +
                    std::to_string(partition.excluded.size()) + "]");
  }
  result.config.cf_size = k;

  const auto view =
      StandardizedView::Fit(dataset, config.covariates, config.scaling);
  result.encoded_width = view.encoded_width();
  result.scored_rows = partition.excluded;

  switch (config.method) {
    case MatchMethod::kEuclideanNn:
    case MatchMethod::kMahalanobis: {
      PointSet included = view.Encode(dataset, partition.included);
      PointSet excluded = view.Encode(dataset, partition.excluded);
      if (config.method == MatchMethod::kMahalanobis) {
        // Covariance over the full dataset; both index policies then search
        // in whitened coordinates so their results agree exactly.
        result.covariance = FitCovariance(view.EncodeAll(dataset));
        included = Whiten(included, *result.covariance);
        excluded = Whiten(excluded, *result.covariance);
      }
      result.index_used =
          ResolveIndexPolicy(config.index_policy, included.dim, included.size());
      result.scores = NearestDistances(excluded, included, result.index_used);
      break;
    }
    case MatchMethod::kPropensity: {
      PropensityModel model = FitPropensity(dataset, partition, config.covariates,
                                            config.propensity);
      const auto score_rows = [&](std::span<const std::size_t> rows) {
        std::vector<double> out;
        out.reserve(rows.size());
        std::vector<double> x(view.encoded_width());
        for (std::size_t row : rows) {
          view.EncodeRow(dataset, row, x);
          out.push_back(model.Score(x));
        }
        return out;
      };
      std::vector<double> included = score_rows(partition.included);
      const std::vector<double> excluded = score_rows(partition.excluded);
      std::sort(included.begin(), included.end());
      // Nearest included propensity by binary search.
      result.scores.reserve(excluded.size());
      for (double p : excluded) {
        auto it = std::lower_bound(included.begin(), included.end(), p);
        double gap = std::numeric_limits<double>::infinity();
        if (it != included.end()) gap = *it - p;
        if (it != included.begin()) gap = std::min(gap, p - *std::prev(it));
        result.scores.push_back(gap);
      }
      result.index_used = IndexPolicy::kBruteForce;
      result.propensity_model = std::move(model);
      break;
    }
  }

  result.counterfactual = SelectLowest(result.scored_rows, result.scores, k);
  return result;
}

}  // namespace cofact
