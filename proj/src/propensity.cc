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

#include "cofact/propensity.h"

#include <cmath>
#include <sstream>

#include "cofact/error.h"

namespace cofact {
namespace {

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LogisticObjective::LogisticObjective(const PointSet& points,
                                     std::span<const double> labels,
                                     double lambda)
    : lambda_(lambda) {
  const auto n = static_cast<Eigen::Index>(points.size());
  const auto d = static_cast<Eigen::Index>(points.dim);
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label count mismatch");
  }
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "no training rows");
  }
  if (!(lambda >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  }
  design_.resize(n, d + 1);
  labels_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = points.row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < d; ++j) design_(i, j) = row[j];
    design_(i, d) = 1.0;
    labels_(i) = labels[i];
  }
}

double LogisticObjective::Value(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd z = design_ * theta;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += Softplus(z(i)) - labels_(i) * z(i);
  }
  const auto d = theta.size() - 1;
  return loss / static_cast<double>(z.size()) +
         0.5 * lambda_ * theta.head(d).squaredNorm();
}

Eigen::VectorXd LogisticObjective::Gradient(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd z = design_ * theta;
  Eigen::VectorXd residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    residual(i) = Sigmoid(z(i)) - labels_(i);
  }
  Eigen::VectorXd g =
      design_.transpose() * residual / static_cast<double>(z.size());
  const auto d = theta.size() - 1;
  g.head(d) += lambda_ * theta.head(d);
  return g;
}

Eigen::MatrixXd LogisticObjective::Hessian(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd z = design_ * theta;
  Eigen::VectorXd w(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double p = Sigmoid(z(i));
    w(i) = p * (1.0 - p);
  }
  Eigen::MatrixXd h = design_.transpose() * w.asDiagonal() * design_ /
                      static_cast<double>(z.size());
  const auto d = theta.size() - 1;
  h.diagonal().head(d).array() += lambda_;
  return h;
}

double PropensityModel::Score(std::span<const double> x) const {
  double z = intercept;
  for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * x[i];
  return Sigmoid(z);
}

PropensityModel FitLogistic(const PointSet& points,
                            std::span<const double> labels,
                            const PropensityOptions& options) {
  LogisticObjective objective(points, labels, options.lambda);
  const auto p = static_cast<Eigen::Index>(objective.parameter_count());
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  if (!options.initial.empty()) {
    if (options.initial.size() != static_cast<std::size_t>(p)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "initial parameter vector has the wrong length");
    }
    for (Eigen::Index i = 0; i < p; ++i) theta(i) = options.initial[i];
  }

  PropensityModel model;
  model.lambda = options.lambda;
  double value = objective.Value(theta);
  Eigen::VectorXd grad = objective.Gradient(theta);
  bool stalled = false;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < options.tol) break;
    Eigen::MatrixXd hessian = objective.Hessian(theta);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    Eigen::VectorXd step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() ||
        grad.dot(step) >= 0.0) {
      // Singular Hessian (lambda = 0 with a degenerate column): add a small
      // ridge for this step only.
      hessian.diagonal().array() += 1e-8 + 1e-8 * hessian.diagonal().maxCoeff();
      step = hessian.ldlt().solve(-grad);
    }
    // Step halving until the Armijo condition holds.
    double t = 1.0;
    const double slope = grad.dot(step);
    Eigen::VectorXd candidate;
    double candidate_value = value;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
      candidate = theta + t * step;
      candidate_value = objective.Value(candidate);
      if (candidate_value <= value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      stalled = true;
      break;
    }
    theta = candidate;
    value = candidate_value;
    grad = objective.Gradient(theta);
  }

  model.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  model.converged = model.gradient_norm < options.tol;
  // Without a penalty, a hyperplane that strictly separates the classes means
  // the loss keeps falling along theta: a small gradient is not an optimum.
  bool separated = false;
  if (options.lambda == 0.0) {
    separated = true;
    for (std::size_t i = 0; i < points.size() && separated; ++i) {
      double z = theta(p - 1);
      for (std::size_t j = 0; j < points.dim; ++j) z += theta(j) * points.row(i)[j];
      separated = labels[i] > 0.5 ? z > 0.0 : z < 0.0;
    }
    if (separated) model.converged = false;
  }
  model.iterations = iter;
  model.weights.assign(theta.data(), theta.data() + p - 1);
  model.intercept = theta(p - 1);
  if (!model.converged) {
    std::ostringstream msg;
    if (separated) {
      msg << "classes are separable; no finite unpenalized optimum (stopped "
          << "after " << iter << " iterations), increase lambda";
    } else {
      msg << (stalled ? "line search stalled" : "max_iter exhausted")
          << " after " << iter << " iterations with gradient max-norm "
          << model.gradient_norm;
    }
    if (options.lambda == 0.0 && !separated) {
      msg << "; the classes may be separable, increase lambda";
    }
    model.diagnostic = msg.str();
  }
  return model;
}

PropensityModel FitPropensity(const Dataset& dataset,
                              const SubsetPartition& partition,
                              std::span<const std::string> covariates,
                              const PropensityOptions& options) {
  if (partition.included.empty() || partition.excluded.empty()) {
    throw Error(ErrorCode::kEmptySubset,
                "propensity model needs both included and excluded rows");
  }
  const auto view = StandardizedView::Fit(dataset, covariates);
  const PointSet points = view.EncodeAll(dataset);
  std::vector<double> labels(dataset.row_count(), 0.0);
  for (std::size_t row : partition.included) labels[row] = 1.0;
  return FitLogistic(points, labels, options);
}

}  // namespace cofact
