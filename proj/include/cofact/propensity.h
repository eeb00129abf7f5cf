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

// L2-penalized logistic regression for propensity scores, fit by damped
// Newton iterations.
//
// Minimized objective over parameters theta = (w, b):
//   f(w, b) = (1/N) * sum_i [log(1 + exp(z_i)) - y_i * z_i] + (lambda/2) |w|^2
// with z_i = w.x_i + b. The intercept is not penalized. For lambda > 0 the
// Hessian is positive definite, so f has a unique minimizer.

#ifndef COFACT_PROPENSITY_H_
#define COFACT_PROPENSITY_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cofact/filtering.h"
#include "cofact/tabular.h"

namespace cofact {

double Sigmoid(double z);

class LogisticObjective {
 public:
  // `points` rows are covariate vectors; `labels` are 0 or 1.
  LogisticObjective(const PointSet& points, std::span<const double> labels,
                    double lambda);

  std::size_t parameter_count() const { return design_.cols(); }

  // theta = (w_1..w_d, b).
  double Value(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd Gradient(const Eigen::VectorXd& theta) const;
  Eigen::MatrixXd Hessian(const Eigen::VectorXd& theta) const;

 private:
  Eigen::MatrixXd design_;  // N x (d + 1); the last column is all ones.
  Eigen::VectorXd labels_;
  double lambda_;
};

struct PropensityOptions {
  double lambda = 1e-3;
  int max_iter = 100;
  double tol = 1e-8;  // Gradient max-norm.
  // Starting point (d weights followed by the intercept); zeros when empty.
  std::vector<double> initial;
};

struct PropensityModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::string diagnostic;

  // sigma(w.x + b), strictly inside (0, 1) for finite x.
  double Score(std::span<const double> x) const;
};

PropensityModel FitLogistic(const PointSet& points,
                            std::span<const double> labels,
                            const PropensityOptions& options = {});

// Labels included rows 1 and excluded rows 0, encodes `covariates` with a
// StandardizedView fit over the whole dataset, and fits the model.
PropensityModel FitPropensity(const Dataset& dataset,
                              const SubsetPartition& partition,
                              std::span<const std::string> covariates,
                              const PropensityOptions& options = {});

}  // namespace cofact

#endif  // COFACT_PROPENSITY_H_
