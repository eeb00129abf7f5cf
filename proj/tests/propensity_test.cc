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
#include <random>

#include "gtest/gtest.h"
#include "test_util.h"

namespace cofact {
namespace {

using ::cofact::testing::RandomPoints;

PointSet Points(std::size_t dim, std::vector<double> data) {
  PointSet p;
  p.dim = dim;
  p.data = std::move(data);
  return p;
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_EQ(Sigmoid(0.0), 0.5);
  EXPECT_GE(Sigmoid(-800.0), 0.0);
  EXPECT_LE(Sigmoid(800.0), 1.0);
  EXPECT_NEAR(Sigmoid(2.0) + Sigmoid(-2.0), 1.0, 1e-15);
}

TEST(LogisticObjective, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> normal;
  const PointSet x = RandomPoints(60, 4, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.size(); ++i) y.push_back(rng() % 2);
  const LogisticObjective f(x, y, 1e-3);
  const double h = 1e-5;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd theta(5);
    for (int j = 0; j < 5; ++j) theta[j] = normal(rng);
    const Eigen::VectorXd g = f.Gradient(theta);
    for (int j = 0; j < 5; ++j) {
      Eigen::VectorXd up = theta;
      Eigen::VectorXd down = theta;
      up[j] += h;
      down[j] -= h;
      const double fd = (f.Value(up) - f.Value(down)) / (2 * h);
      EXPECT_LT(std::abs(fd - g[j]) / std::max(std::abs(g[j]), 1e-8), 1e-5)
          << "component " << j;
    }
  }
}

TEST(LogisticObjective, HessianMatchesGradientDifferences) {
  std::mt19937_64 rng(5);
  const PointSet x = RandomPoints(40, 3, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.size(); ++i) y.push_back(rng() % 2);
  const LogisticObjective f(x, y, 0.1);
  Eigen::VectorXd theta(4);
  theta << 0.3, -0.2, 0.7, 0.1;
  const Eigen::MatrixXd hess = f.Hessian(theta);
  for (int j = 0; j < 4; ++j) {
    Eigen::VectorXd up = theta;
    Eigen::VectorXd down = theta;
    up[j] += 1e-5;
    down[j] -= 1e-5;
    const Eigen::VectorXd fd = (f.Gradient(up) - f.Gradient(down)) / 2e-5;
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(fd[i], hess(i, j), 1e-7);
  }
}

TEST(FitLogistic, ReferenceOptimum) {
  // Optimum from an independent scipy BFGS run on the same objective.
  const PointSet x = Points(2, {0.5, -1.0, 1.5, 0.3, -0.7, 0.8, 2.0, 1.1,
                                -1.2, -0.4, 0.1, 0.9, 1.1, -0.6, -0.3, -1.5});
  const std::vector<double> y{1, 1, 0, 1, 0, 0, 1, 0};
  PropensityOptions options;
  options.lambda = 0.1;
  const PropensityModel m = FitLogistic(x, y, options);
  EXPECT_TRUE(m.converged);
  EXPECT_NEAR(m.weights[0], 1.4995173578895566, 1e-6);
  EXPECT_NEAR(m.weights[1], -0.2700849217710355, 1e-6);
  EXPECT_NEAR(m.intercept, -0.5969551118961537, 1e-6);
  EXPECT_LT(m.gradient_norm, 1e-8);
}

TEST(FitLogistic, ConstantCovariateGivesIntercept) {
  const PointSet x = Points(1, std::vector<double>(10, 0.0));
  const std::vector<double> y{1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  const PropensityModel m = FitLogistic(x, y);
  EXPECT_TRUE(m.converged);
  EXPECT_NEAR(m.weights[0], 0.0, 1e-12);
  // d/db of the loss is sigma(b) - 0.3, so the solver tolerance bounds the error.
  EXPECT_NEAR(Sigmoid(m.intercept), 0.3, 1e-8);
}

TEST(FitLogistic, SeparableWithPenaltyIsFiniteAndUnique) {
  const PointSet x = Points(1, {-3, -2, -1, -0.5, 0.5, 1, 2, 3});
  const std::vector<double> y{0, 0, 0, 0, 1, 1, 1, 1};
  PropensityOptions options;
  options.lambda = 1.0;
  const PropensityModel base = FitLogistic(x, y, options);
  ASSERT_TRUE(base.converged);
  EXPECT_TRUE(std::isfinite(base.weights[0]));
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> start(-5, 5);
  for (int s = 0; s < 3; ++s) {
    options.initial = {start(rng), start(rng)};
    const PropensityModel other = FitLogistic(x, y, options);
    EXPECT_TRUE(other.converged);
    EXPECT_NEAR(other.weights[0], base.weights[0], 1e-6);
    EXPECT_NEAR(other.intercept, base.intercept, 1e-6);
  }
}

TEST(FitLogistic, UnpenalizedSeparableDoesNotConverge) {
  const PointSet x = Points(1, {-2, -1, 1, 2});
  const std::vector<double> y{0, 0, 1, 1};
  PropensityOptions options;
  options.lambda = 0.0;
  const PropensityModel m = FitLogistic(x, y, options);
  EXPECT_FALSE(m.converged);
  EXPECT_FALSE(m.diagnostic.empty());
  EXPECT_TRUE(std::isfinite(m.weights[0]));
}

TEST(FitLogistic, MultiStartAgreementDefaultLambda) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  const PointSet x = RandomPoints(300, 5, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = 0.8 * x.row(i)[0] - 0.5 * x.row(i)[2] + normal(rng);
    y.push_back(z > 0 ? 1 : 0);
  }
  const PropensityModel base = FitLogistic(x, y);
  ASSERT_TRUE(base.converged);
  for (int s = 0; s < 4; ++s) {
    PropensityOptions options;
    for (int j = 0; j < 6; ++j) options.initial.push_back(normal(rng));
    const PropensityModel other = FitLogistic(x, y, options);
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(other.weights[j], base.weights[j], 1e-6);
  }
}

TEST(FitPropensity, ScoresRespectPartition) {
  const Dataset d = testing::RandomNumericDataset(400, 3, 17);
  const SubsetPartition p = Partition(d, ParseFilter("x0 > 0", d));
  // x0 is the filter feature, so it is predictive only through itself; use a
  // correlated covariate built from x0.
  std::vector<double> proxy;
  for (std::size_t i = 0; i < d.row_count(); ++i) {
    proxy.push_back(d.numeric(0)[i] + 0.5 * d.numeric(1)[i]);
  }
  const Dataset with_proxy = testing::NumericDataset(
      {"x0", "proxy"}, {std::vector<double>(d.numeric(0).begin(), d.numeric(0).end()),
                        proxy});
  const std::vector<std::string> covariates{"proxy"};
  const PropensityModel m = FitPropensity(with_proxy, p, covariates);
  EXPECT_TRUE(m.converged);
  EXPECT_GT(m.weights[0], 0.0);
  for (double v : {-5.0, 0.0, 5.0}) {
    const double x[1] = {v};
    const double s = m.Score(x);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

}  // namespace
}  // namespace cofact
