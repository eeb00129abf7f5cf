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

#include "cofact/kd_tree.h"

#include <cmath>
#include <limits>
#include <random>

#include "gtest/gtest.h"
#include "test_util.h"

namespace cofact {
namespace {

// Reference nearest neighbour written independently of the library.
std::pair<double, std::size_t> BruteForce(const PointSet& points,
                                          std::span<const double> q) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t index = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < points.dim; ++j) {
      s += (points.row(i)[j] - q[j]) * (points.row(i)[j] - q[j]);
    }
    if (s < best) {
      best = s;
      index = i;
    }
  }
  return {std::sqrt(best), index};
}

TEST(KdTree, MatchesBruteForceSixDims) {
  std::mt19937_64 rng(2024);
  const PointSet points = testing::RandomPoints(500, 6, rng);
  const PointSet queries = testing::RandomPoints(100, 6, rng);
  const KdTree tree(points);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto [distance, index] = BruteForce(points, queries.row(q));
    const Neighbor got = tree.Nearest(queries.row(q));
    EXPECT_EQ(got.index, index);
    EXPECT_EQ(got.distance, distance);
    EXPECT_EQ(got, LinearScanNearest(points, queries.row(q)));
  }
}

TEST(KdTree, VariousShapesAndLeafSizes) {
  std::mt19937_64 rng(7);
  for (std::size_t dim : {1u, 2u, 3u, 9u, 16u}) {
    for (std::size_t n : {1u, 2u, 17u, 300u}) {
      for (std::size_t leaf : {1u, 4u, 32u}) {
        const PointSet points = testing::RandomPoints(n, dim, rng);
        const KdTree tree(points, leaf);
        EXPECT_EQ(tree.size(), n);
        for (int q = 0; q < 20; ++q) {
          const PointSet query = testing::RandomPoints(1, dim, rng);
          EXPECT_EQ(tree.Nearest(query.row(0)), LinearScanNearest(points, query.row(0)));
        }
      }
    }
  }
}

TEST(KdTree, TiesGoToLowestIndex) {
  // Grid with many duplicates: every query has several equidistant points.
  PointSet points;
  points.dim = 2;
  for (int rep = 0; rep < 3; ++rep) {
    for (int x = 0; x < 6; ++x) {
      for (int y = 0; y < 6; ++y) {
        points.data.push_back(x);
        points.data.push_back(y);
      }
    }
  }
  const KdTree tree(points, 2);
  for (int x = 0; x < 11; ++x) {
    for (int y = 0; y < 11; ++y) {
      const double q[2] = {x * 0.5, y * 0.5};
      const auto [distance, index] = BruteForce(points, q);
      const Neighbor got = tree.Nearest(q);
      EXPECT_EQ(got.index, index) << x << "," << y;
      EXPECT_EQ(got.distance, distance);
    }
  }
}

TEST(KdTree, ExactHitHasZeroDistance) {
  std::mt19937_64 rng(1);
  const PointSet points = testing::RandomPoints(200, 4, rng);
  const KdTree tree(points);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Neighbor got = tree.Nearest(points.row(i));
    EXPECT_EQ(got.distance, 0.0);
    EXPECT_EQ(got.index, i);
  }
}

}  // namespace
}  // namespace cofact
