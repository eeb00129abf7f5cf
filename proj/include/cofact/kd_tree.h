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

#ifndef COFACT_KD_TREE_H_
#define COFACT_KD_TREE_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "cofact/tabular.h"

namespace cofact {

struct Neighbor {
  double distance = std::numeric_limits<double>::infinity();
  std::size_t index = 0;  // Position within the indexed PointSet.

  bool operator==(const Neighbor&) const = default;
};

inline double SquaredDistance(std::span<const double> a,
                              std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

// Exact nearest neighbor by linear scan; ties go to the lowest index.
Neighbor LinearScanNearest(const PointSet& points, std::span<const double> query);

// Exact kd-tree over a fixed point set. Query results are bit-identical to
// LinearScanNearest, including tie-breaking. Immutable after construction and
// safe to query from several threads.
class KdTree {
 public:
  // `points` must be nonempty with finite coordinates.
  explicit KdTree(PointSet points, std::size_t leaf_size = 8);

  Neighbor Nearest(std::span<const double> query) const;

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return points_.dim; }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t axis = 0;
    double split = 0.0;
  };

  std::int32_t Build(std::uint32_t begin, std::uint32_t end);
  void Search(std::int32_t node, std::span<const double> query,
              double& best_sq, std::size_t& best_index) const;

  PointSet points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

}  // namespace cofact

#endif  // COFACT_KD_TREE_H_
