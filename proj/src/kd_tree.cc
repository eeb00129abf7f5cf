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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cofact/error.h"

namespace cofact {

Neighbor LinearScanNearest(const PointSet& points,
                           std::span<const double> query) {
  double best_sq = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = SquaredDistance(points.row(i), query);
    if (d < best_sq) {
      best_sq = d;
      best = i;
    }
  }
  return {std::sqrt(best_sq), best};
}

KdTree::KdTree(PointSet points, std::size_t leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  if (points_.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot index an empty point set");
  }
  if (points_.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "point set too large to index");
  }
  for (double v : points_.data) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "cannot index non-finite coordinates");
    }
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
  Build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t KdTree::Build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= leaf_size_) return id;

  // Split on the axis of largest spread.
  const std::size_t dim = points_.dim;
  std::uint32_t axis = 0;
  double widest = -1.0;
  for (std::size_t a = 0; a < dim; ++a) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::uint32_t i = begin; i < end; ++i) {
      const double v = points_.data[order_[i] * dim + a];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > widest) {
      widest = hi - lo;
      axis = static_cast<std::uint32_t>(a);
    }
  }
  if (widest <= 0.0) return id;  // All points coincide; keep as a leaf.

  const std::uint32_t mid = begin + (end - begin) / 2;
  auto coord = [&](std::uint32_t p) { return points_.data[p * dim + axis]; };
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return coord(a) < coord(b);
                   });
  const double split = coord(order_[mid]);
  const std::int32_t left = Build(begin, mid);
  const std::int32_t right = Build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdTree::Search(std::int32_t id, std::span<const double> query,
                    double& best_sq, std::size_t& best_index) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t p = order_[i];
      const double d = SquaredDistance(points_.row(p), query);
      if (d < best_sq || (d == best_sq && p < best_index)) {
        best_sq = d;
        best_index = p;
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double diff = query[node.axis] - node.split;
  const std::int32_t near = diff < 0.0 ? node.left : node.right;
  const std::int32_t far = diff < 0.0 ? node.right : node.left;
  Search(near, query, best_sq, best_index);
  // A floating-point sum of nonnegative terms is never below any one term,
  // so diff^2 is a valid lower bound. Equality must still be visited to
  // honor lowest-index tie-breaking.
  if (diff * diff <= best_sq) Search(far, query, best_sq, best_index);
}

Neighbor KdTree::Nearest(std::span<const double> query) const {
  if (query.size() != points_.dim) {
    throw Error(ErrorCode::kInvalidArgument, "query dimension mismatch");
  }
  double best_sq = std::numeric_limits<double>::infinity();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  Search(0, query, best_sq, best);
  return {std::sqrt(best_sq), best};
}

}  // namespace cofact
