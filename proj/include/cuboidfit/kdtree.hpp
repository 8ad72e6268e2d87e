// Copyright 2026 The cuboidfit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cuboidfit/geometry.hpp"

namespace cuboidfit {

/// Static 3-d tree for exact nearest-neighbour queries. Keeps a copy of the
/// points; indices returned refer to the input order.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  /// Index and squared distance of the nearest point. Ties go to the lowest
  /// index. The tree must be non-empty.
  std::pair<std::size_t, double> nearest(const Vec3& query) const;

  /// Indices of the k nearest points sorted by (distance, index).
  std::vector<std::size_t> k_nearest(const Vec3& query, std::size_t k) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::size_t begin;
    std::size_t end;
    int axis;  // -1 for leaves
    double split;
    int left;
    int right;
  };

  int build(std::size_t begin, std::size_t end);

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace cuboidfit
