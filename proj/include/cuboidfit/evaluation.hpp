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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cuboidfit/geometry.hpp"
#include "cuboidfit/optimizer.hpp"

namespace cuboidfit {

struct LabelIou {
  int label = 0;
  double iou = 0.0;

  bool operator==(const LabelIou&) const = default;
};

struct MetricsReport {
  double chamfer = 0.0;
  double normal_consistency = 0.0;
  double n_ac = 0.0;
  std::vector<LabelIou> per_label;
  /// Mean per-label IOU x 100, present when ground-truth labels exist.
  std::optional<double> miou;
};

/// `k` area-weighted samples over the cuboids flagged in `active`.
/// Throws InvalidInput ("empty abstraction") when no cuboid is active.
std::vector<SurfaceSample> sample_abstraction(std::span<const Cuboid> cuboids,
                                              std::span<const std::uint8_t> active,
                                              std::size_t k, Rng& rng);

/// `k` indices into [0, n): without replacement when k <= n, otherwise all
/// n indices followed by k - n uniform draws.
std::vector<std::size_t> resample_indices(std::size_t n, std::size_t k,
                                          Rng& rng);

/// Symmetric Chamfer distance between `samples` points on the active
/// cuboids and `samples` points of the cloud.
double eval_chamfer(const AbstractionResult& result, const PointCloud& pc,
                    std::size_t samples, Rng& rng);

/// Mean absolute cosine between each point's normal and the normal of its
/// nearest neighbour in the other set, averaged over both directions.
double normal_consistency(const AbstractionResult& result, const PointCloud& pc,
                          std::size_t samples, Rng& rng);

/// Symmetric normal consistency between two oriented point sets.
double normal_consistency(std::span<const Vec3> points_a,
                          std::span<const Vec3> normals_a,
                          std::span<const Vec3> points_b,
                          std::span<const Vec3> normals_b);

/// Predicted cuboid index and ground-truth label for every point of a shape.
struct ShapeSegmentation {
  std::vector<int> predicted;
  std::vector<int> ground_truth;
};

/// Semantic label for each cuboid index.
using LabelMap = std::vector<int>;

/// Labels cuboid indices by majority vote over a random `fraction` of the
/// shapes. Cuboids with no points take the most frequent label overall.
/// Throws InvalidConfig when the subset would be empty.
LabelMap transfer_labels(std::span<const ShapeSegmentation> shapes,
                         int cuboid_count, double fraction, Rng& rng);

struct MiouResult {
  std::vector<LabelIou> per_label;
  double miou = 0.0;
};

/// IOU per label pooled over all shapes; labels absent from both prediction
/// and ground truth are skipped.
MiouResult miou(std::span<const ShapeSegmentation> shapes,
                const LabelMap& labelmap);

/// Shape indices grouped by identical existence vectors, largest cluster
/// first, then lexicographic by vector.
std::vector<std::vector<std::size_t>> structural_clusters(
    std::span<const std::vector<std::uint8_t>> existence);

/// Mean number of set flags per shape (0 for an empty dataset).
double active_cuboid_stats(std::span<const std::vector<std::uint8_t>> existence);

}  // namespace cuboidfit
