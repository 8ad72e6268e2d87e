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
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cuboidfit/assignment.hpp"
#include "cuboidfit/geometry.hpp"

namespace cuboidfit {

/// How a point is projected onto a cuboid surface.
enum class ProjectionMode {
  /// Face with the most similar normal, with sampling along the point normal.
  NormalSimilar,
  /// Closest face regardless of orientation.
  MinDistance,
};

struct ReconstructionOptions {
  ProjectionMode projection = ProjectionMode::NormalSimilar;
  /// Replace W by a one-hot indicator of the nearest cuboid per point.
  bool hard_assignment = false;
};

struct LossBreakdown {
  double recons = 0.0;
  double compact = 0.0;
  double exist = 0.0;
  double total = 0.0;

  bool operator==(const LossBreakdown&) const = default;
};

/// Mean over points of sum_m W(m, n) * d(p_n, C_m).
double reconstruction_loss(const PointCloud& pc,
                           std::span<const Cuboid> cuboids,
                           const AssignmentMatrix& assignment, double sigma_s,
                           const ReconstructionOptions& options, Rng& rng);

/// (sum_m sqrt(w_m + eps_sps))^2.
double compactness_loss(const CoverageVector& w, double eps_sps);

/// d compactness / d w.
Eigen::VectorXd compactness_gradient(const CoverageVector& w, double eps_sps);

/// Clamp applied to existence probabilities before taking logs.
inline constexpr double kExistenceClamp = 1e-7;

/// Mean binary cross-entropy of `delta` against 0/1 targets.
double existence_loss(std::span<const double> delta,
                      std::span<const std::uint8_t> targets);

/// Mean squared nearest-neighbour distance from A to B plus from B to A.
/// Throws InvalidInput when either set is empty.
double chamfer_distance(std::span<const Vec3> a, std::span<const Vec3> b);

/// recons + lambda1 * compact + lambda2 * exist. Throws InvalidConfig for
/// negative weights.
LossBreakdown total_loss(double recons, double compact, double exist,
                         double lambda1, double lambda2);

}  // namespace cuboidfit
