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

#include "cuboidfit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cuboidfit/error.hpp"
#include "cuboidfit/kdtree.hpp"

namespace cuboidfit {

double reconstruction_loss(const PointCloud& pc,
                           std::span<const Cuboid> cuboids,
                           const AssignmentMatrix& assignment, double sigma_s,
                           const ReconstructionOptions& options, Rng& rng) {
  if (cuboids.empty()) throw InvalidConfig("reconstruction loss needs M >= 1");
  if (pc.size() == 0) throw InvalidInput("point cloud is empty");
  if (assignment.cuboids() != static_cast<Eigen::Index>(cuboids.size()) ||
      assignment.points() != static_cast<Eigen::Index>(pc.size())) {
    throw InvalidInput("assignment shape does not match cuboids x points");
  }
  if (sigma_s < 0) throw InvalidConfig("sigma_s must be non-negative");

  std::vector<CuboidFrame> frames;
  frames.reserve(cuboids.size());
  for (const Cuboid& c : cuboids) frames.emplace_back(c);

  const bool sample = options.projection == ProjectionMode::NormalSimilar && sigma_s > 0;
  std::normal_distribution<double> noise(0.0, sample ? sigma_s : 1.0);
  std::vector<double> d(cuboids.size());
  double total = 0.0;
  for (std::size_t n = 0; n < pc.size(); ++n) {
    const Vec3& p = pc.points[n];
    const Vec3& normal = pc.normals[n];
    const double eta = sample ? noise(rng) : 0.0;
    for (std::size_t m = 0; m < cuboids.size(); ++m) {
      if (options.projection == ProjectionMode::NormalSimilar) {
        d[m] = project_to_face(p, normal, frames[m],
                               select_similar_face(frames[m], normal), eta)
                   .d2;
      } else {
        d[m] = min_distance_point_to_cuboid(p, frames[m]).d2;
      }
    }
    if (options.hard_assignment) {
      total += *std::min_element(d.begin(), d.end());
    } else {
      double column = 0.0;
      for (std::size_t m = 0; m < cuboids.size(); ++m) {
        column += assignment.W(static_cast<Eigen::Index>(m),
                               static_cast<Eigen::Index>(n)) * d[m];
      }
      total += column;
    }
  }
  return total / static_cast<double>(pc.size());
}

double compactness_loss(const CoverageVector& w, double eps_sps) {
  if (std::abs(w.sum() - 1.0) > 1e-9) {
    throw InvalidInput("coverage does not sum to one");
  }
  double root_sum = 0.0;
  for (Eigen::Index m = 0; m < w.size(); ++m) root_sum += std::sqrt(w[m] + eps_sps);
  return root_sum * root_sum;
}

Eigen::VectorXd compactness_gradient(const CoverageVector& w, double eps_sps) {
  double root_sum = 0.0;
  for (Eigen::Index m = 0; m < w.size(); ++m) root_sum += std::sqrt(w[m] + eps_sps);
  Eigen::VectorXd g(w.size());
  for (Eigen::Index m = 0; m < w.size(); ++m) {
    g[m] = root_sum / std::sqrt(w[m] + eps_sps);
  }
  return g;
}

double existence_loss(std::span<const double> delta,
                      std::span<const std::uint8_t> targets) {
  if (delta.size() != targets.size()) {
    throw InvalidInput("existence predictions and targets differ in length");
  }
  if (delta.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t m = 0; m < delta.size(); ++m) {
    const double p = std::clamp(delta[m], kExistenceClamp, 1.0 - kExistenceClamp);
    total += targets[m] ? std::log(p) : std::log(1.0 - p);
  }
  return -total / static_cast<double>(delta.size());
}

double chamfer_distance(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw InvalidInput("chamfer distance of an empty set");
  const KdTree tree_a(a);
  const KdTree tree_b(b);
  double forward = 0.0;
  for (const Vec3& p : a) forward += tree_b.nearest(p).second;
  double backward = 0.0;
  for (const Vec3& p : b) backward += tree_a.nearest(p).second;
  return forward / static_cast<double>(a.size()) +
         backward / static_cast<double>(b.size());
}

LossBreakdown total_loss(double recons, double compact, double exist,
                         double lambda1, double lambda2) {
  if (lambda1 < 0 || lambda2 < 0) throw InvalidConfig("loss weights must be non-negative");
  return {recons, compact, exist, recons + lambda1 * compact + lambda2 * exist};
}

}  // namespace cuboidfit
