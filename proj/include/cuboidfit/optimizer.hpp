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
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cuboidfit/assignment.hpp"
#include "cuboidfit/error.hpp"
#include "cuboidfit/geometry.hpp"
#include "cuboidfit/losses.hpp"

namespace cuboidfit {

/// Supervision used for the reconstruction term.
enum class Variant {
  /// Soft assignment from optimized logits with point-to-cuboid distance.
  P2CSeg,
  /// Every point assigned to its nearest cuboid; logits are not trained.
  P2CDis,
  /// Bidirectional Chamfer distance to points sampled on active cuboids.
  ChamferDis,
};

std::string_view to_string(Variant v);
std::string_view to_string(ProjectionMode p);
Variant parse_variant(std::string_view name);
ProjectionMode parse_projection(std::string_view name);

struct FitConfig {
  int cuboids = 16;
  int steps = 2000;
  /// Adam step size for cuboid parameters.
  double lr = 5e-3;
  /// Adam step size for the assignment logits.
  double logit_lr = 0.2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double lambda1 = 0.1;
  double lambda2 = 0.01;
  double sigma_s = 0.05;
  double eps_sps = 0.01;
  double eps_ext = 0.05;
  Variant variant = Variant::P2CSeg;
  ProjectionMode projection = ProjectionMode::NormalSimilar;
  std::uint64_t seed = 0;
  /// Random subset of points used per step; the full cloud when unset.
  std::optional<std::size_t> batch_points;

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
  bool operator==(const FitConfig&) const = default;
};

/// Number of scalar parameters stored per cuboid: t(3), r(4), s_log(3),
/// delta_logit(1).
inline constexpr int kCuboidParams = 11;

struct FitState {
  std::vector<Cuboid> cuboids;
  AssignmentLogits logits;
  /// Adam moments over the packed parameter vector.
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::int64_t step = 0;
  /// Cuboids that still receive surface samples (Chamfer-Dis only).
  std::vector<std::uint8_t> sample_active;

  /// Cuboid parameters followed by the logits in column-major order.
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& params);
  std::size_t parameter_count() const;
};

struct CuboidGradient {
  Vec3 t = Vec3::Zero();
  Eigen::Vector4d r = Eigen::Vector4d::Zero();
  Vec3 s_log = Vec3::Zero();
  double delta_logit = 0.0;
};

struct Gradients {
  std::vector<CuboidGradient> cuboids;
  Eigen::MatrixXd logits;

  /// Same layout as FitState::pack().
  Eigen::VectorXd pack() const;
};

/// A surface sample drawn on one cuboid, reparameterized by its unit-cube
/// coordinates so it moves with the cuboid.
struct SurfaceDraw {
  int cuboid = 0;
  FaceIndex face = FaceIndex::PosX;
  Vec3 unit_local = Vec3::Zero();
};

/// Randomness and discrete choices held fixed within one step: the point
/// batch, normal offsets, projected face per (cuboid, point), and Chamfer
/// surface samples.
struct StepPlan {
  std::vector<std::size_t> points;
  std::vector<double> eta;
  /// Row-major M x B.
  std::vector<FaceIndex> faces;
  std::vector<SurfaceDraw> samples;

  FaceIndex face(std::size_t cuboid, std::size_t batch_index) const {
    return faces[cuboid * points.size() + batch_index];
  }
};

struct StepEvaluation {
  LossBreakdown loss;
  /// Assignment over the full cloud (hard for the P2C-Dis and Chamfer-Dis
  /// variants).
  AssignmentMatrix assignment;
  CoverageVector coverage;
  std::vector<std::uint8_t> targets;
};

/// Identity rotations, farthest-point seeded translations, half-extents of
/// 0.1 x the bounding-box diagonal, delta = 0.5 and zero logits.
FitState init_fit(const PointCloud& pc, const FitConfig& config);

StepPlan plan_step(const FitState& state, const PointCloud& pc,
                   const FitConfig& config, Rng& rng);

/// Loss of `state` under a frozen plan.
StepEvaluation evaluate_step(const FitState& state, const PointCloud& pc,
                             const FitConfig& config, const StepPlan& plan);

/// Loss and its analytic gradient under a frozen plan.
StepEvaluation compute_gradients(const FitState& state, const PointCloud& pc,
                                 const FitConfig& config, const StepPlan& plan,
                                 Gradients& gradients);

/// Draws a fresh plan from `rng` and returns the gradient. Throws
/// NumericalError naming the first non-finite component.
Gradients compute_gradients(const FitState& state, const PointCloud& pc,
                            const FitConfig& config, Rng& rng);

/// Bias-corrected Adam update; quaternions are renormalized afterwards.
/// Logits are left untouched for the variants that do not train them.
void adam_step(FitState& state, const Gradients& gradients,
               const FitConfig& config);

struct AbstractionResult {
  /// Fitted cuboids; existence() gives delta.
  std::vector<Cuboid> cuboids;
  AssignmentMatrix assignment;
  std::vector<int> labels;
  CoverageVector coverage;
  std::vector<std::uint8_t> exists;
  int active_count = 0;
  std::vector<LossBreakdown> trace;
  LossBreakdown final_loss;
};

/// Final assignment, labels and existence flags for a state.
AbstractionResult summarize(const FitState& state, const PointCloud& pc,
                            const FitConfig& config, Rng& rng);

class FitDiverged : public NumericalError {
 public:
  FitDiverged(const std::string& what, FitState last_finite)
      : NumericalError(what), last_state(std::move(last_finite)) {}

  FitState last_state;
};

/// Runs config.steps iterations of plan -> loss -> gradient -> Adam.
/// Throws FitDiverged if the loss or a gradient becomes non-finite.
AbstractionResult fit(const PointCloud& pc, const FitConfig& config);

}  // namespace cuboidfit
