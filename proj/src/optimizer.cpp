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

#include "cuboidfit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

#include "cuboidfit/kdtree.hpp"

namespace cuboidfit {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::P2CSeg: return "p2c-seg";
    case Variant::P2CDis: return "p2c-dis";
    case Variant::ChamferDis: return "chamfer-dis";
  }
  return "unknown";
}

std::string_view to_string(ProjectionMode p) {
  return p == ProjectionMode::NormalSimilar ? "normal" : "mindist";
}

Variant parse_variant(std::string_view name) {
  if (name == "p2c-seg") return Variant::P2CSeg;
  if (name == "p2c-dis") return Variant::P2CDis;
  if (name == "chamfer-dis") return Variant::ChamferDis;
  throw InvalidConfig("unknown variant '" + std::string(name) + "'");
}

ProjectionMode parse_projection(std::string_view name) {
  if (name == "normal") return ProjectionMode::NormalSimilar;
  if (name == "mindist") return ProjectionMode::MinDistance;
  throw InvalidConfig("unknown projection '" + std::string(name) + "'");
}

void FitConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidConfig(what);
  };
  require(cuboids >= 1, "cuboid count must be at least 1");
  require(steps >= 1, "step count must be at least 1");
  require(lr > 0 && std::isfinite(lr), "learning rate must be positive");
  require(logit_lr > 0 && std::isfinite(logit_lr), "logit learning rate must be positive");
  require(adam_beta1 >= 0 && adam_beta1 < 1, "adam beta1 must lie in [0, 1)");
  require(adam_beta2 >= 0 && adam_beta2 < 1, "adam beta2 must lie in [0, 1)");
  require(adam_eps > 0, "adam epsilon must be positive");
  require(lambda1 >= 0 && lambda2 >= 0, "loss weights must be non-negative");
  require(sigma_s >= 0 && std::isfinite(sigma_s), "sigma_s must be non-negative");
  require(eps_sps > 0, "eps_sps must be positive");
  require(eps_ext > 0 && eps_ext < 1, "eps_ext must lie in (0, 1)");
  require(!batch_points || *batch_points >= 1, "batch size must be at least 1");
}

std::size_t FitState::parameter_count() const {
  return cuboids.size() * kCuboidParams +
         static_cast<std::size_t>(logits.values.size());
}

Eigen::VectorXd FitState::pack() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index i = 0;
  for (const Cuboid& c : cuboids) {
    out.segment<3>(i) = c.t;
    out.segment<4>(i + 3) << c.r.w, c.r.x, c.r.y, c.r.z;
    out.segment<3>(i + 7) = c.s_log;
    out[i + 10] = c.delta_logit;
    i += kCuboidParams;
  }
  out.tail(logits.values.size()) =
      Eigen::Map<const Eigen::VectorXd>(logits.values.data(), logits.values.size());
  return out;
}

void FitState::unpack(const Eigen::VectorXd& params) {
  Eigen::Index i = 0;
  for (Cuboid& c : cuboids) {
    c.t = params.segment<3>(i);
    c.r = Quaternion{params[i + 3], params[i + 4], params[i + 5], params[i + 6]};
    c.s_log = params.segment<3>(i + 7);
    c.delta_logit = params[i + 10];
    i += kCuboidParams;
  }
  Eigen::Map<Eigen::VectorXd>(logits.values.data(), logits.values.size()) =
      params.tail(logits.values.size());
}

Eigen::VectorXd Gradients::pack() const {
  const Eigen::Index n = static_cast<Eigen::Index>(cuboids.size()) * kCuboidParams +
                         logits.size();
  Eigen::VectorXd out(n);
  Eigen::Index i = 0;
  for (const CuboidGradient& g : cuboids) {
    out.segment<3>(i) = g.t;
    out.segment<4>(i + 3) = g.r;
    out.segment<3>(i + 7) = g.s_log;
    out[i + 10] = g.delta_logit;
    i += kCuboidParams;
  }
  out.tail(logits.size()) =
      Eigen::Map<const Eigen::VectorXd>(logits.data(), logits.size());
  return out;
}

FitState init_fit(const PointCloud& pc, const FitConfig& config) {
  config.validate();
  if (pc.size() == 0) throw InvalidInput("point cloud is empty");
  if (pc.normals.size() != pc.size()) throw InvalidInput("point cloud has no normals");

  const auto m_count = static_cast<std::size_t>(config.cuboids);
  if (pc.size() < m_count) {
    std::cerr << "warning: " << pc.size() << " points for " << m_count
              << " cuboids; seeds will repeat\n";
  }

  // Farthest-point seeds starting from point 0; repeats once every point is
  // taken.
  std::vector<std::size_t> seeds{0};
  std::vector<double> dist(pc.size(), std::numeric_limits<double>::infinity());
  while (seeds.size() < m_count) {
    const Vec3& last = pc.points[seeds.back()];
    std::size_t best = 0;
    for (std::size_t n = 0; n < pc.size(); ++n) {
      dist[n] = std::min(dist[n], (pc.points[n] - last).squaredNorm());
      if (dist[n] > dist[best]) best = n;
    }
    seeds.push_back(best);
  }

  const double diag = bbox_diagonal(pc.points);
  const double s_init = std::log(0.1 * (diag > 0 ? diag : 1.0));

  FitState state;
  for (std::size_t seed : seeds) {
    Cuboid c;
    c.t = pc.points[seed];
    c.r = Quaternion::identity();
    c.s_log = Vec3::Constant(s_init);
    c.delta_logit = 0.0;
    state.cuboids.push_back(c);
  }
  state.logits.values = Eigen::MatrixXd::Zero(config.cuboids,
                                              static_cast<Eigen::Index>(pc.size()));
  const auto params = static_cast<Eigen::Index>(state.parameter_count());
  state.first_moment = Eigen::VectorXd::Zero(params);
  state.second_moment = Eigen::VectorXd::Zero(params);
  state.sample_active.assign(m_count, 1);
  return state;
}

StepPlan plan_step(const FitState& state, const PointCloud& pc,
                   const FitConfig& config, Rng& rng) {
  const std::size_t n_total = pc.size();
  StepPlan plan;
  if (config.batch_points && *config.batch_points < n_total) {
    std::vector<std::size_t> all(n_total);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const std::size_t k = *config.batch_points;
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n_total - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    plan.points = std::move(all);
  } else {
    plan.points.resize(n_total);
    std::iota(plan.points.begin(), plan.points.end(), std::size_t{0});
  }
  const std::size_t batch = plan.points.size();

  const bool sample_normals =
      config.projection == ProjectionMode::NormalSimilar && config.sigma_s > 0;
  plan.eta.assign(batch, 0.0);
  if (sample_normals && config.variant != Variant::ChamferDis) {
    std::normal_distribution<double> noise(0.0, config.sigma_s);
    for (double& e : plan.eta) e = noise(rng);
  }

  std::vector<CuboidFrame> frames;
  for (const Cuboid& c : state.cuboids) frames.emplace_back(c);

  if (config.variant == Variant::ChamferDis) {
    std::vector<double> weights(frames.size(), 0.0);
    for (std::size_t m = 0; m < frames.size(); ++m) {
      const bool active = state.sample_active.empty() || state.sample_active[m];
      if (active) weights[m] = state.cuboids[m].surface_area();
    }
    std::discrete_distribution<int> pick_cuboid(weights.begin(), weights.end());
    plan.samples.reserve(batch);
    for (std::size_t j = 0; j < batch; ++j) {
      const int m = pick_cuboid(rng);
      const auto areas = face_areas(frames[static_cast<std::size_t>(m)].half_extents);
      std::discrete_distribution<int> pick_face(areas.begin(), areas.end());
      const auto face = static_cast<FaceIndex>(pick_face(rng));
      const SurfaceSample s = sample_face(frames[static_cast<std::size_t>(m)], face, rng);
      plan.samples.push_back({m, face, s.unit_local});
    }
    return plan;
  }

  plan.faces.resize(frames.size() * batch);
  for (std::size_t m = 0; m < frames.size(); ++m) {
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t n = plan.points[b];
      plan.faces[m * batch + b] =
          config.projection == ProjectionMode::NormalSimilar
              ? select_similar_face(frames[m], pc.normals[n])
              : min_distance_point_to_cuboid(pc.points[n], frames[m]).face;
    }
  }
  return plan;
}

namespace {

/// d = |foot - p|^2 for a fixed face and offset, with its partial
/// derivatives. Clamped tangent coordinates sit on the rectangle boundary and
/// move with the cuboid; unclamped ones follow the sampled point.
struct FaceDistanceGrad {
  double d2 = 0.0;
  Vec3 t;
  Vec3 half_extents;
  Mat3 rotation;
};

FaceDistanceGrad face_distance_grad(const Vec3& p, const Vec3& normal,
                                    const CuboidFrame& frame, FaceIndex face,
                                    double eta) {
  const Mat3& r = frame.rotation;
  const Vec3& h = frame.half_extents;
  const int a = face_axis(face);
  const Vec3 x = p - frame.translation;
  const Vec3 local_p = r.transpose() * x;
  const Vec3 local_s = r.transpose() * (x + eta * normal);

  Vec3 foot, dep, dfoot_dh;
  for (int k = 0; k < 3; ++k) {
    if (k == a) {
      foot[k] = face_sign(face) * h[k];
      dep[k] = 1.0;
      dfoot_dh[k] = face_sign(face);
    } else if (local_s[k] > h[k]) {
      foot[k] = h[k];
      dep[k] = 1.0;
      dfoot_dh[k] = 1.0;
    } else if (local_s[k] < -h[k]) {
      foot[k] = -h[k];
      dep[k] = 1.0;
      dfoot_dh[k] = -1.0;
    } else {
      foot[k] = local_s[k];
      dep[k] = 0.0;
      dfoot_dh[k] = 0.0;
    }
  }
  const Vec3 v = foot - local_p;
  const Vec3 v_dep = v.cwiseProduct(dep);
  const Vec3 v_free = v - v_dep;

  FaceDistanceGrad out;
  out.d2 = v.squaredNorm();
  out.t = 2.0 * r * v_dep;
  out.half_extents = 2.0 * v.cwiseProduct(dfoot_dh);
  out.rotation = 2.0 * (-x * v_dep.transpose() + eta * normal * v_free.transpose());
  return out;
}

struct CuboidAccumulator {
  Vec3 t = Vec3::Zero();
  Vec3 half_extents = Vec3::Zero();
  Mat3 rotation = Mat3::Zero();
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

StepEvaluation forward(const FitState& state, const PointCloud& pc,
                       const FitConfig& config, const StepPlan& plan,
                       Gradients* grad) {
  const std::size_t m_count = state.cuboids.size();
  const std::size_t n_total = pc.size();
  const std::size_t batch = plan.points.size();
  const auto M = static_cast<Eigen::Index>(m_count);
  const auto N = static_cast<Eigen::Index>(n_total);
  if (m_count == 0) throw InvalidConfig("fit needs at least one cuboid");

  std::vector<CuboidFrame> frames;
  frames.reserve(m_count);
  for (const Cuboid& c : state.cuboids) frames.emplace_back(c);

  std::vector<CuboidAccumulator> acc(grad ? m_count : 0);
  Eigen::MatrixXd dloss_dw;  // d total / d W over the full cloud
  if (grad) dloss_dw = Eigen::MatrixXd::Zero(M, N);

  StepEvaluation eval;
  double recons = 0.0;

  if (config.variant == Variant::ChamferDis) {
    std::vector<Vec3> samples;
    samples.reserve(plan.samples.size());
    for (const SurfaceDraw& s : plan.samples) {
      const CuboidFrame& f = frames[static_cast<std::size_t>(s.cuboid)];
      samples.push_back(f.translation +
                        f.rotation * s.unit_local.cwiseProduct(f.half_extents));
    }
    std::vector<Vec3> inputs;
    inputs.reserve(batch);
    for (std::size_t n : plan.points) inputs.push_back(pc.points[n]);
    if (samples.empty()) throw InvalidConfig("no active cuboid to sample");

    const KdTree sample_tree(samples);
    const KdTree input_tree(inputs);
    std::vector<Vec3> dsample(samples.size(), Vec3::Zero());
    double forward_sum = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const auto [j, d2] = sample_tree.nearest(inputs[b]);
      forward_sum += d2;
      if (grad) dsample[j] += 2.0 * (samples[j] - inputs[b]) / static_cast<double>(batch);
    }
    double backward_sum = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const auto [b, d2] = input_tree.nearest(samples[j]);
      backward_sum += d2;
      if (grad) {
        dsample[j] += 2.0 * (samples[j] - inputs[b]) / static_cast<double>(samples.size());
      }
    }
    recons = forward_sum / static_cast<double>(batch) +
             backward_sum / static_cast<double>(samples.size());

    if (grad) {
      for (std::size_t j = 0; j < samples.size(); ++j) {
        const SurfaceDraw& s = plan.samples[j];
        const CuboidFrame& f = frames[static_cast<std::size_t>(s.cuboid)];
        CuboidAccumulator& a = acc[static_cast<std::size_t>(s.cuboid)];
        const Vec3& g = dsample[j];
        a.t += g;
        a.half_extents += (f.rotation.transpose() * g).cwiseProduct(s.unit_local);
        a.rotation += g * s.unit_local.cwiseProduct(f.half_extents).transpose();
      }
    }

    // Each point belongs to the cuboid that owns its nearest sample.
    std::vector<int> owner(n_total);
    for (std::size_t n = 0; n < n_total; ++n) {
      owner[n] = plan.samples[sample_tree.nearest(pc.points[n]).first].cuboid;
    }
    eval.assignment = one_hot(owner, M);
  } else {
    const bool soft = config.variant == Variant::P2CSeg;
    if (soft) eval.assignment = softmax_columns(state.logits);

    std::vector<double> d(m_count);
    std::vector<FaceDistanceGrad> g(grad ? m_count : 0);
    std::vector<int> owner;
    if (!soft) owner.assign(n_total, -1);

    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t n = plan.points[b];
      const Vec3& p = pc.points[n];
      const Vec3& normal = pc.normals[n];
      for (std::size_t m = 0; m < m_count; ++m) {
        const FaceIndex face = plan.face(m, b);
        if (grad) {
          g[m] = face_distance_grad(p, normal, frames[m], face, plan.eta[b]);
          d[m] = g[m].d2;
        } else {
          d[m] = project_to_face(p, normal, frames[m], face, plan.eta[b]).d2;
        }
      }
      if (soft) {
        for (std::size_t m = 0; m < m_count; ++m) {
          const double w = eval.assignment.W(static_cast<Eigen::Index>(m),
                                             static_cast<Eigen::Index>(n));
          recons += w * d[m];
          if (grad) {
            const double c = w / static_cast<double>(batch);
            acc[m].t += c * g[m].t;
            acc[m].half_extents += c * g[m].half_extents;
            acc[m].rotation += c * g[m].rotation;
            dloss_dw(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) +=
                d[m] / static_cast<double>(batch);
          }
        }
      } else {
        const auto best = static_cast<std::size_t>(
            std::min_element(d.begin(), d.end()) - d.begin());
        owner[n] = static_cast<int>(best);
        recons += d[best];
        if (grad) {
          const double c = 1.0 / static_cast<double>(batch);
          acc[best].t += c * g[best].t;
          acc[best].half_extents += c * g[best].half_extents;
          acc[best].rotation += c * g[best].rotation;
        }
      }
    }
    recons /= static_cast<double>(batch);

    if (!soft) {
      // Points outside the batch are assigned with a fresh face choice and
      // no normal offset.
      for (std::size_t n = 0; n < n_total; ++n) {
        if (owner[n] >= 0) continue;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < m_count; ++m) {
          const double d2 =
              config.projection == ProjectionMode::NormalSimilar
                  ? project_to_face(pc.points[n], pc.normals[n], frames[m],
                                    select_similar_face(frames[m], pc.normals[n]), 0.0)
                        .d2
                  : min_distance_point_to_cuboid(pc.points[n], frames[m]).d2;
          if (d2 < best_d2) {
            best_d2 = d2;
            owner[n] = static_cast<int>(m);
          }
        }
      }
      eval.assignment = one_hot(owner, M);
    }
  }

  eval.coverage = coverage(eval.assignment);
  eval.targets = existence_targets(eval.coverage, config.eps_ext);
  std::vector<double> delta(m_count);
  for (std::size_t m = 0; m < m_count; ++m) delta[m] = sigmoid(state.cuboids[m].delta_logit);
  eval.loss = total_loss(recons, compactness_loss(eval.coverage, config.eps_sps),
                         existence_loss(delta, eval.targets), config.lambda1,
                         config.lambda2);

  if (!grad) return eval;

  grad->cuboids.assign(m_count, CuboidGradient{});
  for (std::size_t m = 0; m < m_count; ++m) {
    CuboidGradient& out = grad->cuboids[m];
    out.t = acc[m].t;
    out.s_log = acc[m].half_extents.cwiseProduct(frames[m].half_extents);
    const auto jac = quat_to_rotmat_jacobian(state.cuboids[m].r);
    for (int j = 0; j < 4; ++j) out.r[j] = acc[m].rotation.cwiseProduct(jac[j]).sum();
    const double p = delta[m];
    const bool clamped = p < kExistenceClamp || p > 1.0 - kExistenceClamp;
    out.delta_logit = clamped ? 0.0
                              : config.lambda2 * (p - eval.targets[m]) /
                                    static_cast<double>(m_count);
  }

  grad->logits = Eigen::MatrixXd::Zero(M, N);
  if (config.variant == Variant::P2CSeg) {
    const Eigen::VectorXd dc = compactness_gradient(eval.coverage, config.eps_sps);
    dloss_dw.colwise() += config.lambda1 * dc / static_cast<double>(n_total);
    const Eigen::MatrixXd& w = eval.assignment.W;
    for (Eigen::Index n = 0; n < N; ++n) {
      const double mean = w.col(n).dot(dloss_dw.col(n));
      grad->logits.col(n) =
          w.col(n).cwiseProduct(dloss_dw.col(n) - Eigen::VectorXd::Constant(M, mean));
    }
  }
  return eval;
}

std::string nonfinite_component(const Gradients& g) {
  static constexpr const char* kNames[] = {"translation", "rotation", "scale",
                                           "existence logit"};
  for (std::size_t m = 0; m < g.cuboids.size(); ++m) {
    const CuboidGradient& c = g.cuboids[m];
    const bool bad[] = {!c.t.allFinite(), !c.r.allFinite(), !c.s_log.allFinite(),
                        !std::isfinite(c.delta_logit)};
    for (int k = 0; k < 4; ++k) {
      if (bad[k]) {
        return "cuboid " + std::to_string(m) + " " + kNames[k];
      }
    }
  }
  for (Eigen::Index n = 0; n < g.logits.cols(); ++n) {
    for (Eigen::Index m = 0; m < g.logits.rows(); ++m) {
      if (!std::isfinite(g.logits(m, n))) {
        return "assignment logit (" + std::to_string(m) + ", " + std::to_string(n) + ")";
      }
    }
  }
  return {};
}

}  // namespace

StepEvaluation evaluate_step(const FitState& state, const PointCloud& pc,
                             const FitConfig& config, const StepPlan& plan) {
  return forward(state, pc, config, plan, nullptr);
}

StepEvaluation compute_gradients(const FitState& state, const PointCloud& pc,
                                 const FitConfig& config, const StepPlan& plan,
                                 Gradients& gradients) {
  return forward(state, pc, config, plan, &gradients);
}

Gradients compute_gradients(const FitState& state, const PointCloud& pc,
                            const FitConfig& config, Rng& rng) {
  const StepPlan plan = plan_step(state, pc, config, rng);
  Gradients g;
  forward(state, pc, config, plan, &g);
  if (const std::string bad = nonfinite_component(g); !bad.empty()) {
    throw NumericalError("non-finite gradient for " + bad);
  }
  return g;
}

void adam_step(FitState& state, const Gradients& gradients,
               const FitConfig& config) {
  Eigen::VectorXd params = state.pack();
  const Eigen::VectorXd g = gradients.pack();
  if (state.first_moment.size() != params.size()) {
    state.first_moment = Eigen::VectorXd::Zero(params.size());
    state.second_moment = Eigen::VectorXd::Zero(params.size());
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.adam_beta1, t);
  const double c2 = 1.0 - std::pow(config.adam_beta2, t);
  const Eigen::Index geometric =
      static_cast<Eigen::Index>(state.cuboids.size()) * kCuboidParams;
  const Eigen::Index end =
      config.variant == Variant::P2CSeg ? params.size() : geometric;

  for (Eigen::Index i = 0; i < end; ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * g[i];
    v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * g[i] * g[i];
    const double lr = i < geometric ? config.lr : config.logit_lr;
    params[i] -= lr * (m / c1) / (std::sqrt(v / c2) + config.adam_eps);
  }
  state.unpack(params);
  for (std::size_t m = 0; m < state.cuboids.size(); ++m) {
    Quaternion& r = state.cuboids[m].r;
    const double n = r.norm();
    if (!std::isfinite(n) || n == 0.0) {
      throw NumericalError("cuboid " + std::to_string(m) + " rotation is not finite");
    }
    r = r.normalized();
  }
}

AbstractionResult summarize(const FitState& state, const PointCloud& pc,
                            const FitConfig& config, Rng& rng) {
  FitConfig final_config = config;
  final_config.sigma_s = 0.0;
  final_config.batch_points.reset();
  const StepPlan plan = plan_step(state, pc, final_config, rng);
  StepEvaluation eval = evaluate_step(state, pc, final_config, plan);

  AbstractionResult result;
  result.cuboids = state.cuboids;
  result.labels = hard_labels(eval.assignment);
  result.assignment = std::move(eval.assignment);
  result.coverage = std::move(eval.coverage);
  result.exists = std::move(eval.targets);
  result.active_count = static_cast<int>(
      std::count(result.exists.begin(), result.exists.end(), std::uint8_t{1}));
  result.final_loss = eval.loss;
  return result;
}

AbstractionResult fit(const PointCloud& pc, const FitConfig& config) {
  FitState state = init_fit(pc, config);
  Rng rng(config.seed);
  std::vector<LossBreakdown> trace;
  trace.reserve(static_cast<std::size_t>(config.steps));

  for (int step = 0; step < config.steps; ++step) {
    const StepPlan plan = plan_step(state, pc, config, rng);
    Gradients grad;
    const StepEvaluation eval = compute_gradients(state, pc, config, plan, grad);
    if (!std::isfinite(eval.loss.total)) {
      std::ostringstream msg;
      msg << "total loss became non-finite at step " << step << " (recons "
          << eval.loss.recons << ", compact " << eval.loss.compact << ", exist "
          << eval.loss.exist << ")";
      throw FitDiverged(msg.str(), state);
    }
    if (const std::string bad = nonfinite_component(grad); !bad.empty()) {
      throw FitDiverged("non-finite gradient for " + bad + " at step " +
                            std::to_string(step),
                        state);
    }
    trace.push_back(eval.loss);

    FitState next = state;
    try {
      adam_step(next, grad, config);
    } catch (const NumericalError& e) {
      throw FitDiverged(std::string(e.what()) + " after step " + std::to_string(step), state);
    }
    if (!next.pack().allFinite()) {
      throw FitDiverged("parameters became non-finite at step " + std::to_string(step),
                        state);
    }
    if (config.variant == Variant::ChamferDis) {
      next.sample_active = eval.targets;
      if (std::none_of(next.sample_active.begin(), next.sample_active.end(),
                       [](std::uint8_t f) { return f != 0; })) {
        Eigen::Index top = 0;
        eval.coverage.maxCoeff(&top);
        next.sample_active[static_cast<std::size_t>(top)] = 1;
      }
    }
    state = std::move(next);
  }

  AbstractionResult result = summarize(state, pc, config, rng);
  result.trace = std::move(trace);
  return result;
}

}  // namespace cuboidfit
