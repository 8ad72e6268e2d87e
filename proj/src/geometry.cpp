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

#include "cuboidfit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "cuboidfit/error.hpp"
#include "cuboidfit/kdtree.hpp"

namespace cuboidfit {

double Quaternion::norm() const {
  return std::sqrt(w * w + x * x + y * y + z * z);
}

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw InvalidInput("quaternion must be finite and non-zero");
  }
  return {w / n, x / n, y / n, z / n};
}

Mat3 quat_to_rotmat(const Quaternion& q) {
  const Quaternion u = q.normalized();
  const double w = u.w, x = u.x, y = u.y, z = u.z;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

std::array<Mat3, 4> quat_to_rotmat_jacobian(const Quaternion& q) {
  const double n = q.norm();
  const Quaternion u = q.normalized();
  const double w = u.w, x = u.x, y = u.y, z = u.z;

  // Derivatives with respect to the unit quaternion.
  std::array<Mat3, 4> unit;
  unit[0] << 0, -2 * z, 2 * y, 2 * z, 0, -2 * x, -2 * y, 2 * x, 0;
  unit[1] << 0, 2 * y, 2 * z, 2 * y, -4 * x, -2 * w, 2 * z, 2 * w, -4 * x;
  unit[2] << -4 * y, 2 * x, 2 * w, 2 * x, 0, 2 * z, -2 * w, 2 * z, -4 * y;
  unit[3] << -4 * z, -2 * w, 2 * x, 2 * w, -4 * z, 2 * y, 2 * x, 2 * y, 0;

  // Chain through u = q / |q|: du_k/dq_j = (delta_kj - u_k u_j) / |q|.
  const std::array<double, 4> uc{w, x, y, z};
  std::array<Mat3, 4> out;
  for (int j = 0; j < 4; ++j) {
    out[j] = Mat3::Zero();
    for (int k = 0; k < 4; ++k) {
      const double dk = ((k == j ? 1.0 : 0.0) - uc[k] * uc[j]) / n;
      out[j] += dk * unit[k];
    }
  }
  return out;
}

double Cuboid::existence() const {
  return 1.0 / (1.0 + std::exp(-delta_logit));
}

double Cuboid::surface_area() const {
  const Vec3 h = half_extents();
  return 8.0 * (h.y() * h.z() + h.x() * h.z() + h.x() * h.y());
}

std::array<double, 11> Cuboid::to_vector() const {
  const Vec3 h = half_extents();
  return {t.x(), t.y(), t.z(), r.w,  r.x,        r.y,
          r.z,   h.x(), h.y(), h.z(), existence()};
}

Cuboid Cuboid::from_vector(std::span<const double, 11> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidInput("cuboid vector is not finite");
  }
  if (v[7] <= 0 || v[8] <= 0 || v[9] <= 0) {
    throw InvalidInput("cuboid half-extents must be positive");
  }
  if (v[10] <= 0 || v[10] >= 1) {
    throw InvalidInput("cuboid existence must lie in (0, 1)");
  }
  Cuboid c;
  c.t = Vec3(v[0], v[1], v[2]);
  c.r = Quaternion{v[3], v[4], v[5], v[6]};
  c.s_log = Vec3(std::log(v[7]), std::log(v[8]), std::log(v[9]));
  c.delta_logit = std::log(v[10] / (1.0 - v[10]));
  return c;
}

Cuboid Cuboid::from_half_extents(const Vec3& t, const Quaternion& r,
                                 const Vec3& half_extents,
                                 double delta_logit) {
  if ((half_extents.array() <= 0).any()) {
    throw InvalidInput("cuboid half-extents must be positive");
  }
  Cuboid c;
  c.t = t;
  c.r = r;
  c.s_log = half_extents.array().log().matrix();
  c.delta_logit = delta_logit;
  return c;
}

CuboidFrame::CuboidFrame(const Cuboid& c)
    : rotation(c.rotation()), translation(c.t), half_extents(c.half_extents()) {}

namespace {

Face make_face(const CuboidFrame& frame, FaceIndex index) {
  const int a = face_axis(index);
  const int u = (a + 1) % 3;
  const int v = (a + 2) % 3;
  const double sign = face_sign(index);
  Face f;
  f.index = index;
  f.world_normal = sign * frame.rotation.col(a);
  f.world_center =
      frame.translation + sign * frame.half_extents[a] * frame.rotation.col(a);
  f.tangent_axes = {frame.rotation.col(u), frame.rotation.col(v)};
  f.half_extents_2d = Eigen::Vector2d(frame.half_extents[u], frame.half_extents[v]);
  return f;
}

}  // namespace

std::array<Face, 6> cuboid_faces(const Cuboid& c) {
  const CuboidFrame frame(c);
  std::array<Face, 6> faces;
  for (int i = 0; i < 6; ++i) faces[i] = make_face(frame, static_cast<FaceIndex>(i));
  return faces;
}

FaceIndex select_similar_face(const CuboidFrame& frame, const Vec3& normal) {
  const Vec3 local = frame.rotation.transpose() * normal;
  int best = 0;
  double best_score = local[0];
  for (int i = 1; i < 6; ++i) {
    const auto f = static_cast<FaceIndex>(i);
    const double score = face_sign(f) * local[face_axis(f)];
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return static_cast<FaceIndex>(best);
}

FaceProjection project_to_face(const Vec3& p, const Vec3& normal,
                               const CuboidFrame& frame, FaceIndex face,
                               double eta) {
  const Mat3& r = frame.rotation;
  const Vec3& h = frame.half_extents;
  const int a = face_axis(face);
  Vec3 local = r.transpose() * (p + eta * normal - frame.translation);
  for (int k = 0; k < 3; ++k) {
    local[k] = k == a ? face_sign(face) * h[k] : std::clamp(local[k], -h[k], h[k]);
  }
  FaceProjection out;
  out.face = face;
  out.foot = frame.translation + r * local;
  out.d2 = (out.foot - p).squaredNorm();
  return out;
}

FaceProjection point_to_cuboid_distance(const Vec3& p, const Vec3& normal,
                                        const Cuboid& c, double sigma_s,
                                        Rng& rng) {
  if (sigma_s < 0) throw InvalidInput("sigma_s must be non-negative");
  double eta = 0.0;
  if (sigma_s > 0) eta = std::normal_distribution<double>(0.0, sigma_s)(rng);
  const CuboidFrame frame(c);
  return project_to_face(p, normal, frame, select_similar_face(frame, normal), eta);
}

FaceProjection min_distance_point_to_cuboid(const Vec3& p,
                                            const CuboidFrame& frame) {
  FaceProjection best;
  best.d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 6; ++i) {
    FaceProjection cand =
        project_to_face(p, Vec3::Zero(), frame, static_cast<FaceIndex>(i), 0.0);
    if (cand.d2 < best.d2) best = cand;
  }
  return best;
}

FaceProjection min_distance_point_to_cuboid(const Vec3& p, const Cuboid& c) {
  return min_distance_point_to_cuboid(p, CuboidFrame(c));
}

std::array<double, 6> face_areas(const Vec3& h) {
  const double ax = 4.0 * h.y() * h.z();
  const double ay = 4.0 * h.x() * h.z();
  const double az = 4.0 * h.x() * h.y();
  return {ax, ax, ay, ay, az, az};
}

SurfaceSample sample_face(const CuboidFrame& frame, FaceIndex face, Rng& rng) {
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const int a = face_axis(face);
  SurfaceSample s;
  s.face = face;
  for (int k = 0; k < 3; ++k) {
    s.unit_local[k] = k == a ? face_sign(face) : uniform(rng);
  }
  s.point = frame.translation +
            frame.rotation * s.unit_local.cwiseProduct(frame.half_extents);
  s.normal = face_sign(face) * frame.rotation.col(a);
  return s;
}

std::vector<SurfaceSample> sample_cuboid_surface(const Cuboid& c,
                                                 std::size_t k, Rng& rng) {
  if (k == 0) throw InvalidInput("sample count must be at least 1");
  const CuboidFrame frame(c);
  const auto areas = face_areas(frame.half_extents);
  std::discrete_distribution<int> pick(areas.begin(), areas.end());
  std::vector<SurfaceSample> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back(sample_face(frame, static_cast<FaceIndex>(pick(rng)), rng));
  }
  return out;
}

TriangleMesh cuboid_mesh(const Cuboid& c) {
  const CuboidFrame frame(c);
  TriangleMesh mesh;
  // Vertex bit i set <=> positive coordinate along local axis i.
  for (int v = 0; v < 8; ++v) {
    Vec3 local;
    for (int k = 0; k < 3; ++k) {
      local[k] = ((v >> k) & 1 ? 1.0 : -1.0) * frame.half_extents[k];
    }
    mesh.vertices.push_back(frame.translation + frame.rotation * local);
  }
  for (int f = 0; f < 6; ++f) {
    const auto face = static_cast<FaceIndex>(f);
    const int a = face_axis(face);
    const int u = (a + 1) % 3;
    const int v = (a + 2) % 3;
    const int abit = face_sign(face) > 0 ? (1 << a) : 0;
    // Counter-clockwise around +e_a in the (u, v) plane.
    const std::array<int, 4> quad{abit, abit | (1 << u), abit | (1 << u) | (1 << v),
                                  abit | (1 << v)};
    if (face_sign(face) > 0) {
      mesh.triangles.push_back({quad[0], quad[1], quad[2]});
      mesh.triangles.push_back({quad[0], quad[2], quad[3]});
    } else {
      mesh.triangles.push_back({quad[0], quad[2], quad[1]});
      mesh.triangles.push_back({quad[0], quad[3], quad[2]});
    }
  }
  return mesh;
}

double bbox_diagonal(std::span<const Vec3> points) {
  if (points.empty()) return 0.0;
  Vec3 lo = points[0];
  Vec3 hi = points[0];
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

std::vector<Vec3> estimate_normals(std::span<const Vec3> points, std::size_t k) {
  if (k < 3 || points.size() <= k) {
    throw InvalidInput("normal estimation needs N > k >= 3");
  }
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  const KdTree tree(points);
  std::vector<Vec3> normals(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nbrs = tree.k_nearest(points[i], k);
    Vec3 mean = Vec3::Zero();
    for (std::size_t j : nbrs) mean += points[j];
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (std::size_t j : nbrs) {
      const Vec3 d = points[j] - mean;
      cov += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 values = eig.eigenvalues();
    const Vec3 outward = points[i] - centroid;
    Vec3 n;
    // A covariance of rank < 2 does not determine a plane.
    if (values[1] <= 1e-12 * std::max(values[2], 1e-300)) {
      n = outward.norm() > 0 ? outward.normalized() : Vec3::UnitZ();
    } else {
      n = eig.eigenvectors().col(0).normalized();
    }
    if (n.dot(outward) < 0) n = -n;
    normals[i] = n;
  }
  return normals;
}

}  // namespace cuboidfit
