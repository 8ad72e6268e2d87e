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

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace cuboidfit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Rng = std::mt19937_64;

/// Rotation quaternion stored as (w, x, y, z).
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {}; }
  double norm() const;
  /// Throws InvalidInput for zero or non-finite quaternions.
  Quaternion normalized() const;
  Quaternion operator-() const { return {-w, -x, -y, -z}; }
  bool operator==(const Quaternion&) const = default;
};

/// Rotation matrix of q / |q|. Throws InvalidInput on non-finite or zero q.
Mat3 quat_to_rotmat(const Quaternion& q);

/// Derivatives of quat_to_rotmat with respect to the raw (unnormalized)
/// components w, x, y, z.
std::array<Mat3, 4> quat_to_rotmat_jacobian(const Quaternion& q);

/// Oriented box. `s_log` holds the log of the half-extents, so the box spans
/// [-exp(s_log_i), exp(s_log_i)] along local axis i.
struct Cuboid {
  Vec3 t = Vec3::Zero();
  Quaternion r;
  Vec3 s_log = Vec3::Zero();
  double delta_logit = 0.0;

  Vec3 half_extents() const { return s_log.array().exp().matrix(); }
  /// Existence probability sigmoid(delta_logit).
  double existence() const;
  Mat3 rotation() const { return quat_to_rotmat(r); }
  double surface_area() const;

  /// Flattened [t; r; s; delta] with s as half-extents and delta in (0, 1).
  std::array<double, 11> to_vector() const;
  static Cuboid from_vector(std::span<const double, 11> v);

  static Cuboid from_half_extents(const Vec3& t, const Quaternion& r,
                                  const Vec3& half_extents,
                                  double delta_logit = 0.0);
};

/// Rotation, translation and half-extents of a cuboid, precomputed once for
/// repeated point queries.
struct CuboidFrame {
  Mat3 rotation;
  Vec3 translation;
  Vec3 half_extents;

  explicit CuboidFrame(const Cuboid& c);
};

/// Face order is fixed: +x, -x, +y, -y, +z, -z. Ties always resolve to the
/// lowest index.
enum class FaceIndex : int { PosX = 0, NegX, PosY, NegY, PosZ, NegZ };

constexpr int face_axis(FaceIndex f) { return static_cast<int>(f) / 2; }
constexpr double face_sign(FaceIndex f) {
  return static_cast<int>(f) % 2 == 0 ? 1.0 : -1.0;
}

struct Face {
  FaceIndex index = FaceIndex::PosX;
  Vec3 world_normal;
  Vec3 world_center;
  std::array<Vec3, 2> tangent_axes;
  Eigen::Vector2d half_extents_2d;
};

std::array<Face, 6> cuboid_faces(const Cuboid& c);

struct FaceProjection {
  double d2 = 0.0;
  FaceIndex face = FaceIndex::PosX;
  Vec3 foot = Vec3::Zero();
};

/// Face whose outward normal has the largest dot product with `normal`.
FaceIndex select_similar_face(const CuboidFrame& frame, const Vec3& normal);

/// Projects p + eta * normal onto the rectangle of `face` and returns the
/// squared distance from the original p to that foot point.
FaceProjection project_to_face(const Vec3& p, const Vec3& normal,
                               const CuboidFrame& frame, FaceIndex face,
                               double eta);

/// Normal-similar point-to-cuboid distance. eta ~ N(0, sigma_s^2) is drawn
/// from `rng` only when sigma_s > 0.
FaceProjection point_to_cuboid_distance(const Vec3& p, const Vec3& normal,
                                        const Cuboid& c, double sigma_s,
                                        Rng& rng);

/// Closest point on the whole cuboid surface; interior points go to the
/// nearest face.
FaceProjection min_distance_point_to_cuboid(const Vec3& p, const Cuboid& c);
FaceProjection min_distance_point_to_cuboid(const Vec3& p,
                                            const CuboidFrame& frame);

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;
  FaceIndex face = FaceIndex::PosX;
  /// Local coordinates divided by the half-extents, in [-1, 1]^3, with the
  /// face axis at exactly +-1.
  Vec3 unit_local;
};

/// Area-uniform samples over the cuboid surface.
std::vector<SurfaceSample> sample_cuboid_surface(const Cuboid& c,
                                                 std::size_t k, Rng& rng);

/// Draws one sample on `face` of the given frame.
SurfaceSample sample_face(const CuboidFrame& frame, FaceIndex face, Rng& rng);

/// Face-area weights of a cuboid with the given half-extents, in face order.
std::array<double, 6> face_areas(const Vec3& half_extents);

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// 8 corners and 12 outward-wound triangles (two per face, in face order).
TriangleMesh cuboid_mesh(const Cuboid& c);

/// N points with unit normals and optional per-point part labels.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::optional<std::vector<int>> labels;

  std::size_t size() const { return points.size(); }
};

/// PCA normals from k nearest neighbours, flipped to point away from the
/// cloud centroid.
std::vector<Vec3> estimate_normals(std::span<const Vec3> points,
                                   std::size_t k);

/// Axis-aligned bounding-box diagonal length.
double bbox_diagonal(std::span<const Vec3> points);

}  // namespace cuboidfit
