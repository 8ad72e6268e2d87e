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

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "cuboidfit/error.hpp"
#include "cuboidfit/geometry.hpp"
#include "cuboidfit/kdtree.hpp"
#include "test_support.hpp"

using namespace cuboidfit;
using cuboidfit::testing::random_quaternion;
using cuboidfit::testing::random_unit;
using cuboidfit::testing::unit_cube;

namespace {

Cuboid random_cuboid(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> s(0.1, 0.8);
  return Cuboid::from_half_extents(Vec3(u(rng), u(rng), u(rng)),
                                   random_quaternion(rng),
                                   Vec3(s(rng), s(rng), s(rng)));
}

bool near(const Vec3& a, const Vec3& b, double tol = 1e-12) {
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

TEST_CASE("quaternion to rotation matrix") {
  CHECK(quat_to_rotmat(Quaternion::identity()).isApprox(Mat3::Identity(), 1e-15));

  Mat3 flip = Mat3::Zero();
  flip.diagonal() << -1, -1, 1;
  CHECK((quat_to_rotmat({0, 0, 0, 1}) - flip).cwiseAbs().maxCoeff() < 1e-15);

  const double h = std::sqrt(0.5);
  Mat3 quarter;
  quarter << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((quat_to_rotmat({h, 0, 0, h}) - quarter).cwiseAbs().maxCoeff() < 1e-15);

  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Quaternion q = random_quaternion(rng);
    CHECK(quat_to_rotmat(q) == quat_to_rotmat(-q));
    const Mat3 r = quat_to_rotmat(q);
    CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }

  CHECK_THROWS_AS(quat_to_rotmat({0, 0, 0, 0}), InvalidInput);
  CHECK_THROWS_AS(quat_to_rotmat({NAN, 0, 0, 1}), InvalidInput);
  CHECK_THROWS_AS(quat_to_rotmat({1, INFINITY, 0, 0}), InvalidInput);
}

TEST_CASE("rotation jacobian matches finite differences") {
  Rng rng(9);
  Quaternion q = random_quaternion(rng);
  q.w *= 1.7;
  q.x *= 1.7;
  q.y *= 1.7;
  q.z *= 1.7;
  const auto jac = quat_to_rotmat_jacobian(q);
  const double step = 1e-6;
  for (int k = 0; k < 4; ++k) {
    Quaternion up = q, down = q;
    double* u = k == 0 ? &up.w : k == 1 ? &up.x : k == 2 ? &up.y : &up.z;
    double* d = k == 0 ? &down.w : k == 1 ? &down.x : k == 2 ? &down.y : &down.z;
    *u += step;
    *d -= step;
    const Mat3 fd = (quat_to_rotmat(up) - quat_to_rotmat(down)) / (2 * step);
    CHECK((fd - jac[k]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("cuboid vector round trip and validation") {
  const Cuboid c = Cuboid::from_half_extents(Vec3(1, 2, 3), Quaternion{0, 1, 0, 0},
                                             Vec3(0.5, 0.25, 2.0), 0.3);
  const auto v = c.to_vector();
  CHECK(v[0] == 1.0);
  CHECK(v[4] == 1.0);
  CHECK(v[7] == doctest::Approx(0.5));
  CHECK(v[8] == doctest::Approx(0.25));
  CHECK(v[10] == doctest::Approx(1.0 / (1.0 + std::exp(-0.3))));
  const Cuboid back = Cuboid::from_vector(std::span<const double, 11>(v));
  CHECK(near(back.t, c.t));
  CHECK(near(back.half_extents(), c.half_extents(), 1e-14));
  CHECK(back.existence() == doctest::Approx(c.existence()).epsilon(1e-14));

  auto bad = v;
  bad[7] = 0.0;
  CHECK_THROWS_AS(Cuboid::from_vector(std::span<const double, 11>(bad)), InvalidInput);
  bad = v;
  bad[10] = 1.0;
  CHECK_THROWS_AS(Cuboid::from_vector(std::span<const double, 11>(bad)), InvalidInput);
  bad = v;
  bad[1] = NAN;
  CHECK_THROWS_AS(Cuboid::from_vector(std::span<const double, 11>(bad)), InvalidInput);
}

TEST_CASE("cuboid faces") {
  const auto faces = cuboid_faces(unit_cube());
  CHECK(near(faces[0].world_center, Vec3(0.5, 0, 0)));
  CHECK(near(faces[0].world_normal, Vec3(1, 0, 0)));
  CHECK(near(faces[5].world_center, Vec3(0, 0, -0.5)));
  CHECK(near(faces[5].world_normal, Vec3(0, 0, -1)));
  for (int i = 0; i < 6; ++i) CHECK(faces[i].index == static_cast<FaceIndex>(i));

  const double h = std::sqrt(0.5);
  const Cuboid turned = Cuboid::from_half_extents(Vec3::Zero(), {h, 0, 0, h},
                                                  Vec3::Constant(0.5));
  CHECK(near(cuboid_faces(turned)[0].world_normal, Vec3(0, 1, 0), 1e-15));
}

TEST_CASE("normal-similar distance examples") {
  Rng rng(1);
  const Cuboid cube = unit_cube();

  auto r = point_to_cuboid_distance(Vec3(1, 0, 0), Vec3(1, 0, 0), cube, 0.0, rng);
  CHECK(r.face == FaceIndex::PosX);
  CHECK(near(r.foot, Vec3(0.5, 0, 0)));
  CHECK(std::abs(r.d2 - 0.25) <= 1e-12);

  r = point_to_cuboid_distance(Vec3(0.5, 0, 0), Vec3(1, 0, 0), cube, 0.0, rng);
  CHECK(std::abs(r.d2) <= 1e-12);

  r = point_to_cuboid_distance(Vec3(0.8, 0.8, 0), Vec3(0, 1, 0), cube, 0.0, rng);
  CHECK(r.face == FaceIndex::PosY);
  CHECK(near(r.foot, Vec3(0.5, 0.5, 0)));
  CHECK(std::abs(r.d2 - 0.18) <= 1e-12);

  // Equal similarity to +x and +y goes to the lower index.
  const Vec3 diag = Vec3(1, 1, 0).normalized();
  CHECK(point_to_cuboid_distance(Vec3(1, 1, 0), diag, cube, 0.0, rng).face ==
        FaceIndex::PosX);

  CHECK_THROWS_AS(point_to_cuboid_distance(Vec3::Zero(), diag, cube, -1.0, rng),
                  InvalidInput);
}

TEST_CASE("min-distance examples") {
  const Cuboid cube = unit_cube();
  auto r = min_distance_point_to_cuboid(Vec3(1, 0, 0), cube);
  CHECK(std::abs(r.d2 - 0.25) <= 1e-12);

  r = min_distance_point_to_cuboid(Vec3(0, 0, 0), cube);
  CHECK(std::abs(r.d2 - 0.25) <= 1e-12);
  CHECK(r.face == FaceIndex::PosX);

  r = min_distance_point_to_cuboid(Vec3(0.6, 0.6, 0.6), cube);
  CHECK(near(r.foot, Vec3(0.5, 0.5, 0.5)));
  CHECK(std::abs(r.d2 - 0.03) <= 1e-12);
}

TEST_CASE("sampled normal offset matches a quadrature oracle") {
  // Tilted normal so the clamped foot depends on the sampled offset.
  const Vec3 p(0.7, 0.45, 0.1);
  const Vec3 n = Vec3(0.8, 0.6, 0.0);
  const double sigma = 0.05;
  const Cuboid cube = unit_cube();

  auto d2_of = [&](double eta) {
    const double y = std::clamp(p.y() + eta * n.y(), -0.5, 0.5);
    const double z = std::clamp(p.z() + eta * n.z(), -0.5, 0.5);
    return (Vec3(0.5, y, z) - p).squaredNorm();
  };
  double expected = 0.0, expected_sq = 0.0;
  const int steps = 200000;
  const double lo = -10 * sigma, dx = 20 * sigma / steps;
  for (int i = 0; i < steps; ++i) {
    const double eta = lo + (i + 0.5) * dx;
    const double w = std::exp(-0.5 * eta * eta / (sigma * sigma)) /
                     (sigma * std::sqrt(2 * std::numbers::pi)) * dx;
    expected += w * d2_of(eta);
    expected_sq += w * d2_of(eta) * d2_of(eta);
  }
  const double sd = std::sqrt(expected_sq - expected * expected);

  Rng rng(2024);
  const int draws = 100000;
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto r = point_to_cuboid_distance(p, n, cube, sigma, rng);
    CHECK_EQ(r.face, FaceIndex::PosX);
    sum += r.d2;
  }
  CHECK(std::abs(sum / draws - expected) < 4 * sd / std::sqrt(double(draws)));

  // On the matching face the clamp absorbs the offset completely.
  Rng rng2(5);
  double on_face = 0.0;
  for (int i = 0; i < 1000; ++i) {
    on_face += point_to_cuboid_distance(Vec3(0.5, 0, 0), Vec3(1, 0, 0), cube,
                                        sigma, rng2).d2;
  }
  CHECK(on_face == 0.0);
}

TEST_CASE("distance properties on random instances") {
  Rng rng(77);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Cuboid c = random_cuboid(rng);
    const Vec3 p(u(rng), u(rng), u(rng));
    const Vec3 n = random_unit(rng);

    const double similar = point_to_cuboid_distance(p, n, c, 0.0, rng).d2;
    const double nearest = min_distance_point_to_cuboid(p, c).d2;
    CHECK(similar >= nearest - 1e-12);

    // Rigid motion applied to everything leaves the distance unchanged.
    const Quaternion q = random_quaternion(rng);
    const Mat3 rot = quat_to_rotmat(q);
    const Vec3 shift(u(rng), u(rng), u(rng));
    Cuboid moved = c;
    moved.t = rot * c.t + shift;
    const Mat3 composed = rot * c.rotation();
    const Eigen::Quaterniond eq(composed);
    moved.r = {eq.w(), eq.x(), eq.y(), eq.z()};
    const double moved_d2 =
        point_to_cuboid_distance(rot * p + shift, rot * n, moved, 0.0, rng).d2;
    CHECK(std::abs(moved_d2 - similar) < 1e-9);
  }
}

TEST_CASE("zero distance exactly on the selected face") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Cuboid c = random_cuboid(rng);
    const CuboidFrame frame(c);
    const auto face = static_cast<FaceIndex>(trial % 6);
    const SurfaceSample s = sample_face(frame, face, rng);
    CHECK(point_to_cuboid_distance(s.point, s.normal, c, 0.0, rng).d2 < 1e-24);

    // Pushing the point off the face along its normal makes it positive.
    const Vec3 off = s.point + 0.01 * s.normal;
    CHECK(point_to_cuboid_distance(off, s.normal, c, 0.0, rng).d2 > 0.0);
  }
  // Boundary inclusive: a corner of the +x face.
  Rng r(0);
  CHECK(point_to_cuboid_distance(Vec3(0.5, 0.5, -0.5), Vec3(1, 0, 0), unit_cube(),
                                 0.0, r).d2 == 0.0);
}

TEST_CASE("surface sampling follows face areas") {
  Rng rng(11);
  const std::size_t k = 600000;
  std::array<double, 6> counts{};
  for (const SurfaceSample& s : sample_cuboid_surface(unit_cube(), k, rng)) {
    counts[static_cast<int>(s.face)] += 1;
  }
  const double sigma = std::sqrt(k * (1.0 / 6.0) * (5.0 / 6.0));
  for (double c : counts) CHECK(std::abs(c - 100000.0) < 3 * sigma);

  // Chi-square goodness of fit on an uneven box, 5 degrees of freedom.
  const Cuboid box = Cuboid::from_half_extents(Vec3(0.3, -0.2, 1.0),
                                               random_quaternion(rng),
                                               Vec3(0.7, 0.2, 0.4));
  const auto areas = face_areas(box.half_extents());
  double total_area = 0.0;
  for (double a : areas) total_area += a;
  CHECK(total_area == doctest::Approx(box.surface_area()).epsilon(1e-12));
  std::array<double, 6> hist{};
  const std::size_t k2 = 100000;
  for (const SurfaceSample& s : sample_cuboid_surface(box, k2, rng)) {
    hist[static_cast<int>(s.face)] += 1;
    CHECK(min_distance_point_to_cuboid(s.point, box).d2 < 1e-20);
    CHECK(near(s.normal, cuboid_faces(box)[static_cast<int>(s.face)].world_normal, 1e-12));
  }
  double chi2 = 0.0;
  for (int f = 0; f < 6; ++f) {
    const double e = k2 * areas[f] / total_area;
    chi2 += (hist[f] - e) * (hist[f] - e) / e;
  }
  CHECK(chi2 < 20.515);

  const Cuboid thin = Cuboid::from_half_extents(Vec3::Zero(), Quaternion::identity(),
                                                Vec3(0.5, 0.5, 1e-4));
  int on_z = 0;
  for (const SurfaceSample& s : sample_cuboid_surface(thin, k2, rng)) {
    on_z += face_axis(s.face) == 2;
  }
  const double ratio = 2.0 / (2.0 + 4 * 2e-4);
  const double sd = std::sqrt(k2 * ratio * (1 - ratio));
  CHECK(std::abs(on_z - k2 * ratio) < 3 * sd + 1);

  Rng a(42), b(42);
  const auto sa = sample_cuboid_surface(box, 1, a);
  const auto sb = sample_cuboid_surface(box, 1, b);
  CHECK(sa[0].point == sb[0].point);
  CHECK_THROWS_AS(sample_cuboid_surface(box, 0, a), InvalidInput);
}

TEST_CASE("cuboid mesh") {
  const TriangleMesh mesh = cuboid_mesh(unit_cube());
  REQUIRE(mesh.vertices.size() == 8);
  REQUIRE(mesh.triangles.size() == 12);
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      for (int sz : {-1, 1}) {
        const Vec3 v(0.5 * sx, 0.5 * sy, 0.5 * sz);
        CHECK(std::any_of(mesh.vertices.begin(), mesh.vertices.end(),
                          [&](const Vec3& m) { return near(m, v); }));
      }
    }
  }

  Cuboid shifted = unit_cube();
  shifted.t = Vec3(1, 0, 0);
  const TriangleMesh moved = cuboid_mesh(shifted);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(near(moved.vertices[i], mesh.vertices[i] + Vec3(1, 0, 0)));
  }

  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Cuboid c = random_cuboid(rng);
    const TriangleMesh m = cuboid_mesh(c);
    const auto faces = cuboid_faces(c);
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
      const auto& tri = m.triangles[t];
      const Vec3 normal = (m.vertices[tri[1]] - m.vertices[tri[0]])
                              .cross(m.vertices[tri[2]] - m.vertices[tri[0]]);
      CHECK(normal.dot(faces[t / 2].world_normal) > 0);
    }
  }
}

TEST_CASE("normal estimation") {
  std::vector<Vec3> plane;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) plane.emplace_back(0.1 * i, 0.1 * j, 0.0);
  }
  for (const Vec3& n : estimate_normals(plane, 8)) {
    CHECK(std::abs(std::abs(n.z()) - 1.0) < 1e-12);
  }

  const std::vector<Vec3> four{{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
  for (const Vec3& n : estimate_normals(four, 3)) {
    CHECK(std::abs(std::abs(n.z()) - 1.0) < 1e-12);
  }

  Rng rng(6);
  std::vector<Vec3> sphere;
  for (int i = 0; i < 2000; ++i) sphere.push_back(random_unit(rng));
  const auto normals = estimate_normals(sphere, 8);
  double mean_angle = 0.0;
  for (std::size_t i = 0; i < sphere.size(); ++i) {
    mean_angle += std::acos(std::clamp(normals[i].dot(sphere[i]), -1.0, 1.0));
  }
  mean_angle = mean_angle / sphere.size() * 180.0 / std::numbers::pi;
  CHECK(mean_angle < 5.0);

  // Collinear neighbors fall back to the outward direction.
  std::vector<Vec3> line;
  for (int i = 0; i < 6; ++i) line.emplace_back(i - 2.5, 0.0, 0.0);
  const auto fallback = estimate_normals(line, 3);
  CHECK(near(fallback[0], Vec3(-1, 0, 0)));
  CHECK(near(fallback[5], Vec3(1, 0, 0)));

  CHECK_THROWS_AS(estimate_normals(four, 4), InvalidInput);
  CHECK_THROWS_AS(estimate_normals(plane, 2), InvalidInput);
}

TEST_CASE("bounding box diagonal") {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 2, 2}, {0.5, 0.5, 0.5}};
  CHECK(bbox_diagonal(pts) == doctest::Approx(3.0));
}

TEST_CASE("kd-tree agrees with exhaustive search") {
  Rng rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 500; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  // Duplicates exercise the lowest-index tie rule.
  pts.push_back(pts[17]);
  pts.push_back(pts[3]);
  const KdTree tree(pts);
  CHECK(tree.size() == pts.size());
  for (int q = 0; q < 300; ++q) {
    const Vec3 query = q < 2 ? pts[q == 0 ? 17 : 3] : Vec3(u(rng), u(rng), u(rng));
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      all.emplace_back((pts[i] - query).squaredNorm(), i);
    }
    std::sort(all.begin(), all.end());
    const auto [idx, d2] = tree.nearest(query);
    CHECK(idx == all[0].second);
    CHECK(d2 == all[0].first);
    const auto knn = tree.k_nearest(query, 7);
    REQUIRE(knn.size() == 7);
    for (int j = 0; j < 7; ++j) CHECK(knn[j] == all[j].second);
  }
}
