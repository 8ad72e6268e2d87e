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
#include <cmath>
#include <limits>
#include <numeric>

#include "cuboidfit/assignment.hpp"
#include "cuboidfit/error.hpp"
#include "cuboidfit/losses.hpp"
#include "test_support.hpp"

using namespace cuboidfit;
using cuboidfit::testing::random_cloud;
using cuboidfit::testing::random_quaternion;
using cuboidfit::testing::unit_cube;

namespace {

PointCloud single_point(const Vec3& p, const Vec3& n) {
  PointCloud pc;
  pc.points.push_back(p);
  pc.normals.push_back(n);
  return pc;
}

double brute_chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  auto directed = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double sum = 0.0;
    for (const Vec3& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to) best = std::min(best, (p - q).squaredNorm());
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  return directed(a, b) + directed(b, a);
}

std::vector<Vec3> random_points(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(u(rng), u(rng), u(rng));
  return out;
}

/// Gradient projected onto the tangent space of the probability simplex.
Eigen::VectorXd project_to_simplex_tangent(const Eigen::VectorXd& g) {
  return (g.array() - g.mean()).matrix();
}

}  // namespace

TEST_CASE("reconstruction loss examples") {
  Rng rng(0);
  const std::vector<Cuboid> cube{unit_cube()};
  const AssignmentMatrix one{Eigen::MatrixXd::Ones(1, 1)};

  CHECK(reconstruction_loss(single_point(Vec3(0.5, 0.1, 0), Vec3(1, 0, 0)), cube, one,
                            0.0, {}, rng) == 0.0);
  CHECK(reconstruction_loss(single_point(Vec3(1, 0, 0), Vec3(1, 0, 0)), cube, one, 0.0,
                            {}, rng) == doctest::Approx(0.25).epsilon(1e-14));

  const std::vector<Cuboid> pair{unit_cube(),
                                 Cuboid::from_half_extents(Vec3(0.5, 0, 0),
                                                           Quaternion::identity(),
                                                           Vec3::Constant(0.5))};
  const AssignmentMatrix half{Eigen::MatrixXd::Constant(2, 1, 0.5)};
  CHECK(reconstruction_loss(single_point(Vec3(1, 0, 0), Vec3(1, 0, 0)), pair, half, 0.0,
                            {}, rng) == doctest::Approx(0.125).epsilon(1e-14));

  ReconstructionOptions hard;
  hard.hard_assignment = true;
  CHECK(reconstruction_loss(single_point(Vec3(1, 0, 0), Vec3(1, 0, 0)), pair, half, 0.0,
                            hard, rng) == 0.0);

  ReconstructionOptions nearest;
  nearest.projection = ProjectionMode::MinDistance;
  // The point sits inside the cube facing -x; the closest face is +y at 0.1.
  CHECK(reconstruction_loss(single_point(Vec3(0.3, 0.4, 0), Vec3(-1, 0, 0)), cube, one,
                            0.0, nearest, rng) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(reconstruction_loss(single_point(Vec3(0.3, 0.4, 0), Vec3(-1, 0, 0)), cube, one,
                            0.0, {}, rng) == doctest::Approx(0.64).epsilon(1e-12));

  CHECK_THROWS_AS(reconstruction_loss(single_point(Vec3::Zero(), Vec3(1, 0, 0)), {}, one,
                                      0.0, {}, rng),
                  InvalidConfig);
  CHECK_THROWS_AS(reconstruction_loss(single_point(Vec3::Zero(), Vec3(1, 0, 0)), cube,
                                      half, 0.0, {}, rng),
                  InvalidInput);
}

TEST_CASE("reconstruction loss is invariant to cuboid order") {
  Rng rng(21);
  const PointCloud pc = random_cloud(40, rng);
  std::vector<Cuboid> cuboids;
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int m = 0; m < 4; ++m) {
    cuboids.push_back(Cuboid::from_half_extents(Vec3(u(rng), u(rng), u(rng)),
                                                random_quaternion(rng),
                                                Vec3(0.2, 0.3, 0.1)));
  }
  std::normal_distribution<double> g;
  Eigen::MatrixXd logits(4, 40);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = g(rng);
  const AssignmentMatrix w = softmax_columns({logits});

  const std::vector<int> perm{2, 0, 3, 1};
  std::vector<Cuboid> permuted;
  AssignmentMatrix pw{Eigen::MatrixXd(4, 40)};
  for (int m = 0; m < 4; ++m) {
    permuted.push_back(cuboids[perm[m]]);
    pw.W.row(m) = w.W.row(perm[m]);
  }
  for (double sigma : {0.0, 0.05}) {
    Rng a(9), b(9);
    const double base = reconstruction_loss(pc, cuboids, w, sigma, {}, a);
    const double moved = reconstruction_loss(pc, permuted, pw, sigma, {}, b);
    CHECK(moved == doctest::Approx(base).epsilon(1e-13));
  }
}

TEST_CASE("compactness loss examples") {
  CHECK(compactness_loss(Eigen::VectorXd::Constant(4, 0.25), 0.01) ==
        doctest::Approx(4.16).epsilon(1e-14));
  CHECK(compactness_loss(Eigen::Vector4d(1, 0, 0, 0), 0.01) ==
        doctest::Approx(std::pow(std::sqrt(1.01) + 0.3, 2)).epsilon(1e-14));
  CHECK(compactness_loss(Eigen::Vector4d(1, 0, 0, 0), 0.01) ==
        doctest::Approx(1.70299).epsilon(1e-5));
  CHECK(compactness_loss(Eigen::VectorXd::Ones(1), 0.01) ==
        doctest::Approx(1.01).epsilon(1e-14));
  CHECK_THROWS_AS(compactness_loss(Eigen::Vector2d(0.5, 0.6), 0.01), InvalidInput);

  for (int m = 2; m <= 32; ++m) {
    Eigen::VectorXd hot = Eigen::VectorXd::Zero(m);
    hot[0] = 1.0;
    CHECK(compactness_loss(hot, 0.01) < compactness_loss(Eigen::VectorXd::Constant(m, 1.0 / m), 0.01));
  }
}

TEST_CASE("compactness gradient matches finite differences") {
  const Eigen::Vector3d w(0.2, 0.5, 0.3);
  const Eigen::VectorXd g = compactness_gradient(w, 0.01);
  auto raw = [](const Eigen::VectorXd& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::sqrt(v[i] + 0.01);
    return s * s;
  };
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd up = w, down = w;
    up[i] += 1e-6;
    down[i] -= 1e-6;
    CHECK(g[i] == doctest::Approx((raw(up) - raw(down)) / 2e-6).epsilon(1e-7));
  }
}

TEST_CASE("sparsity of norms on the simplex") {
  // L1 has no component along the simplex.
  CHECK(project_to_simplex_tangent(Eigen::Vector2d(1, 1)).norm() == 0.0);

  for (double a : {0.05, 0.2, 0.35, 0.45, 0.55, 0.7, 0.9}) {
    const Eigen::Vector2d w(a, 1 - a);
    const int larger = a > 0.5 ? 0 : 1;

    // Descent along the square-root norm moves toward the nearer vertex.
    const Eigen::VectorXd half = project_to_simplex_tangent(compactness_gradient(w, 0.01));
    CHECK(half.norm() > 0.0);
    CHECK(-half[larger] > 0.0);

    // Descent along the squared norm moves toward the uniform point.
    const Eigen::VectorXd sq = project_to_simplex_tangent(2.0 * w);
    CHECK(-sq[larger] < 0.0);
    const Eigen::Vector2d towards_center = Eigen::Vector2d(0.5, 0.5) - w;
    CHECK((-sq).normalized().dot(towards_center.normalized()) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("existence loss") {
  const std::vector<double> exact{0.0, 1.0, 1.0};
  const std::vector<std::uint8_t> targets{0, 1, 1};
  CHECK(existence_loss(exact, targets) < 1e-6);

  const std::vector<double> half{0.5};
  const std::vector<std::uint8_t> yes{1};
  CHECK(existence_loss(half, yes) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  const std::vector<double> halves{0.5, 0.5};
  const std::vector<std::uint8_t> mixed{1, 0};
  CHECK(existence_loss(halves, mixed) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  const std::vector<double> wrong{0.0};
  CHECK(existence_loss(wrong, yes) == doctest::Approx(-std::log(kExistenceClamp)));
  CHECK_THROWS_AS(existence_loss(halves, yes), InvalidInput);
}

TEST_CASE("chamfer distance") {
  Rng rng(13);
  const auto a = random_points(50, rng);
  CHECK(chamfer_distance(a, a) == 0.0);

  const std::vector<Vec3> origin{Vec3::Zero()};
  const std::vector<Vec3> unit_x{Vec3(1, 0, 0)};
  CHECK(chamfer_distance(origin, unit_x) == 2.0);

  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_points(50, rng);
    const auto y = random_points(37, rng);
    CHECK(chamfer_distance(x, y) == brute_chamfer(x, y));
    CHECK(chamfer_distance(x, y) == chamfer_distance(y, x));
  }
  CHECK_THROWS_AS(chamfer_distance(std::vector<Vec3>{}, a), InvalidInput);
  CHECK_THROWS_AS(chamfer_distance(a, std::vector<Vec3>{}), InvalidInput);
}

TEST_CASE("total loss") {
  const LossBreakdown l = total_loss(1, 2, 3, 0.1, 0.01);
  CHECK(l.total == doctest::Approx(1.23).epsilon(1e-15));
  CHECK(l.recons == 1.0);
  CHECK(l.compact == 2.0);
  CHECK(l.exist == 3.0);
  CHECK(total_loss(1, 2, 3, 0, 0).total == 1.0);
  CHECK_THROWS_AS(total_loss(1, 2, 3, -0.1, 0.01), InvalidConfig);
  CHECK_THROWS_AS(total_loss(1, 2, 3, 0.1, -0.01), InvalidConfig);
}
