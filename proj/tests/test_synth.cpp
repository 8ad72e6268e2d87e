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

#include <array>
#include <cmath>

#include "cuboidfit/error.hpp"
#include "cuboidfit/synth.hpp"

using namespace cuboidfit;

TEST_CASE("single cuboid points lie on its surface") {
  const SynthShape shape = synth_shape(ShapeKind::Cuboid, {}, 2048, 0.0, 1);
  REQUIRE(shape.parts.size() == 1);
  REQUIRE(shape.cloud.size() == 2048);
  Rng rng(0);
  for (std::size_t i = 0; i < shape.cloud.size(); ++i) {
    const auto r = point_to_cuboid_distance(shape.cloud.points[i], shape.cloud.normals[i],
                                            shape.parts[0], 0.0, rng);
    CHECK(r.d2 < 1e-24);
  }
}

TEST_CASE("table part frequencies follow areas") {
  const std::size_t n = 20000;
  const SynthShape shape = synth_shape(ShapeKind::Table, {}, n, 0.0, 5);
  REQUIRE(shape.parts.size() == 5);
  REQUIRE(shape.cloud.labels);
  std::array<double, 5> hist{};
  for (int label : *shape.cloud.labels) hist.at(label) += 1;
  double total = 0.0;
  for (const Cuboid& c : shape.parts) total += c.surface_area();
  for (int k = 0; k < 5; ++k) {
    const double p = shape.parts[k].surface_area() / total;
    CHECK(std::abs(hist[k] - n * p) < 3 * std::sqrt(n * p * (1 - p)));
  }

  // Legs do not touch the top.
  const double top_bottom = shape.parts[0].t.z() - shape.parts[0].half_extents().z();
  for (int k = 1; k < 5; ++k) {
    CHECK(shape.parts[k].t.z() + shape.parts[k].half_extents().z() < top_bottom - 0.1);
  }
}

TEST_CASE("noise levels and determinism") {
  for (double sigma : {0.0, 0.01, 0.02, 0.03}) {
    const SynthShape a = synth_shape(ShapeKind::Chair, {}, 300, sigma, 9);
    const SynthShape b = synth_shape(ShapeKind::Chair, {}, 300, sigma, 9);
    CHECK(a.cloud.points == b.cloud.points);
    CHECK(a.cloud.normals == b.cloud.normals);
    CHECK(a.cloud.labels == b.cloud.labels);
  }
  const SynthShape clean = synth_shape(ShapeKind::Stack, {}, 4000, 0.0, 3);
  const SynthShape noisy = synth_shape(ShapeKind::Stack, {}, 4000, 0.02, 3);
  double sq = 0.0;
  for (std::size_t i = 0; i < noisy.cloud.size(); ++i) {
    sq += min_distance_point_to_cuboid(noisy.cloud.points[i],
                                       noisy.parts[(*noisy.cloud.labels)[i]]).d2;
  }
  // Mostly off-surface displacement; well above zero and below the full variance.
  CHECK(sq / noisy.cloud.size() > 0.0);
  CHECK(sq / noisy.cloud.size() < 3 * 0.02 * 0.02);
  CHECK(clean.cloud.size() == 4000);

  CHECK_THROWS_AS(synth_shape(ShapeKind::Table, {}, 0, 0.0, 1), InvalidConfig);
  CHECK_THROWS_AS(synth_shape(ShapeKind::Table, {}, 10, -0.1, 1), InvalidConfig);
}

TEST_CASE("shape kinds") {
  CHECK(shape_parts(ShapeKind::Cuboid).size() == 1);
  CHECK(shape_parts(ShapeKind::Table).size() == 5);
  CHECK(shape_parts(ShapeKind::Chair).size() == 6);
  CHECK(shape_parts(ShapeKind::Stack).size() == 3);
  for (auto kind : {ShapeKind::Cuboid, ShapeKind::Table, ShapeKind::Chair, ShapeKind::Stack}) {
    CHECK(parse_shape_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_shape_kind("sofa"), InvalidConfig);
}
