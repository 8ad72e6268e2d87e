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

#include "cuboidfit/synth.hpp"

#include <string>

#include "cuboidfit/error.hpp"

namespace cuboidfit {

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Cuboid: return "cuboid";
    case ShapeKind::Table: return "table";
    case ShapeKind::Chair: return "chair";
    case ShapeKind::Stack: return "stack";
  }
  return "unknown";
}

ShapeKind parse_shape_kind(std::string_view name) {
  if (name == "cuboid") return ShapeKind::Cuboid;
  if (name == "table") return ShapeKind::Table;
  if (name == "chair") return ShapeKind::Chair;
  if (name == "stack") return ShapeKind::Stack;
  throw InvalidConfig("unknown shape kind '" + std::string(name) + "'");
}

namespace {

Cuboid box(double x, double y, double z, double hx, double hy, double hz) {
  return Cuboid::from_half_extents(Vec3(x, y, z), Quaternion::identity(),
                                   Vec3(hx, hy, hz));
}

}  // namespace

std::vector<Cuboid> shape_parts(ShapeKind kind, const SynthParams& params) {
  switch (kind) {
    case ShapeKind::Cuboid:
      return {Cuboid::from_half_extents(Vec3::Zero(), Quaternion::identity(),
                                        params.half_extents)};
    case ShapeKind::Table: {
      // Top above four corner legs, with a clear gap between them.
      std::vector<Cuboid> parts{box(0, 0, 0.36, 0.5, 0.3, 0.04)};
      for (double sx : {1.0, -1.0}) {
        for (double sy : {1.0, -1.0}) {
          parts.push_back(box(0.42 * sx, 0.22 * sy, -0.075, 0.04, 0.04, 0.245));
        }
      }
      return parts;
    }
    case ShapeKind::Chair: {
      std::vector<Cuboid> parts{box(0, 0, 0, 0.25, 0.25, 0.03)};
      for (double sx : {1.0, -1.0}) {
        for (double sy : {1.0, -1.0}) {
          parts.push_back(box(0.2 * sx, 0.2 * sy, -0.25, 0.03, 0.03, 0.22));
        }
      }
      parts.push_back(box(0, -0.22, 0.28, 0.25, 0.03, 0.25));
      return parts;
    }
    case ShapeKind::Stack:
      return {box(0, 0, 0, 0.4, 0.4, 0.1), box(0, 0, 0.2, 0.25, 0.25, 0.1),
              box(0, 0, 0.4, 0.1, 0.1, 0.1)};
  }
  return {};
}

SynthShape synth_shape(ShapeKind kind, const SynthParams& params,
                       std::size_t n_points, double noise_sigma,
                       std::uint64_t seed) {
  if (n_points < 1) throw InvalidConfig("synthetic shape needs at least one point");
  if (noise_sigma < 0) throw InvalidConfig("noise sigma must be non-negative");

  SynthShape out;
  out.parts = shape_parts(kind, params);
  std::vector<CuboidFrame> frames;
  std::vector<double> areas;
  for (const Cuboid& c : out.parts) {
    frames.emplace_back(c);
    areas.push_back(c.surface_area());
  }

  Rng rng(seed);
  std::discrete_distribution<int> pick_part(areas.begin(), areas.end());
  std::normal_distribution<double> noise(0.0, noise_sigma > 0 ? noise_sigma : 1.0);
  std::vector<int> labels;
  labels.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const int part = pick_part(rng);
    const CuboidFrame& f = frames[static_cast<std::size_t>(part)];
    const auto face_area = face_areas(f.half_extents);
    std::discrete_distribution<int> pick_face(face_area.begin(), face_area.end());
    SurfaceSample s = sample_face(f, static_cast<FaceIndex>(pick_face(rng)), rng);
    if (noise_sigma > 0) s.point += Vec3(noise(rng), noise(rng), noise(rng));
    out.cloud.points.push_back(s.point);
    out.cloud.normals.push_back(s.normal);
    labels.push_back(part);
  }
  out.cloud.labels = std::move(labels);
  return out;
}

}  // namespace cuboidfit
