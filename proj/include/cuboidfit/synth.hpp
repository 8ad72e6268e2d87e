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
#include <string>
#include <string_view>
#include <vector>

#include "cuboidfit/geometry.hpp"

namespace cuboidfit {

enum class ShapeKind { Cuboid, Table, Chair, Stack };

std::string_view to_string(ShapeKind kind);
ShapeKind parse_shape_kind(std::string_view name);

struct SynthParams {
  /// Half-extents of the single box generated by ShapeKind::Cuboid.
  Vec3 half_extents = Vec3(0.5, 0.3, 0.2);
};

struct SynthShape {
  /// Points carry exact face normals and the index of the generating part
  /// as their label.
  PointCloud cloud;
  std::vector<Cuboid> parts;
};

/// Ground-truth boxes making up a shape kind.
std::vector<Cuboid> shape_parts(ShapeKind kind, const SynthParams& params = {});

/// Area-weighted surface samples over the union of parts, followed by
/// isotropic Gaussian noise of std `noise_sigma` on positions. Points inside
/// overlapping parts keep the label of the part that generated them.
SynthShape synth_shape(ShapeKind kind, const SynthParams& params,
                       std::size_t n_points, double noise_sigma,
                       std::uint64_t seed);

}  // namespace cuboidfit
