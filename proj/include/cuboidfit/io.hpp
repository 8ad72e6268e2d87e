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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cuboidfit/evaluation.hpp"
#include "cuboidfit/geometry.hpp"
#include "cuboidfit/optimizer.hpp"

namespace cuboidfit {

enum class CloudFormat { Xyz, PlyAscii, Obj };

/// Format from the file extension (.xyz/.txt/.pts, .ply, .obj).
CloudFormat format_from_path(const std::filesystem::path& path);
CloudFormat parse_cloud_format(std::string_view name);

enum class NormalsSource { File, Estimated };

std::string_view to_string(NormalsSource source);

/// Maps x to (x - center) * scale.
struct Normalization {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return (p - center) * scale; }
  Cuboid apply(const Cuboid& c) const;
  bool operator==(const Normalization&) const = default;
};

/// Bounding-box diagonal of a normalized cloud.
inline constexpr double kNormalizedDiagonal = 4.0;

/// Recenters to the centroid and scales to a bounding-box diagonal of
/// kNormalizedDiagonal.
Normalization normalize(PointCloud& pc);

/// Parsed file contents before normal estimation or normalization.
struct RawCloud {
  std::vector<Vec3> points;
  std::optional<std::vector<Vec3>> normals;
  std::optional<std::vector<int>> labels;
};

/// Throws InvalidInput with the offending line number on malformed input.
RawCloud parse_pointcloud(std::istream& in, CloudFormat format);

struct LoadOptions {
  bool normalize = true;
  std::size_t normal_neighbors = 16;
};

struct LoadedCloud {
  PointCloud cloud;
  NormalsSource normals_source = NormalsSource::File;
  bool normalized = false;
  Normalization normalization;
};

LoadedCloud load_pointcloud(const std::filesystem::path& path,
                            CloudFormat format, const LoadOptions& options = {});
LoadedCloud load_pointcloud(const std::filesystem::path& path,
                            const LoadOptions& options = {});

/// Writes `x y z nx ny nz [label]` lines.
void save_xyz(const std::filesystem::path& path, const PointCloud& pc);

/// Writes an ASCII PLY with normals and, when present, an int label property.
void save_ply(const std::filesystem::path& path, const PointCloud& pc);

/// Dispatches on the path extension.
void save_pointcloud(const std::filesystem::path& path, const PointCloud& pc);

inline constexpr std::string_view kResultVersion = "cuboidfit/1";

struct CuboidRecord {
  std::array<double, 3> t{};
  std::array<double, 4> r{};
  /// Positive half-extents.
  std::array<double, 3> s{};
  double delta = 0.5;
  bool exists = false;
  double coverage = 0.0;

  bool operator==(const CuboidRecord&) const = default;
};

struct Provenance {
  std::string input;
  std::uint64_t seed = 0;
  NormalsSource normals = NormalsSource::File;
  bool normalized = true;
  Normalization normalization;

  bool operator==(const Provenance&) const = default;
};

struct ResultDocument {
  std::string version{kResultVersion};
  FitConfig config;
  std::vector<CuboidRecord> cuboids;
  std::vector<int> labels;
  LossBreakdown final_loss;
  int active_count = 0;
  std::vector<LossBreakdown> trace;
  Provenance provenance;

  bool operator==(const ResultDocument&) const = default;
};

ResultDocument make_document(const AbstractionResult& result,
                             const FitConfig& config,
                             const Provenance& provenance);

/// Cuboids, hard labels and existence flags restored from a document. The
/// assignment is the one-hot matrix of the stored labels.
AbstractionResult result_from_document(const ResultDocument& doc);

std::string serialize_result(const ResultDocument& doc);
/// Throws InvalidInput naming a missing or invalid field, or on a version
/// mismatch.
ResultDocument parse_result(std::string_view text);

void save_result(const std::filesystem::path& path, const ResultDocument& doc);
ResultDocument load_result(const std::filesystem::path& path);

std::string metrics_to_json(const MetricsReport& report);

/// One `g cuboid_<m>` group per active cuboid, 8 vertices and 12 faces each.
void export_obj(std::ostream& out, std::span<const Cuboid> cuboids,
                std::span<const std::uint8_t> active);
void export_obj(const std::filesystem::path& path, const ResultDocument& doc);

/// Ground-truth sidecar written next to synthetic clouds.
std::string serialize_parts(std::string_view kind, std::uint64_t seed,
                            std::span<const Cuboid> parts);

}  // namespace cuboidfit
