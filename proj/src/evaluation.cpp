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

#include "cuboidfit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cuboidfit/error.hpp"
#include "cuboidfit/kdtree.hpp"
#include "cuboidfit/losses.hpp"

namespace cuboidfit {

std::vector<SurfaceSample> sample_abstraction(std::span<const Cuboid> cuboids,
                                              std::span<const std::uint8_t> active,
                                              std::size_t k, Rng& rng) {
  if (active.size() != cuboids.size()) {
    throw InvalidInput("existence flags do not match the cuboid count");
  }
  std::vector<double> weights(cuboids.size(), 0.0);
  for (std::size_t m = 0; m < cuboids.size(); ++m) {
    if (active[m]) weights[m] = cuboids[m].surface_area();
  }
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0; })) {
    throw InvalidInput("empty abstraction");
  }
  if (k == 0) throw InvalidInput("sample count must be at least 1");

  std::vector<CuboidFrame> frames;
  for (const Cuboid& c : cuboids) frames.emplace_back(c);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::vector<SurfaceSample> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const CuboidFrame& f = frames[static_cast<std::size_t>(pick(rng))];
    const auto areas = face_areas(f.half_extents);
    std::discrete_distribution<int> face(areas.begin(), areas.end());
    out.push_back(sample_face(f, static_cast<FaceIndex>(face(rng)), rng));
  }
  return out;
}

std::vector<std::size_t> resample_indices(std::size_t n, std::size_t k,
                                          Rng& rng) {
  if (n == 0) throw InvalidInput("cannot resample an empty point set");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (k <= n) {
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    return idx;
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  while (idx.size() < k) idx.push_back(pick(rng));
  return idx;
}

namespace {

struct SampledPair {
  std::vector<Vec3> abstraction_points;
  std::vector<Vec3> abstraction_normals;
  std::vector<Vec3> cloud_points;
  std::vector<Vec3> cloud_normals;
};

SampledPair sample_pair(const AbstractionResult& result, const PointCloud& pc,
                        std::size_t samples, Rng& rng) {
  SampledPair out;
  for (const SurfaceSample& s :
       sample_abstraction(result.cuboids, result.exists, samples, rng)) {
    out.abstraction_points.push_back(s.point);
    out.abstraction_normals.push_back(s.normal);
  }
  for (std::size_t i : resample_indices(pc.size(), samples, rng)) {
    out.cloud_points.push_back(pc.points[i]);
    out.cloud_normals.push_back(pc.normals[i]);
  }
  return out;
}

double directed_consistency(std::span<const Vec3> points_a,
                            std::span<const Vec3> normals_a,
                            const KdTree& tree_b, std::span<const Vec3> normals_b) {
  double total = 0.0;
  for (std::size_t i = 0; i < points_a.size(); ++i) {
    const std::size_t j = tree_b.nearest(points_a[i]).first;
    total += std::abs(normals_a[i].dot(normals_b[j]));
  }
  return total / static_cast<double>(points_a.size());
}

}  // namespace

double eval_chamfer(const AbstractionResult& result, const PointCloud& pc,
                    std::size_t samples, Rng& rng) {
  const SampledPair s = sample_pair(result, pc, samples, rng);
  return chamfer_distance(s.abstraction_points, s.cloud_points);
}

double normal_consistency(std::span<const Vec3> points_a,
                          std::span<const Vec3> normals_a,
                          std::span<const Vec3> points_b,
                          std::span<const Vec3> normals_b) {
  if (points_a.empty() || points_b.empty()) {
    throw InvalidInput("normal consistency of an empty set");
  }
  const KdTree tree_a(points_a);
  const KdTree tree_b(points_b);
  return 0.5 * (directed_consistency(points_a, normals_a, tree_b, normals_b) +
                directed_consistency(points_b, normals_b, tree_a, normals_a));
}

double normal_consistency(const AbstractionResult& result, const PointCloud& pc,
                          std::size_t samples, Rng& rng) {
  const SampledPair s = sample_pair(result, pc, samples, rng);
  return normal_consistency(s.cloud_points, s.cloud_normals, s.abstraction_points,
                            s.abstraction_normals);
}

LabelMap transfer_labels(std::span<const ShapeSegmentation> shapes,
                         int cuboid_count, double fraction, Rng& rng) {
  if (shapes.empty() || !(fraction > 0) || fraction > 1) {
    throw InvalidConfig("label transfer subset is empty");
  }
  if (cuboid_count < 1) throw InvalidConfig("cuboid count must be at least 1");
  const auto subset_size = std::min(
      shapes.size(),
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(shapes.size()))));
  const std::vector<std::size_t> subset = resample_indices(shapes.size(), subset_size, rng);

  // counts[m][label] over the subset; std::map keeps labels ordered so ties
  // resolve to the lowest id.
  std::vector<std::map<int, std::size_t>> counts(static_cast<std::size_t>(cuboid_count));
  std::map<int, std::size_t> overall;
  for (std::size_t s : subset) {
    const ShapeSegmentation& shape = shapes[s];
    if (shape.predicted.size() != shape.ground_truth.size()) {
      throw InvalidInput("prediction and ground truth differ in length");
    }
    for (std::size_t n = 0; n < shape.predicted.size(); ++n) {
      const int m = shape.predicted[n];
      if (m < 0 || m >= cuboid_count) throw InvalidInput("cuboid index out of range");
      ++counts[static_cast<std::size_t>(m)][shape.ground_truth[n]];
      ++overall[shape.ground_truth[n]];
    }
  }
  if (overall.empty()) throw InvalidConfig("label transfer subset has no points");

  auto argmax = [](const std::map<int, std::size_t>& c) {
    int best = c.begin()->first;
    std::size_t best_count = c.begin()->second;
    for (const auto& [label, count] : c) {
      if (count > best_count) {
        best = label;
        best_count = count;
      }
    }
    return best;
  };
  const int fallback = argmax(overall);
  LabelMap map(static_cast<std::size_t>(cuboid_count), fallback);
  for (std::size_t m = 0; m < counts.size(); ++m) {
    if (!counts[m].empty()) map[m] = argmax(counts[m]);
  }
  return map;
}

MiouResult miou(std::span<const ShapeSegmentation> shapes,
                const LabelMap& labelmap) {
  std::map<int, std::size_t> intersection, union_count;
  for (const ShapeSegmentation& shape : shapes) {
    if (shape.predicted.size() != shape.ground_truth.size()) {
      throw InvalidInput("prediction and ground truth differ in length");
    }
    for (std::size_t n = 0; n < shape.predicted.size(); ++n) {
      const int m = shape.predicted[n];
      if (m < 0 || static_cast<std::size_t>(m) >= labelmap.size()) {
        throw InvalidInput("label map does not cover cuboid index " + std::to_string(m));
      }
      const int pred = labelmap[static_cast<std::size_t>(m)];
      const int gt = shape.ground_truth[n];
      if (pred == gt) {
        ++intersection[gt];
        ++union_count[gt];
      } else {
        ++union_count[pred];
        ++union_count[gt];
      }
    }
  }
  MiouResult out;
  double total = 0.0;
  for (const auto& [label, u] : union_count) {
    const auto it = intersection.find(label);
    const double i = it == intersection.end() ? 0.0 : static_cast<double>(it->second);
    const double iou = i / static_cast<double>(u);
    out.per_label.push_back({label, iou});
    total += iou;
  }
  if (!out.per_label.empty()) {
    out.miou = 100.0 * total / static_cast<double>(out.per_label.size());
  }
  return out;
}

std::vector<std::vector<std::size_t>> structural_clusters(
    std::span<const std::vector<std::uint8_t>> existence) {
  std::map<std::vector<std::uint8_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < existence.size(); ++i) groups[existence[i]].push_back(i);

  std::vector<std::pair<std::vector<std::uint8_t>, std::vector<std::size_t>>> ordered(
      groups.begin(), groups.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return a.second.size() > b.second.size();
  });
  std::vector<std::vector<std::size_t>> out;
  out.reserve(ordered.size());
  for (auto& [key, members] : ordered) out.push_back(std::move(members));
  return out;
}

double active_cuboid_stats(std::span<const std::vector<std::uint8_t>> existence) {
  if (existence.empty()) return 0.0;
  double total = 0.0;
  for (const auto& flags : existence) {
    total += static_cast<double>(std::count_if(flags.begin(), flags.end(),
                                               [](std::uint8_t f) { return f != 0; }));
  }
  return total / static_cast<double>(existence.size());
}

}  // namespace cuboidfit
