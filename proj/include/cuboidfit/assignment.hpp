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
#include <vector>

#include <Eigen/Core>

namespace cuboidfit {

/// M x N free logits; row m is a cuboid, column n a point.
struct AssignmentLogits {
  Eigen::MatrixXd values;
};

/// Column-stochastic point-to-cuboid probabilities.
struct AssignmentMatrix {
  Eigen::MatrixXd W;

  Eigen::Index cuboids() const { return W.rows(); }
  Eigen::Index points() const { return W.cols(); }
};

/// Fraction of the point mass held by each cuboid. Sums to one.
using CoverageVector = Eigen::VectorXd;

/// Max-shifted softmax over the cuboids of every column.
AssignmentMatrix softmax_columns(const AssignmentLogits& logits);

/// Row means of W.
CoverageVector coverage(const AssignmentMatrix& assignment);

/// Per-point argmax over cuboids, lowest index on ties.
std::vector<int> hard_labels(const AssignmentMatrix& assignment);

/// flag_m = 1 iff w_m > eps_ext.
std::vector<std::uint8_t> existence_targets(const CoverageVector& w,
                                            double eps_ext);

/// One-hot M x N matrix from per-point labels.
AssignmentMatrix one_hot(const std::vector<int>& labels, Eigen::Index cuboids);

/// Entries in [0, 1] and every column summing to one within `tolerance`.
bool is_column_stochastic(const AssignmentMatrix& assignment,
                          double tolerance = 1e-9);

}  // namespace cuboidfit
