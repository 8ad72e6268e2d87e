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

#include "cuboidfit/assignment.hpp"

#include <cmath>

namespace cuboidfit {

AssignmentMatrix softmax_columns(const AssignmentLogits& logits) {
  const Eigen::MatrixXd& l = logits.values;
  AssignmentMatrix out{Eigen::MatrixXd(l.rows(), l.cols())};
  for (Eigen::Index n = 0; n < l.cols(); ++n) {
    const double shift = l.col(n).maxCoeff();
    double total = 0.0;
    for (Eigen::Index m = 0; m < l.rows(); ++m) {
      const double e = std::exp(l(m, n) - shift);
      out.W(m, n) = e;
      total += e;
    }
    out.W.col(n) /= total;
  }
  return out;
}

CoverageVector coverage(const AssignmentMatrix& assignment) {
  return assignment.W.rowwise().mean();
}

std::vector<int> hard_labels(const AssignmentMatrix& assignment) {
  const Eigen::MatrixXd& w = assignment.W;
  std::vector<int> labels(static_cast<std::size_t>(w.cols()), 0);
  for (Eigen::Index n = 0; n < w.cols(); ++n) {
    Eigen::Index best = 0;
    for (Eigen::Index m = 1; m < w.rows(); ++m) {
      if (w(m, n) > w(best, n)) best = m;
    }
    labels[static_cast<std::size_t>(n)] = static_cast<int>(best);
  }
  return labels;
}

std::vector<std::uint8_t> existence_targets(const CoverageVector& w,
                                            double eps_ext) {
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(w.size()));
  for (Eigen::Index m = 0; m < w.size(); ++m) {
    flags[static_cast<std::size_t>(m)] = w[m] > eps_ext ? 1 : 0;
  }
  return flags;
}

AssignmentMatrix one_hot(const std::vector<int>& labels, Eigen::Index cuboids) {
  AssignmentMatrix out{
      Eigen::MatrixXd::Zero(cuboids, static_cast<Eigen::Index>(labels.size()))};
  for (std::size_t n = 0; n < labels.size(); ++n) {
    out.W(labels[n], static_cast<Eigen::Index>(n)) = 1.0;
  }
  return out;
}

bool is_column_stochastic(const AssignmentMatrix& assignment, double tolerance) {
  const Eigen::MatrixXd& w = assignment.W;
  if ((w.array() < 0.0).any() || (w.array() > 1.0).any()) return false;
  for (Eigen::Index n = 0; n < w.cols(); ++n) {
    if (std::abs(w.col(n).sum() - 1.0) > tolerance) return false;
  }
  return true;
}

}  // namespace cuboidfit
