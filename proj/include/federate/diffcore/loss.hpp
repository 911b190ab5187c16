// Copyright 2026 The federate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <span>
#include <string>

#include "federate/common.hpp"

namespace federate {

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits
};

// Row-wise log-softmax, stable for large logits.
inline Matrix log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double peak = logits.row(r).maxCoeff();
    const double log_sum =
        std::log((logits.row(r).array() - peak).exp().sum()) + peak;
    out.row(r) = logits.row(r).array() - log_sum;
  }
  return out;
}

inline Matrix softmax(const Matrix& logits) {
  return log_softmax(logits).array().exp().matrix();
}

inline void check_labels(std::span<const int> labels, Eigen::Index classes) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw InputError("label " + std::to_string(labels[i]) + " at row " +
                       std::to_string(i) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
}

// Mean cross-entropy of the true class; gradient (softmax - onehot) / n.
inline LossResult cross_entropy(const Matrix& logits,
                                std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(logits.rows()) + " rows");
  }
  if (labels.empty()) throw UsageError("cross_entropy on an empty batch");
  check_labels(labels, logits.cols());
  const Matrix logp = log_softmax(logits);
  const double n = static_cast<double>(labels.size());
  LossResult result;
  result.grad = logp.array().exp().matrix();
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    total -= logp(r, labels[r]);
    result.grad(r, labels[r]) -= 1.0;
  }
  result.grad /= n;
  result.loss = total / n;
  return result;
}

inline std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(scores.rows());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index best = 0;
    scores.row(r).maxCoeff(&best);
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace federate
