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
#include <map>
#include <span>
#include <string>

#include "federate/common.hpp"

namespace federate {

inline double accuracy_eval(std::span<const int> predictions,
                            std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("accuracy: prediction and label counts differ");
  }
  if (labels.empty()) throw UsageError("accuracy on empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    hits += predictions[i] == labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

// P_g(yhat = c | y = c) - P_not_g(yhat = c | y = c).
inline double tpr_gap(std::span<const int> predictions,
                      std::span<const int> labels, std::span<const int> groups,
                      int positive_class = 1, int protected_group = 1) {
  if (predictions.size() != labels.size() || groups.size() != labels.size()) {
    throw ShapeError("tpr_gap: input lengths differ");
  }
  std::size_t pos_g = 0, hit_g = 0, pos_other = 0, hit_other = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != positive_class) continue;
    const bool hit = predictions[i] == positive_class;
    if (groups[i] == protected_group) {
      ++pos_g;
      hit_g += hit;
    } else {
      ++pos_other;
      hit_other += hit;
    }
  }
  if (pos_g == 0 || pos_other == 0) {
    throw InputError("tpr_gap undefined: group " +
                     std::string(pos_g == 0 ? "g (z=" : "not-g (z!=") +
                     std::to_string(protected_group) +
                     ") has no instances of class " +
                     std::to_string(positive_class));
  }
  return static_cast<double>(hit_g) / static_cast<double>(pos_g) -
         static_cast<double>(hit_other) / static_cast<double>(pos_other);
}

inline double grms(std::span<const double> gaps) {
  if (gaps.empty()) throw UsageError("grms of an empty gap list");
  double sum = 0.0;
  for (double g : gaps) sum += g * g;
  return std::sqrt(sum / static_cast<double>(gaps.size()));
}

struct FairnessScore {
  std::map<int, double> per_class_gaps;  // signed
  double scalar = 0.0;  // |TPR-gap| for binary tasks, GRMS otherwise
  double signed_gap = 0.0;  // binary tasks only
};

inline FairnessScore fairness_score(std::span<const int> predictions,
                                    std::span<const int> labels,
                                    std::span<const int> groups,
                                    int num_classes) {
  FairnessScore score;
  if (num_classes == 2) {
    score.signed_gap = tpr_gap(predictions, labels, groups, 1);
    score.per_class_gaps[1] = score.signed_gap;
    score.scalar = std::abs(score.signed_gap);
    return score;
  }
  std::vector<double> gaps;
  for (int c = 0; c < num_classes; ++c) {
    const double g = tpr_gap(predictions, labels, groups, c);
    score.per_class_gaps[c] = g;
    gaps.push_back(g);
  }
  score.scalar = grms(gaps);
  return score;
}

}  // namespace federate
