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

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "federate/privacy/mechanism.hpp"

namespace federate {

struct SensitivityReport {
  Normalizer normalizer = Normalizer::kL1;
  Eigen::Index dim = 0;
  double max_l1_distance = 0.0;  // empirical sensitivity estimate
  std::size_t pair_count = 0;
  double bound = 0.0;            // theoretical sensitivity
  // Distance attained by the constructed worst-case pair, when requested.
  std::optional<double> adversarial_distance;
};

// The pair that attains the sensitivity bound of each normalizer.
inline std::pair<Vector, Vector> worst_case_pair(Normalizer normalizer,
                                                 Eigen::Index dim) {
  if (dim < 2) throw ParameterError("worst-case pair needs dim >= 2");
  Vector a = Vector::Zero(dim);
  Vector b = Vector::Zero(dim);
  if (normalizer == Normalizer::kL1) {
    a[0] = 1.0;
    b[0] = -1.0;
  } else {
    a.setOnes();
    a[0] = 0.0;
    b[0] = 1.0;
  }
  return {a, b};
}

inline double normalized_distance(Normalizer normalizer, const Vector& a,
                                  const Vector& b) {
  return (normalize(normalizer, a) - normalize(normalizer, b)).lpNorm<1>();
}

// Max pairwise L1 distance after normalization, over all pairs of `inputs`.
inline SensitivityReport sensitivity_audit(Normalizer normalizer,
                                           std::span<const Vector> inputs,
                                           bool include_adversarial_pair) {
  if (inputs.size() < 2) {
    throw UsageError("sensitivity_audit needs at least two inputs");
  }
  const Eigen::Index dim = inputs.front().size();
  std::vector<Vector> normalized;
  normalized.reserve(inputs.size());
  for (const Vector& v : inputs) {
    if (v.size() != dim) {
      throw ShapeError("sensitivity_audit: inputs differ in dimension");
    }
    normalized.push_back(normalize(normalizer, v));
  }
  SensitivityReport report;
  report.normalizer = normalizer;
  report.dim = dim;
  report.bound = sensitivity_bound(normalizer, dim);
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    for (std::size_t j = i + 1; j < normalized.size(); ++j) {
      report.max_l1_distance = std::max(
          report.max_l1_distance, (normalized[i] - normalized[j]).lpNorm<1>());
      ++report.pair_count;
    }
  }
  if (include_adversarial_pair) {
    const auto [a, b] = worst_case_pair(normalizer, dim);
    const double d = normalized_distance(normalizer, a, b);
    report.adversarial_distance = d;
    report.max_l1_distance = std::max(report.max_l1_distance, d);
    ++report.pair_count;
  }
  return report;
}

// Two-sided Wilson score interval for a binomial proportion.
struct Interval {
  double lo;
  double hi;
};

inline Interval wilson_interval(std::size_t successes, std::size_t trials,
                                double z) {
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct RatioTestResult {
  double max_abs_log_ratio = 0.0;
  double slack = 0.0;  // slack of the bin that decides the verdict
  bool pass = false;
  double epsilon = 0.0;
  double noise_scale = 0.0;
  std::size_t min_bin_count = 0;
  std::vector<double> log_ratios;  // per bin, log(p_a / p_b)
  std::vector<double> bin_slack;
};

// Statistical check of the DP inequality for one pair of inputs.
//
// Outputs of the mechanism are projected onto w = sign(n(b) - n(a)) and the
// scalar is binned by `bin_edges` (interior edges; the outer bins are open).
// A projection is post-processing, so an eps-DP mechanism must satisfy the
// bound on every projected bin. The per-bin log ratio is compared with eps
// after widening it by 99% Wilson intervals, union-bounded over all bins of
// both inputs.
inline RatioTestResult dp_ratio_test(Normalizer normalizer, double epsilon,
                                     const Vector& input_a,
                                     const Vector& input_b,
                                     std::span<const double> bin_edges,
                                     std::size_t n_samples, Rng& rng,
                                     double confidence = 0.99) {
  if (input_a.size() != input_b.size()) {
    throw ShapeError("dp_ratio_test: inputs differ in dimension");
  }
  if (bin_edges.empty()) throw UsageError("dp_ratio_test needs bin edges");
  if (!std::is_sorted(bin_edges.begin(), bin_edges.end()) ||
      std::adjacent_find(bin_edges.begin(), bin_edges.end()) !=
          bin_edges.end()) {
    throw UsageError("dp_ratio_test: bin edges must be strictly increasing");
  }
  if (n_samples == 0) throw UsageError("dp_ratio_test needs samples");

  const Vector na = normalize(normalizer, input_a);
  const Vector nb = normalize(normalizer, input_b);
  Vector direction = (nb - na).array().sign().matrix();
  if (direction.isZero()) direction[0] = 1.0;
  const double scale = mechanism_noise_scale(normalizer, epsilon);

  const std::size_t bins = bin_edges.size() + 1;
  auto histogram = [&](const Vector& center) {
    std::vector<std::size_t> counts(bins, 0);
    const double shift = direction.dot(center);
    for (std::size_t s = 0; s < n_samples; ++s) {
      double t = shift;
      for (Eigen::Index d = 0; d < center.size(); ++d) {
        if (direction[d] != 0.0) t += direction[d] * laplace_draw(scale, rng);
      }
      const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), t);
      ++counts[static_cast<std::size_t>(it - bin_edges.begin())];
    }
    return counts;
  };
  const std::vector<std::size_t> counts_a = histogram(na);
  const std::vector<std::size_t> counts_b = histogram(nb);

  RatioTestResult result;
  result.epsilon = epsilon;
  result.noise_scale = scale;
  result.min_bin_count = std::numeric_limits<std::size_t>::max();
  for (std::size_t k = 0; k < bins; ++k) {
    if (counts_a[k] == 0 || counts_b[k] == 0) {
      throw UsageError("dp_ratio_test: bin " + std::to_string(k) +
                       " is empty under " +
                       (counts_a[k] == 0 ? "input a" : "input b") +
                       "; widen the bins or draw more samples");
    }
    result.min_bin_count =
        std::min({result.min_bin_count, counts_a[k], counts_b[k]});
  }

  const double alpha = 1.0 - confidence;
  const double intervals = 2.0 * static_cast<double>(bins);
  const boost::math::normal standard;
  const double z =
      boost::math::quantile(standard, 1.0 - alpha / (2.0 * intervals));

  double worst_excess = -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(n_samples);
  for (std::size_t k = 0; k < bins; ++k) {
    const double pa = static_cast<double>(counts_a[k]) / n;
    const double pb = static_cast<double>(counts_b[k]) / n;
    const Interval ia = wilson_interval(counts_a[k], n_samples, z);
    const Interval ib = wilson_interval(counts_b[k], n_samples, z);
    const double log_ratio = std::log(pa / pb);
    // Width of the confidence band on the side that shrinks |log_ratio|.
    const double slack = log_ratio >= 0.0
                             ? std::log(pa / ia.lo) + std::log(ib.hi / pb)
                             : std::log(ia.hi / pa) + std::log(pb / ib.lo);
    result.log_ratios.push_back(log_ratio);
    result.bin_slack.push_back(slack);
    result.max_abs_log_ratio =
        std::max(result.max_abs_log_ratio, std::abs(log_ratio));
    const double excess = std::abs(log_ratio) - slack;
    if (excess > worst_excess) {
      worst_excess = excess;
      result.slack = slack;
    }
  }
  result.pass = worst_excess <= epsilon;
  return result;
}

// Seven interior edges centred between the two projected inputs, spaced by
// the larger of the noise scale and half the projected gap.
inline std::vector<double> default_ratio_bins(Normalizer normalizer,
                                              double epsilon,
                                              const Vector& input_a,
                                              const Vector& input_b) {
  const Vector na = normalize(normalizer, input_a);
  const Vector nb = normalize(normalizer, input_b);
  Vector direction = (nb - na).array().sign().matrix();
  if (direction.isZero()) direction[0] = 1.0;
  const double sa = direction.dot(na);
  const double sb = direction.dot(nb);
  const double step = std::max(mechanism_noise_scale(normalizer, epsilon),
                               std::abs(sb - sa) / 2.0);
  const double mid = (sa + sb) / 2.0;
  std::vector<double> edges;
  for (int j = -3; j <= 3; ++j) edges.push_back(mid + step * j);
  return edges;
}

}  // namespace federate
