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
#include <string>

#include "federate/common.hpp"

namespace federate {

// Laplace mechanism parameters. The noise scale is always derived from
// epsilon; there is no way to set it independently.
class PrivacyParams {
 public:
  PrivacyParams(double epsilon, Eigen::Index rep_dim)
      : epsilon_(epsilon), rep_dim_(rep_dim) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw ParameterError("epsilon must be a positive finite number");
    }
    if (rep_dim <= 0) throw ParameterError("representation dim must be > 0");
  }

  double epsilon() const { return epsilon_; }
  Eigen::Index rep_dim() const { return rep_dim_; }
  // L1 sensitivity of the unit-L1-sphere image is 2.
  double noise_scale() const { return 2.0 / epsilon_; }
  static constexpr double sensitivity_bound() { return 2.0; }

 private:
  double epsilon_;
  Eigen::Index rep_dim_;
};

enum class Normalizer { kL1, kMinMax };

inline const char* to_string(Normalizer n) {
  return n == Normalizer::kL1 ? "l1" : "minmax";
}

inline Vector l1_normalize(const Vector& v) {
  const double norm = v.lpNorm<1>();
  if (!(norm > 0.0)) {
    throw DegenerateInputError("l1_normalize: vector has zero L1 norm");
  }
  return v / norm;
}

// The [0, 1] rescaling used by earlier DP text encoders. Kept only to
// demonstrate that its L1 sensitivity grows with the dimension.
inline Vector minmax_normalize_legacy(const Vector& v) {
  if (v.size() == 0) throw DegenerateInputError("minmax: empty vector");
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  if (!(hi > lo)) {
    throw DegenerateInputError("minmax: constant vector has no range");
  }
  return (v.array() - lo) / (hi - lo);
}

inline Vector normalize(Normalizer normalizer, const Vector& v) {
  return normalizer == Normalizer::kL1 ? l1_normalize(v)
                                       : minmax_normalize_legacy(v);
}

// Worst-case L1 distance between two normalized vectors of dimension dim.
inline double sensitivity_bound(Normalizer normalizer, Eigen::Index dim) {
  return normalizer == Normalizer::kL1 ? 2.0 : static_cast<double>(dim);
}

// Noise scale each normalizer is paired with: 2/eps for the corrected
// mechanism, and the 1/eps that the min-max construction claimed.
inline double mechanism_noise_scale(Normalizer normalizer, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  return normalizer == Normalizer::kL1 ? 2.0 / epsilon : 1.0 / epsilon;
}

inline double laplace_inverse_cdf(double u, double scale) {
  const double centered = u - 0.5;
  const double sign = centered < 0.0 ? -1.0 : 1.0;
  return -sign * scale * std::log1p(-2.0 * std::abs(centered));
}

inline double laplace_cdf(double x, double scale) {
  return x < 0.0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
}

inline double laplace_draw(double scale, Rng& rng) {
  return laplace_inverse_cdf(rng.uniform_open(), scale);
}

inline Vector sample_laplace(double scale, Eigen::Index dim, Rng& rng) {
  if (!(scale > 0.0)) throw ParameterError("Laplace scale must be positive");
  if (dim < 0) throw ParameterError("negative dimension");
  Vector out(dim);
  for (Eigen::Index i = 0; i < dim; ++i) out[i] = laplace_draw(scale, rng);
  return out;
}

// Draws centered Laplace vectors; the default noise source.
struct LaplaceNoise {
  Rng& rng;
  Vector operator()(double scale, Eigen::Index dim) const {
    return sample_laplace(scale, dim, rng);
  }
};

// l1_normalize(v) + Lap(2/eps)^D. `noise` is any callable (scale, dim) ->
// Vector; tests substitute a zero source.
template <typename NoiseSource>
Vector privatize(const Vector& v, const PrivacyParams& params,
                 NoiseSource&& noise) {
  if (v.size() != params.rep_dim()) {
    throw ShapeError("privatize: vector dim " + std::to_string(v.size()) +
                     " != representation dim " +
                     std::to_string(params.rep_dim()));
  }
  Vector out = l1_normalize(v);
  out += noise(params.noise_scale(), v.size());
  return out;
}

inline Vector privatize(const Vector& v, const PrivacyParams& params,
                        Rng& rng) {
  return privatize(v, params, LaplaceNoise{rng});
}

// Row-wise forms used by the training loop.
struct NormalizedRows {
  Matrix normalized;
  Vector norms;
};

inline NormalizedRows l1_normalize_rows(const Matrix& rows) {
  NormalizedRows out;
  out.norms = rows.cwiseAbs().rowwise().sum();
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    if (!(out.norms[r] > 0.0)) {
      throw DegenerateInputError("l1_normalize: row " + std::to_string(r) +
                                 " has zero L1 norm (dead encoder output)");
    }
  }
  out.normalized = out.norms.cwiseInverse().asDiagonal() * rows;
  return out;
}

// Gradient of v / |v|_1 with respect to v, row by row:
//   g_v = g / s - sign(v) * <g, v> / s^2.
inline Matrix l1_normalize_backward(const Matrix& rows, const Vector& norms,
                                    const Matrix& upstream) {
  Matrix grad(rows.rows(), rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double s = norms[r];
    const double dot = upstream.row(r).dot(rows.row(r));
    grad.row(r) = upstream.row(r) / s -
                  rows.row(r).array().sign().matrix() * (dot / (s * s));
  }
  return grad;
}

inline Matrix sample_laplace_matrix(double scale, Eigen::Index rows,
                                    Eigen::Index cols, Rng& rng) {
  if (!(scale > 0.0)) throw ParameterError("Laplace scale must be positive");
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = laplace_draw(scale, rng);
  }
  return out;
}

}  // namespace federate
