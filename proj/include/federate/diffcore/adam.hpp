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
#include <cstdint>
#include <vector>

#include "federate/diffcore/layer_stack.hpp"

namespace federate {

struct AdamState {
  std::vector<Matrix> first_weight, second_weight;
  std::vector<Vector> first_bias, second_bias;
  std::uint64_t step_count = 0;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_num = 1e-8;

  static AdamState for_stack(const LayerStack& stack, double lr = 0.001) {
    AdamState s;
    s.lr = lr;
    for (const Layer& l : stack.layers()) {
      s.first_weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      s.second_weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      s.first_bias.push_back(Vector::Zero(l.bias.size()));
      s.second_bias.push_back(Vector::Zero(l.bias.size()));
    }
    return s;
  }
};

namespace internal {

template <typename Param, typename Moment>
void adam_update(Param& param, const Param& grad, Moment& m, Moment& v,
                 const AdamState& s, double bias1, double bias2) {
  m = s.beta1 * m + (1.0 - s.beta1) * grad;
  v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  param.array() -= s.lr * (m.array() / bias1) /
                   ((v.array() / bias2).sqrt() + s.eps_num);
}

}  // namespace internal

// One bias-corrected Adam update of every parameter in the stack.
inline void adam_step(LayerStack& stack, const StackGrads& grads,
                      AdamState& state) {
  const std::size_t n = stack.size();
  if (grads.weight.size() != n || grads.bias.size() != n ||
      state.first_weight.size() != n) {
    throw ShapeError("adam_step: layer count mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Layer& l = stack.layers()[i];
    if (grads.weight[i].rows() != l.weight.rows() ||
        grads.weight[i].cols() != l.weight.cols() ||
        grads.bias[i].size() != l.bias.size() ||
        state.first_weight[i].rows() != l.weight.rows() ||
        state.first_weight[i].cols() != l.weight.cols()) {
      throw ShapeError("adam_step: gradient shape mismatch at layer " +
                       std::to_string(i));
    }
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  std::vector<Layer>& layers = stack.mutable_layers();
  for (std::size_t i = 0; i < n; ++i) {
    internal::adam_update(layers[i].weight, grads.weight[i],
                          state.first_weight[i], state.second_weight[i], state,
                          bias1, bias2);
    internal::adam_update(layers[i].bias, grads.bias[i], state.first_bias[i],
                          state.second_bias[i], state, bias1, bias2);
  }
}

}  // namespace federate
