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
#include <string>
#include <vector>

#include "federate/common.hpp"

namespace federate {

enum class Activation { kIdentity, kRelu };

enum class Mode { kTrain, kEval };

struct Layer {
  Matrix weight;  // [out x in]
  Vector bias;    // [out]
  Activation activation = Activation::kIdentity;
  double dropout_rate = 0.0;

  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }
};

// Per-layer gradients with the same shapes as the stack's parameters.
struct StackGrads {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;
};

// An ordered feed-forward stack of affine layers. Dropout is applied after the
// activation and only in training mode, with inverted scaling.
class LayerStack {
 public:
  LayerStack() = default;

  explicit LayerStack(std::vector<Layer> layers) : layers_(std::move(layers)) {
    validate();
  }

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() {
    ++version_;
    return layers_;
  }

  std::size_t size() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }
  Eigen::Index in_dim() const { return layers_.front().in_dim(); }
  Eigen::Index out_dim() const { return layers_.back().out_dim(); }

  // Bumped whenever parameters may have changed; tapes recorded against an
  // older version are rejected by backward().
  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
  }

  StackGrads zero_grads() const {
    StackGrads g;
    for (const Layer& l : layers_) {
      g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      g.bias.push_back(Vector::Zero(l.bias.size()));
    }
    return g;
  }

 private:
  void validate() const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const Layer& l = layers_[i];
      if (l.bias.size() != l.weight.rows()) {
        throw ShapeError("layer " + std::to_string(i) +
                         ": bias length does not match weight rows");
      }
      if (!(l.dropout_rate >= 0.0 && l.dropout_rate < 1.0)) {
        throw ParameterError("layer " + std::to_string(i) +
                             ": dropout rate must lie in [0, 1)");
      }
      if (i > 0 && layers_[i - 1].out_dim() != l.in_dim()) {
        throw ShapeError("layer " + std::to_string(i) + " expects input dim " +
                         std::to_string(l.in_dim()) + " but layer " +
                         std::to_string(i - 1) + " emits " +
                         std::to_string(layers_[i - 1].out_dim()));
      }
    }
  }

  std::vector<Layer> layers_;
  std::uint64_t version_ = 0;
};

struct LayerSpec {
  Eigen::Index out_dim;
  Activation activation;
  double dropout_rate;
};

// Glorot-uniform weights, zero biases.
inline LayerStack make_stack(Eigen::Index in_dim,
                             const std::vector<LayerSpec>& specs, Rng& rng) {
  std::vector<Layer> layers;
  Eigen::Index fan_in = in_dim;
  for (const LayerSpec& s : specs) {
    if (fan_in <= 0 || s.out_dim <= 0) {
      throw ShapeError("layer dimensions must be positive");
    }
    const double limit =
        std::sqrt(6.0 / static_cast<double>(fan_in + s.out_dim));
    Layer l;
    l.weight.resize(s.out_dim, fan_in);
    for (Eigen::Index c = 0; c < fan_in; ++c) {
      for (Eigen::Index r = 0; r < s.out_dim; ++r) {
        l.weight(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
      }
    }
    l.bias = Vector::Zero(s.out_dim);
    l.activation = s.activation;
    l.dropout_rate = s.dropout_rate;
    layers.push_back(std::move(l));
    fan_in = s.out_dim;
  }
  return LayerStack(std::move(layers));
}

// Activations cached by a training-mode forward pass.
struct Tape {
  std::uint64_t stack_version = 0;
  bool recorded = false;
  std::vector<Matrix> inputs;        // input to each layer
  std::vector<Matrix> pre_activity;  // affine output of each layer
  std::vector<Matrix> dropout_scale; // empty matrix when no dropout applied
};

struct ForwardResult {
  Matrix output;
  Tape tape;
};

struct BackwardResult {
  StackGrads param_grads;
  Matrix input_grad;
};

inline ForwardResult forward(const LayerStack& stack, const Matrix& batch,
                             Mode mode, Rng& rng) {
  if (stack.empty()) throw UsageError("forward on an empty layer stack");
  if (batch.cols() != stack.in_dim()) {
    throw ShapeError("batch has " + std::to_string(batch.cols()) +
                     " columns, stack expects " +
                     std::to_string(stack.in_dim()));
  }
  ForwardResult result;
  Tape& tape = result.tape;
  const bool train = mode == Mode::kTrain;
  if (train) {
    tape.recorded = true;
    tape.stack_version = stack.version();
  }
  Matrix activity = batch;
  for (const Layer& layer : stack.layers()) {
    Matrix z = activity * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    Matrix h = layer.activation == Activation::kRelu ? Matrix(z.cwiseMax(0.0))
                                                     : z;
    Matrix scale;
    if (train && layer.dropout_rate > 0.0) {
      const double keep = 1.0 - layer.dropout_rate;
      scale.resize(h.rows(), h.cols());
      for (Eigen::Index c = 0; c < h.cols(); ++c) {
        for (Eigen::Index r = 0; r < h.rows(); ++r) {
          scale(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
        }
      }
      h = h.cwiseProduct(scale);
    }
    if (train) {
      tape.inputs.push_back(std::move(activity));
      tape.pre_activity.push_back(std::move(z));
      tape.dropout_scale.push_back(std::move(scale));
    }
    activity = std::move(h);
  }
  result.output = std::move(activity);
  return result;
}

inline BackwardResult backward(const LayerStack& stack, const Tape& tape,
                               const Matrix& upstream_grad) {
  if (!tape.recorded) {
    throw UsageError(
        "backward needs a tape from a training-mode forward pass");
  }
  if (tape.stack_version != stack.version() ||
      tape.inputs.size() != stack.size()) {
    throw UsageError("stale tape: parameters changed since the forward pass");
  }
  const Matrix& last_in = tape.inputs.front();
  if (upstream_grad.rows() != last_in.rows() ||
      upstream_grad.cols() != stack.out_dim()) {
    throw ShapeError("upstream gradient shape does not match stack output");
  }
  BackwardResult result;
  result.param_grads.weight.resize(stack.size());
  result.param_grads.bias.resize(stack.size());
  Matrix grad = upstream_grad;
  for (std::size_t i = stack.size(); i-- > 0;) {
    const Layer& layer = stack.layers()[i];
    if (tape.dropout_scale[i].size() > 0) {
      grad = grad.cwiseProduct(tape.dropout_scale[i]);
    }
    if (layer.activation == Activation::kRelu) {
      grad = grad.cwiseProduct(
          (tape.pre_activity[i].array() > 0.0).cast<double>().matrix());
    }
    result.param_grads.weight[i] = grad.transpose() * tape.inputs[i];
    result.param_grads.bias[i] = grad.colwise().sum().transpose();
    grad = grad * layer.weight;
  }
  result.input_grad = std::move(grad);
  return result;
}

}  // namespace federate
