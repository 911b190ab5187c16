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

#include <optional>
#include <string>
#include <string_view>

#include "federate/diffcore/adam.hpp"
#include "federate/diffcore/layer_stack.hpp"

namespace federate {

enum class Method { kRandom, kUnconstrained, kNoise, kAdversarial, kFederate };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::kRandom: return "random";
    case Method::kUnconstrained: return "unconstrained";
    case Method::kNoise: return "noise";
    case Method::kAdversarial: return "adversarial";
    case Method::kFederate: return "federate";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "random") return Method::kRandom;
  if (s == "unconstrained") return Method::kUnconstrained;
  if (s == "noise") return Method::kNoise;
  if (s == "adversarial") return Method::kAdversarial;
  if (s == "federate") return Method::kFederate;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

inline bool uses_noise(Method m) {
  return m == Method::kNoise || m == Method::kFederate;
}

inline bool uses_adversary(Method m) {
  return m == Method::kAdversarial || m == Method::kFederate;
}

// Widths of the three stacks. The encoder is two layers (ReLU + dropout, then
// linear to the representation), the classifier is linear, and the adversary
// has three layers.
struct ModelConfig {
  Eigen::Index hidden = 64;
  Eigen::Index rep_dim = 16;
  Eigen::Index adversary_hidden = 64;
  double dropout = 0.1;
};

struct ModelParams {
  LayerStack encoder;
  LayerStack classifier;
  LayerStack adversary;
  Eigen::Index rep_dim = 0;

  void validate() const {
    if (encoder.out_dim() != rep_dim || classifier.in_dim() != rep_dim ||
        adversary.in_dim() != rep_dim) {
      throw ShapeError("model: classifier and adversary must read the " +
                       std::to_string(rep_dim) + "-dim representation");
    }
  }
};

// Random stream ids; each stochastic component draws from its own stream.
namespace stream {
inline constexpr std::uint64_t kInitEncoder = 1;
inline constexpr std::uint64_t kInitClassifier = 2;
inline constexpr std::uint64_t kInitAdversary = 3;
inline constexpr std::uint64_t kShuffle = 4;
inline constexpr std::uint64_t kNoise = 5;
inline constexpr std::uint64_t kDropoutEncoder = 6;
inline constexpr std::uint64_t kDropoutClassifier = 7;
inline constexpr std::uint64_t kDropoutAdversary = 8;
inline constexpr std::uint64_t kEvalNoise = 9;
inline constexpr std::uint64_t kValidationNoise = 10;
inline constexpr std::uint64_t kRandomBaseline = 11;
}  // namespace stream

inline ModelParams make_model(Eigen::Index input_dim, int num_classes,
                              int num_groups, const ModelConfig& config,
                              std::uint64_t seed) {
  if (config.hidden <= 0 || config.rep_dim <= 0 ||
      config.adversary_hidden <= 0) {
    throw ConfigError("model widths must be positive");
  }
  ModelParams m;
  m.rep_dim = config.rep_dim;
  Rng enc_rng(seed, stream::kInitEncoder);
  Rng cls_rng(seed, stream::kInitClassifier);
  Rng adv_rng(seed, stream::kInitAdversary);
  m.encoder = make_stack(input_dim,
                         {{config.hidden, Activation::kRelu, config.dropout},
                          {config.rep_dim, Activation::kIdentity, 0.0}},
                         enc_rng);
  m.classifier = make_stack(
      config.rep_dim, {{num_classes, Activation::kIdentity, 0.0}}, cls_rng);
  m.adversary = make_stack(
      config.rep_dim,
      {{config.adversary_hidden, Activation::kRelu, config.dropout},
       {config.adversary_hidden, Activation::kRelu, config.dropout},
       {num_groups, Activation::kIdentity, 0.0}},
      adv_rng);
  m.validate();
  return m;
}

struct OptimizerStates {
  AdamState encoder;
  AdamState classifier;
  AdamState adversary;

  static OptimizerStates for_model(const ModelParams& m, double lr) {
    return {AdamState::for_stack(m.encoder, lr),
            AdamState::for_stack(m.classifier, lr),
            AdamState::for_stack(m.adversary, lr)};
  }
};

}  // namespace federate
