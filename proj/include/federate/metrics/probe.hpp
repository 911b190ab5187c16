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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "federate/diffcore/adam.hpp"
#include "federate/diffcore/layer_stack.hpp"
#include "federate/diffcore/loss.hpp"
#include "federate/metrics/fairness.hpp"

namespace federate {

// Post-hoc attacker used by both privacy metrics: an MLP with two ReLU hidden
// layers trained with Adam. The parameters kept are those with the lowest
// cross-entropy on a held-out tenth of the training rows (the untrained
// initialization included), which keeps online codelengths near the uniform
// code when the labels are unlearnable.
struct ProbeConfig {
  std::vector<Eigen::Index> hidden_sizes = {64, 64};
  std::vector<double> block_fractions = {0.001, 0.002, 0.004, 0.008,
                                         0.016, 0.032, 0.0625, 0.125,
                                         0.25,  0.5,   1.0};
  std::uint64_t seed = 0;
  int epochs = 50;
  double lr = 0.001;
  std::size_t batch_size = 200;
  double holdout_fraction = 0.1;

  void validate() const {
    if (hidden_sizes.empty()) throw ConfigError("probe needs hidden layers");
    for (Eigen::Index h : hidden_sizes) {
      if (h <= 0) throw ConfigError("probe hidden sizes must be positive");
    }
    if (block_fractions.empty()) throw ConfigError("probe needs block fractions");
    for (std::size_t i = 0; i < block_fractions.size(); ++i) {
      if (!(block_fractions[i] > 0.0) ||
          (i > 0 && !(block_fractions[i] > block_fractions[i - 1]))) {
        throw ConfigError("probe block fractions must be strictly increasing");
      }
    }
    if (block_fractions.back() != 1.0) {
      throw ConfigError("the last probe block fraction must be 1.0");
    }
    if (epochs < 0 || !(lr > 0.0) || batch_size == 0) {
      throw ConfigError("probe epochs, lr and batch size must be positive");
    }
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
      throw ConfigError("probe holdout fraction must lie in [0, 1)");
    }
  }
};

struct PrivacyScore {
  std::optional<double> leakage;
  double mdl_bits = 0.0;
  double uniform_codelength_bits = 0.0;
  std::vector<std::size_t> block_ends;
};

namespace probe_internal {

inline Matrix gather_rows(const Matrix& x, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) =
        x.row(static_cast<Eigen::Index>(idx[k]));
  }
  return out;
}

inline std::vector<int> gather(std::span<const int> v,
                               std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

inline double mean_loss(const LayerStack& net, const Matrix& x,
                        std::span<const int> y, Rng& rng) {
  return cross_entropy(forward(net, x, Mode::kEval, rng).output, y).loss;
}

}  // namespace probe_internal

// Trains a fresh probe on (x, labels). `stream` separates the random streams
// of probes trained from the same config seed.
inline LayerStack train_probe(const Matrix& x, std::span<const int> labels,
                              int num_classes, const ProbeConfig& config,
                              std::uint64_t stream) {
  using namespace probe_internal;
  config.validate();
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw ShapeError("probe: feature rows and label count differ");
  }
  if (labels.empty()) throw UsageError("probe: no training rows");
  check_labels(labels, num_classes);

  Rng rng(config.seed, 0x9b0000 + stream);
  std::vector<LayerSpec> specs;
  for (Eigen::Index h : config.hidden_sizes) {
    specs.push_back({h, Activation::kRelu, 0.0});
  }
  specs.push_back({num_classes, Activation::kIdentity, 0.0});
  LayerStack net = make_stack(x.cols(), specs, rng);

  std::vector<std::size_t> order = iota_indices(labels.size());
  shuffle(order, rng);
  std::size_t holdout = 0;
  if (labels.size() >= 10 && config.holdout_fraction > 0.0) {
    holdout = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(
               config.holdout_fraction * static_cast<double>(labels.size()) +
               0.5)));
  }
  const std::span<const std::size_t> held(order.data(), holdout);
  std::vector<std::size_t> fit(order.begin() + static_cast<long>(holdout),
                               order.end());
  const Matrix held_x = gather_rows(x, held);
  const std::vector<int> held_y = gather(labels, held);

  AdamState adam = AdamState::for_stack(net, config.lr);
  LayerStack best = net;
  double best_loss = holdout > 0 ? mean_loss(net, held_x, held_y, rng)
                                 : std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(fit, rng);
    for (std::size_t start = 0; start < fit.size();
         start += config.batch_size) {
      const std::size_t stop = std::min(fit.size(), start + config.batch_size);
      const std::span<const std::size_t> batch(fit.data() + start,
                                               stop - start);
      const Matrix bx = gather_rows(x, batch);
      const std::vector<int> by = gather(labels, batch);
      ForwardResult fwd = forward(net, bx, Mode::kTrain, rng);
      const LossResult loss = cross_entropy(fwd.output, by);
      const BackwardResult grads = backward(net, fwd.tape, loss.grad);
      adam_step(net, grads.param_grads, adam);
    }
    if (holdout > 0) {
      const double l = mean_loss(net, held_x, held_y, rng);
      if (l < best_loss) {
        best_loss = l;
        best = net;
      }
    }
  }
  return holdout > 0 ? best : net;
}

// Accuracy of a probe trained on (train_x, train_z), measured on the test rows.
inline double leakage_probe(const Matrix& train_x, std::span<const int> train_z,
                            const Matrix& test_x, std::span<const int> test_z,
                            const ProbeConfig& config) {
  if (train_x.cols() != test_x.cols()) {
    throw ShapeError("leakage probe: train and test reps differ in dimension");
  }
  int classes = 0;
  std::vector<bool> present;
  for (int z : train_z) {
    if (z < 0) throw InputError("leakage probe: negative group id");
    classes = std::max(classes, z + 1);
  }
  for (int z : test_z) classes = std::max(classes, z + 1);
  present.assign(classes, false);
  for (int z : train_z) present[z] = true;
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw InputError(
        "leakage probe: training representations carry a single group; the "
        "probe would be degenerate");
  }
  const LayerStack net = train_probe(train_x, train_z, classes, config, 1);
  Rng eval_rng(config.seed, 0x9c);
  const std::vector<int> pred =
      argmax_rows(forward(net, test_x, Mode::kEval, eval_rng).output);
  return accuracy_eval(pred, test_z);
}

// Cumulative block ends for n rows. The first block must be non-empty; later
// blocks hold at least one row.
inline std::vector<std::size_t> mdl_block_ends(std::size_t n,
                                               const ProbeConfig& config) {
  config.validate();
  std::vector<std::size_t> ends;
  for (double f : config.block_fractions) {
    std::size_t e = static_cast<std::size_t>(
        std::floor(f * static_cast<double>(n) + 0.5));
    if (ends.empty()) {
      if (e == 0) {
        throw ConfigError("mdl: first block is empty for n=" +
                          std::to_string(n) + " and fraction " +
                          std::to_string(f));
      }
    } else {
      if (ends.back() == n) break;
      e = std::max(e, ends.back() + 1);
    }
    ends.push_back(std::min(e, n));
  }
  ends.back() = n;
  return ends;
}

// Online codelength, in bits, of the labels given the representations:
//   t1 * log2(C) + sum_k -log2 p_k(block k+1), where p_k is a probe trained on
// every row before block k+1. Rows are visited in a seeded random order.
inline PrivacyScore mdl_online(const Matrix& reps, std::span<const int> labels,
                               int num_classes, const ProbeConfig& config) {
  using namespace probe_internal;
  if (static_cast<std::size_t>(reps.rows()) != labels.size()) {
    throw ShapeError("mdl: representation rows and label count differ");
  }
  if (num_classes < 2) throw InputError("mdl needs at least two classes");
  check_labels(labels, num_classes);
  const std::size_t n = labels.size();
  PrivacyScore score;
  score.block_ends = mdl_block_ends(n, config);
  const double log2c = std::log2(static_cast<double>(num_classes));
  score.uniform_codelength_bits = static_cast<double>(n) * log2c;

  Rng order_rng(config.seed, 0x3d1);
  std::vector<std::size_t> order = iota_indices(n);
  shuffle(order, order_rng);
  const Matrix x = gather_rows(reps, order);
  const std::vector<int> y = gather(labels, order);

  double bits = static_cast<double>(score.block_ends.front()) * log2c;
  Rng eval_rng(config.seed, 0x3d2);
  for (std::size_t k = 1; k < score.block_ends.size(); ++k) {
    const std::size_t seen = score.block_ends[k - 1];
    const std::size_t stop = score.block_ends[k];
    const LayerStack net =
        train_probe(x.topRows(static_cast<Eigen::Index>(seen)),
                    std::span<const int>(y.data(), seen), num_classes, config,
                    100 + k);
    const Matrix block_x = x.middleRows(static_cast<Eigen::Index>(seen),
                                        static_cast<Eigen::Index>(stop - seen));
    const Matrix logp =
        log_softmax(forward(net, block_x, Mode::kEval, eval_rng).output);
    for (std::size_t i = seen; i < stop; ++i) {
      bits -= logp(static_cast<Eigen::Index>(i - seen), y[i]) / std::log(2.0);
    }
  }
  score.mdl_bits = bits;
  return score;
}

}  // namespace federate
