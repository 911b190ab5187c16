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
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "federate/data/dataset.hpp"
#include "federate/diffcore/grad_reverse.hpp"
#include "federate/diffcore/loss.hpp"
#include "federate/metrics/fairness.hpp"
#include "federate/privacy/mechanism.hpp"
#include "federate/training/model.hpp"
#include <json.hpp>

namespace federate {

struct TrainConfig {
  Method mode = Method::kUnconstrained;
  double lr = 0.001;
  std::size_t batch_size = 2000;
  int epochs = 30;
  double lambda_max = 1.0;
  double schedule_scale = 10.0;
  double epsilon = 10.0;
  std::uint64_t seed = 0;
  ModelConfig model;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (epochs <= 0) throw ConfigError("epochs must be positive");
    if (!(lambda_max >= 0.0)) throw ConfigError("lambda_max must be >= 0");
    if (!(schedule_scale > 0.0)) {
      throw ConfigError("schedule_scale must be positive");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw ConfigError("epsilon must be positive");
    }
  }

  // Hyperparameters a given mode actually reads.
  std::optional<double> effective_epsilon() const {
    return uses_noise(mode) ? std::optional<double>(epsilon) : std::nullopt;
  }
  std::optional<double> effective_lambda() const {
    return uses_adversary(mode) ? std::optional<double>(lambda_max)
                                : std::nullopt;
  }
};

// lambda_i = lambda_max * (2 / (1 + exp(-p_i)) - 1), p_i = scale * i / epochs.
inline double lambda_schedule(int epoch_index, const TrainConfig& config) {
  if (epoch_index < 0) throw UsageError("epoch index must be >= 0");
  const double p = config.schedule_scale * static_cast<double>(epoch_index) /
                   static_cast<double>(config.epochs);
  return config.lambda_max * (2.0 / (1.0 + std::exp(-p)) - 1.0);
}

struct EpochRecord {
  int epoch = 0;
  double class_loss = 0.0;
  double adv_loss = 0.0;
  double lambda_effective = 0.0;
  double val_accuracy = 0.0;
  double val_gap = 0.0;
};

inline nlohmann::json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"class_loss", r.class_loss},
          {"adv_loss", r.adv_loss},
          {"lambda_effective", r.lambda_effective},
          {"val_accuracy", r.val_accuracy},
          {"val_gap", r.val_gap}};
}

using TrainHistory = std::vector<EpochRecord>;

class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& what, EpochRecord record)
      : Error(what), record_(record) {}
  const EpochRecord& record() const { return record_; }

 private:
  EpochRecord record_;
};

// Rows of one split, extracted once.
struct SplitView {
  Matrix x;
  std::vector<int> y;
  std::vector<int> z;

  static SplitView of(const Dataset& d, Split s) {
    SplitView v;
    const std::vector<std::size_t> idx = d.rows(s);
    v.x.resize(static_cast<Eigen::Index>(idx.size()), d.dim());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      v.x.row(static_cast<Eigen::Index>(k)) =
          d.features.row(static_cast<Eigen::Index>(idx[k]));
      v.y.push_back(d.labels[idx[k]]);
      v.z.push_back(d.sensitive[idx[k]]);
    }
    return v;
  }
  std::size_t size() const { return y.size(); }
};

// Random engines of a run, one per stochastic component.
struct TrainStreams {
  Rng shuffle;
  Rng noise;
  Rng dropout_encoder;
  Rng dropout_classifier;
  Rng dropout_adversary;
  Rng validation_noise;

  explicit TrainStreams(std::uint64_t seed)
      : shuffle(seed, stream::kShuffle),
        noise(seed, stream::kNoise),
        dropout_encoder(seed, stream::kDropoutEncoder),
        dropout_classifier(seed, stream::kDropoutClassifier),
        dropout_adversary(seed, stream::kDropoutAdversary),
        validation_noise(seed, stream::kValidationNoise) {}
};

// E_priv(x) in evaluation mode: encode, L1-normalize, and (private modes) add
// fresh Laplace noise at scale 2/eps.
inline Matrix private_representation(const ModelParams& model, const Matrix& x,
                                     const TrainConfig& config, Rng& noise_rng) {
  Rng unused(0);
  const Matrix encoded = forward(model.encoder, x, Mode::kEval, unused).output;
  Matrix rep = l1_normalize_rows(encoded).normalized;
  if (uses_noise(config.mode)) {
    const PrivacyParams privacy(config.epsilon, model.rep_dim);
    rep += sample_laplace_matrix(privacy.noise_scale(), rep.rows(), rep.cols(),
                                 noise_rng);
  }
  return rep;
}

inline std::vector<int> classify(const ModelParams& model, const Matrix& reps) {
  Rng unused(0);
  return argmax_rows(forward(model.classifier, reps, Mode::kEval, unused).output);
}

// Gradients of one batch, split by branch. The combined encoder gradient is
// the class branch plus the reversed adversary branch.
struct BatchGradients {
  double class_loss = 0.0;
  double adv_loss = 0.0;
  StackGrads encoder;           // of L_class - lambda * L_adv
  StackGrads encoder_class;     // of L_class alone
  StackGrads encoder_adv;       // of L_adv alone (un-reversed)
  StackGrads classifier;
  StackGrads adversary;         // of L_adv
  bool has_adversary = false;
};

// One forward/backward pass over a batch. Reads the model, draws noise and
// dropout masks from `streams`, and updates nothing. When `split_branches`
// is set the two encoder branch gradients are also returned separately.
inline BatchGradients batch_gradients(const ModelParams& model,
                                      const Matrix& x, std::span<const int> y,
                                      std::span<const int> z,
                                      const TrainConfig& config, double lambda,
                                      TrainStreams& streams,
                                      bool split_branches = false) {
  BatchGradients out;
  ForwardResult enc =
      forward(model.encoder, x, Mode::kTrain, streams.dropout_encoder);
  const NormalizedRows norm = l1_normalize_rows(enc.output);
  Matrix rep = norm.normalized;
  if (uses_noise(config.mode)) {
    const PrivacyParams privacy(config.epsilon, model.rep_dim);
    rep += sample_laplace_matrix(privacy.noise_scale(), rep.rows(), rep.cols(),
                                 streams.noise);
  }

  Matrix rep_grad_adv;
  if (uses_adversary(config.mode)) {
    const GradientReversal reversal(lambda);
    ForwardResult adv = forward(model.adversary, reversal.forward(rep),
                                Mode::kTrain, streams.dropout_adversary);
    const LossResult adv_loss = cross_entropy(adv.output, z);
    BackwardResult adv_back = backward(model.adversary, adv.tape, adv_loss.grad);
    out.adv_loss = adv_loss.loss;
    out.adversary = std::move(adv_back.param_grads);
    out.has_adversary = true;
    rep_grad_adv = std::move(adv_back.input_grad);
  }

  ForwardResult cls =
      forward(model.classifier, rep, Mode::kTrain, streams.dropout_classifier);
  const LossResult cls_loss = cross_entropy(cls.output, y);
  BackwardResult cls_back = backward(model.classifier, cls.tape, cls_loss.grad);
  out.class_loss = cls_loss.loss;
  out.classifier = std::move(cls_back.param_grads);

  // Additive noise passes gradients through unchanged.
  Matrix rep_grad = cls_back.input_grad;
  if (out.has_adversary) {
    rep_grad += GradientReversal(lambda).backward(rep_grad_adv);
  }
  const Matrix enc_grad =
      l1_normalize_backward(enc.output, norm.norms, rep_grad);
  out.encoder = backward(model.encoder, enc.tape, enc_grad).param_grads;
  if (split_branches) {
    out.encoder_class =
        backward(model.encoder, enc.tape,
                 l1_normalize_backward(enc.output, norm.norms,
                                       cls_back.input_grad))
            .param_grads;
    if (out.has_adversary) {
      out.encoder_adv =
          backward(model.encoder, enc.tape,
                   l1_normalize_backward(enc.output, norm.norms, rep_grad_adv))
              .param_grads;
    }
  }
  return out;
}

inline EpochRecord validation_record(const ModelParams& model,
                                     const SplitView& valid,
                                     const TrainConfig& config, int num_classes,
                                     Rng& noise_rng) {
  EpochRecord r;
  if (valid.size() == 0) return r;
  const Matrix reps = private_representation(model, valid.x, config, noise_rng);
  const std::vector<int> pred = classify(model, reps);
  r.val_accuracy = accuracy_eval(pred, valid.y);
  r.val_gap = fairness_score(pred, valid.y, valid.z, num_classes).scalar;
  return r;
}

// One pass over the training rows in shuffled batches. Per batch: the
// adversary is updated on L(z, zhat) first, then encoder and classifier on
// L(y, yhat) - lambda_i * L(z, zhat) through gradient reversal.
inline EpochRecord train_epoch(ModelParams& model, const SplitView& train,
                               const SplitView& valid,
                               const TrainConfig& config,
                               OptimizerStates& optim, TrainStreams& streams,
                               int epoch_index, int num_classes) {
  if (train.size() == 0) throw InputError("train split is empty");
  const double lambda =
      uses_adversary(config.mode) ? lambda_schedule(epoch_index, config) : 0.0;
  std::vector<std::size_t> order = iota_indices(train.size());
  shuffle(order, streams.shuffle);

  double class_total = 0.0, adv_total = 0.0;
  for (std::size_t start = 0; start < order.size();
       start += config.batch_size) {
    const std::size_t stop = std::min(order.size(), start + config.batch_size);
    const auto rows = static_cast<Eigen::Index>(stop - start);
    Matrix bx(rows, train.x.cols());
    std::vector<int> by(stop - start), bz(stop - start);
    for (std::size_t k = start; k < stop; ++k) {
      bx.row(static_cast<Eigen::Index>(k - start)) =
          train.x.row(static_cast<Eigen::Index>(order[k]));
      by[k - start] = train.y[order[k]];
      bz[k - start] = train.z[order[k]];
    }
    BatchGradients g =
        batch_gradients(model, bx, by, bz, config, lambda, streams);
    if (!std::isfinite(g.class_loss) || !std::isfinite(g.adv_loss)) {
      EpochRecord bad;
      bad.epoch = epoch_index;
      bad.class_loss = g.class_loss;
      bad.adv_loss = g.adv_loss;
      bad.lambda_effective = lambda;
      throw TrainingDivergedError(
          "training diverged at epoch " + std::to_string(epoch_index) +
              " (non-finite loss)",
          bad);
    }
    if (g.has_adversary) adam_step(model.adversary, g.adversary, optim.adversary);
    adam_step(model.encoder, g.encoder, optim.encoder);
    adam_step(model.classifier, g.classifier, optim.classifier);
    class_total += g.class_loss * static_cast<double>(rows);
    adv_total += g.adv_loss * static_cast<double>(rows);
  }
  EpochRecord record = validation_record(model, valid, config, num_classes,
                                         streams.validation_noise);
  record.epoch = epoch_index;
  record.class_loss = class_total / static_cast<double>(train.size());
  record.adv_loss = adv_total / static_cast<double>(train.size());
  record.lambda_effective = lambda;
  return record;
}

}  // namespace federate
