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

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "federate/metrics/probe.hpp"
#include "federate/training/trainer.hpp"

namespace federate {

struct SplitMetrics {
  double accuracy = 0.0;
  double gap = 0.0;
};

struct RunResult {
  Method mode = Method::kUnconstrained;
  std::optional<double> epsilon;
  std::optional<double> lambda_max;
  std::uint64_t seed = 0;
  SplitMetrics val;
  SplitMetrics test;
  std::optional<double> leakage;
  std::optional<double> mdl_bits;
  std::optional<double> uniform_bits;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

namespace run_internal {

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> optional_double(const nlohmann::json& j,
                                             const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace run_internal

inline nlohmann::json to_json(const RunResult& r) {
  using run_internal::optional_json;
  nlohmann::json j = {
      {"mode", to_string(r.mode)},
      {"epsilon", optional_json(r.epsilon)},
      {"lambda_max", optional_json(r.lambda_max)},
      {"seed", r.seed},
      {"val", {{"acc", r.val.accuracy}, {"gap", r.val.gap}}},
      {"test",
       {{"acc", r.test.accuracy},
        {"gap", r.test.gap},
        {"leakage", optional_json(r.leakage)},
        {"mdl_bits", optional_json(r.mdl_bits)},
        {"uniform_bits", optional_json(r.uniform_bits)}}}};
  if (r.error) j["error"] = *r.error;
  return j;
}

inline RunResult run_result_from_json(const nlohmann::json& j) {
  using run_internal::optional_double;
  try {
    RunResult r;
    r.mode = parse_method(j.at("mode").get<std::string>());
    r.epsilon = optional_double(j, "epsilon");
    r.lambda_max = optional_double(j, "lambda_max");
    r.seed = j.at("seed").get<std::uint64_t>();
    r.val.accuracy = j.at("val").at("acc").get<double>();
    r.val.gap = j.at("val").at("gap").get<double>();
    const nlohmann::json& t = j.at("test");
    r.test.accuracy = t.at("acc").get<double>();
    r.test.gap = t.at("gap").get<double>();
    r.leakage = optional_double(t, "leakage");
    r.mdl_bits = optional_double(t, "mdl_bits");
    r.uniform_bits = optional_double(t, "uniform_bits");
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed run result: ") + e.what());
  }
}

struct EvalOptions {
  bool privacy_metrics = false;
  ProbeConfig probe;
};

inline SplitMetrics split_metrics(const ModelParams& model,
                                  const SplitView& view, int num_classes,
                                  const Matrix& reps) {
  const std::vector<int> pred = classify(model, reps);
  return {accuracy_eval(pred, view.y),
          fairness_score(pred, view.y, view.z, num_classes).scalar};
}

// Accuracy and fairness of C(E_priv(x)) on validation and test; optionally
// leakage (probe fit on validation reps, scored on test reps) and online
// codelength of z given the test reps. Private modes draw fresh noise from a
// dedicated stream, so repeated evaluations are identical.
inline RunResult evaluate_run(const ModelParams& model, const Dataset& dataset,
                              const TrainConfig& config,
                              const EvalOptions& options = {}) {
  RunResult r;
  r.mode = config.mode;
  r.epsilon = config.effective_epsilon();
  r.lambda_max = config.effective_lambda();
  r.seed = config.seed;
  const SplitView valid = SplitView::of(dataset, Split::kValid);
  const SplitView test = SplitView::of(dataset, Split::kTest);
  Rng noise(config.seed, stream::kEvalNoise);
  const Matrix val_reps = private_representation(model, valid.x, config, noise);
  const Matrix test_reps = private_representation(model, test.x, config, noise);
  r.val = split_metrics(model, valid, dataset.num_classes, val_reps);
  r.test = split_metrics(model, test, dataset.num_classes, test_reps);
  if (options.privacy_metrics) {
    r.leakage = leakage_probe(val_reps, valid.z, test_reps, test.z,
                              options.probe);
    const PrivacyScore mdl =
        mdl_online(test_reps, test.z, dataset.num_groups, options.probe);
    r.mdl_bits = mdl.mdl_bits;
    r.uniform_bits = mdl.uniform_codelength_bits;
  }
  return r;
}

// Reference row for a predictor that ignores its input: expected accuracy
// 1/C and zero gap. Leakage is undefined; the codelength is the uniform code.
inline RunResult evaluate_random(const Dataset& dataset, std::uint64_t seed) {
  RunResult r;
  r.mode = Method::kRandom;
  r.seed = seed;
  const double chance = 1.0 / static_cast<double>(dataset.num_classes);
  r.val = {chance, 0.0};
  r.test = {chance, 0.0};
  r.mdl_bits = static_cast<double>(dataset.count(Split::kTest)) *
               std::log2(static_cast<double>(dataset.num_groups));
  r.uniform_bits = r.mdl_bits;
  return r;
}

struct TrainRunOutput {
  ModelParams model;
  TrainHistory history;
  RunResult result;
};

inline void append_history(const std::string& path, const TrainConfig& config,
                           const EpochRecord& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw IngestionError("cannot open history log '" + path + "'");
  nlohmann::json j = to_json(record);
  j["mode"] = to_string(config.mode);
  j["seed"] = config.seed;
  out << j.dump() << '\n';
}

struct RunOptions {
  EvalOptions eval;
  std::optional<std::string> history_path;
};

inline TrainRunOutput train_run(const TrainConfig& config,
                                const Dataset& dataset,
                                const RunOptions& options = {}) {
  config.validate();
  if (config.mode == Method::kRandom) {
    throw UsageError("mode 'random' has no model to train");
  }
  dataset.validate();
  dataset.require_train_coverage();
  const SplitView train = SplitView::of(dataset, Split::kTrain);
  const SplitView valid = SplitView::of(dataset, Split::kValid);

  TrainRunOutput out{make_model(dataset.dim(), dataset.num_classes,
                                dataset.num_groups, config.model, config.seed),
                     {},
                     {}};
  OptimizerStates optim = OptimizerStates::for_model(out.model, config.lr);
  TrainStreams streams(config.seed);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochRecord record = train_epoch(out.model, train, valid, config, optim,
                                     streams, epoch, dataset.num_classes);
    if (options.history_path) {
      append_history(*options.history_path, config, record);
    }
    out.history.push_back(record);
  }
  out.result = evaluate_run(out.model, dataset, config, options.eval);
  return out;
}

}  // namespace federate
