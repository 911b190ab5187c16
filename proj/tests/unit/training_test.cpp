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

#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "federate/training/run.hpp"
#include "gradcheck.hpp"

namespace federate {
namespace {

Dataset skewed_synthetic(std::uint64_t seed, std::size_t n = 8000) {
  Dataset d = split_dataset(
                  make_synthetic(SyntheticSpec::axis_aligned(n, 8, 1.0, 3.0, 1.0,
                                                             1000 + seed)),
                  {}, seed)
                  .dataset;
  return skew_subgroups(d, SkewSpec::correlated_40_10_10_40(), seed);
}

Dataset separable(std::uint64_t seed) {
  return split_dataset(make_synthetic(SyntheticSpec::axis_aligned(
                           2000, 4, 6.0, 1.0, 1.0, seed)),
                       {}, seed)
      .dataset;
}

TrainConfig quick(Method mode, std::uint64_t seed = 0) {
  TrainConfig c;
  c.mode = mode;
  c.seed = seed;
  c.batch_size = 64;
  c.epochs = 5;
  return c;
}

TEST(LambdaSchedule, StartsAtZeroAndMatchesTheLogistic) {
  TrainConfig c;
  c.epochs = 30;
  c.schedule_scale = 10.0;
  c.lambda_max = 2.0;
  EXPECT_DOUBLE_EQ(lambda_schedule(0, c), 0.0);
  // p = 10 * 15 / 30 = 5 -> 2 / (1 + e^-5) - 1 = tanh(2.5).
  EXPECT_NEAR(lambda_schedule(15, c), 2.0 * 0.9866142981514303, 1e-15);
}

TEST(LambdaSchedule, MonotoneAndBoundedProperty) {
  for (double lmax : {0.1, 1.0, 2.9}) {
    for (int epochs : {1, 7, 30, 40}) {
      TrainConfig c;
      c.epochs = epochs;
      c.lambda_max = lmax;
      double prev = -1.0;
      for (int i = 0; i < epochs; ++i) {
        const double l = lambda_schedule(i, c);
        EXPECT_GT(l, prev);
        EXPECT_LT(l, lmax);
        prev = l;
      }
    }
  }
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.epsilon = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.lambda_max = -0.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ParseMethod, NamesRoundTrip) {
  for (Method m : {Method::kRandom, Method::kUnconstrained, Method::kNoise,
                   Method::kAdversarial, Method::kFederate}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_THROW(parse_method("laplace"), ConfigError);
}

// Full objective L_class - lambda * L_adv of one batch, no dropout or noise.
double objective(const ModelParams& m, const Matrix& x, const std::vector<int>& y,
                 const std::vector<int>& z, double lambda) {
  Rng unused(0);
  const Matrix rep =
      l1_normalize_rows(forward(m.encoder, x, Mode::kEval, unused).output)
          .normalized;
  const double lc =
      cross_entropy(forward(m.classifier, rep, Mode::kEval, unused).output, y).loss;
  const double la =
      cross_entropy(forward(m.adversary, rep, Mode::kEval, unused).output, z).loss;
  return lc - lambda * la;
}

TEST(BatchGradients, EncoderMatchesCentralDifferencesOfTheObjective) {
  ModelConfig mc;
  mc.hidden = 6;
  mc.rep_dim = 4;
  mc.adversary_hidden = 5;
  mc.dropout = 0.0;
  ModelParams m = make_model(3, 2, 2, mc, 11);
  Rng rng(2, 0);
  Matrix x(7, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const std::vector<int> y{0, 1, 1, 0, 1, 0, 0}, z{1, 1, 0, 0, 1, 0, 1};
  TrainConfig c = quick(Method::kAdversarial);
  const double lambda = 0.7;
  TrainStreams streams(0);
  const BatchGradients g = batch_gradients(m, x, y, z, c, lambda, streams);
  const StackGrads numeric = testing::numeric_gradient(
      m.encoder, [&] { return objective(m, x, y, z, lambda); });
  EXPECT_LT(testing::relative_error(g.encoder, numeric), 1e-6);
}

TEST(BatchGradients, ReversalContractHolds) {
  ModelParams m = make_model(5, 2, 2, {}, 3);
  Rng rng(4, 0);
  Matrix x(32, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  std::vector<int> y(32), z(32);
  for (int i = 0; i < 32; ++i) {
    y[i] = i % 2;
    z[i] = (i / 2) % 2;
  }
  for (double lambda : {0.0, 0.3, 2.9}) {
    TrainStreams streams(9);
    const BatchGradients g = batch_gradients(
        m, x, y, z, quick(Method::kFederate), lambda, streams, true);
    StackGrads expected = g.encoder_class;
    for (std::size_t l = 0; l < expected.weight.size(); ++l) {
      expected.weight[l] -= lambda * g.encoder_adv.weight[l];
      expected.bias[l] -= lambda * g.encoder_adv.bias[l];
    }
    EXPECT_LT(testing::relative_error(g.encoder, expected), 1e-10);
  }
}

TEST(Training, SameSeedIsBitIdentical) {
  const Dataset d = separable(1);
  const TrainConfig c = quick(Method::kFederate, 3);
  const TrainRunOutput a = train_run(c, d), b = train_run(c, d);
  EXPECT_EQ(to_json(a.result).dump(), to_json(b.result).dump());
  EXPECT_EQ(a.model.encoder.layers()[0].weight, b.model.encoder.layers()[0].weight);
}

TEST(Training, FederateWithZeroLambdaEqualsNoiseMode) {
  const Dataset d = separable(2);
  TrainConfig fed = quick(Method::kFederate, 5);
  fed.lambda_max = 0.0;
  const TrainConfig noise = quick(Method::kNoise, 5);
  const TrainRunOutput a = train_run(fed, d), b = train_run(noise, d);
  EXPECT_EQ(a.result.test.accuracy, b.result.test.accuracy);
  EXPECT_EQ(a.result.test.gap, b.result.test.gap);
  for (std::size_t l = 0; l < a.model.encoder.size(); ++l) {
    EXPECT_EQ(a.model.encoder.layers()[l].weight, b.model.encoder.layers()[l].weight);
  }
}

TEST(Training, SeparableDataIsLearned) {
  TrainConfig c = quick(Method::kUnconstrained, 0);
  c.epochs = 20;
  EXPECT_GE(train_run(c, separable(3)).result.test.accuracy, 0.95);
}

TEST(Training, TinyEpsilonIsNearChance) {
  TrainConfig c = quick(Method::kNoise, 0);
  c.epsilon = 0.01;
  c.epochs = 10;
  EXPECT_NEAR(train_run(c, separable(4)).result.test.accuracy, 0.5, 0.03);
}

TEST(Training, HistoryRecordsEveryEpoch) {
  const std::string path =
      (std::filesystem::temp_directory_path() / "federate_history.jsonl").string();
  std::filesystem::remove(path);
  RunOptions options;
  options.history_path = path;
  const TrainConfig c = quick(Method::kAdversarial, 1);
  const TrainRunOutput out = train_run(c, separable(5), options);
  ASSERT_EQ(out.history.size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(out.history[i].epoch, i);
    EXPECT_DOUBLE_EQ(out.history[i].lambda_effective, lambda_schedule(i, c));
  }
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["mode"], "adversarial");
    ++lines;
  }
  EXPECT_EQ(lines, 5);
  std::filesystem::remove(path);
}

TEST(Training, AdversaryShrinksTheGapOnSkewedData) {
  const Dataset d = skewed_synthetic(0);
  TrainConfig c = quick(Method::kUnconstrained, 0);
  c.epochs = 30;
  const double unconstrained = train_run(c, d).result.test.gap;
  c.mode = Method::kAdversarial;
  const double adversarial = train_run(c, d).result.test.gap;
  EXPECT_LT(adversarial, unconstrained);
}

TEST(Training, RandomModeHasNoModel) {
  EXPECT_THROW(train_run(quick(Method::kRandom), separable(1)), UsageError);
}

TEST(Training, MissingGroupInTrainIsAnInputError) {
  Dataset d = separable(1);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d.split[i] == Split::kTrain && d.sensitive[i] == 1)) keep.push_back(i);
  }
  EXPECT_THROW(train_run(quick(Method::kUnconstrained), d.subset(keep)),
               InputError);
}

TEST(Evaluation, NoiseIsFreshPerCall) {
  const ModelParams m = make_model(4, 2, 2, {}, 0);
  Rng rng(1, stream::kEvalNoise);
  const Matrix x = Matrix::Ones(3, 4);
  const TrainConfig c = quick(Method::kNoise);
  EXPECT_NE(private_representation(m, x, c, rng),
            private_representation(m, x, c, rng));
  const TrainConfig plain = quick(Method::kUnconstrained);
  EXPECT_EQ(private_representation(m, x, plain, rng),
            private_representation(m, x, plain, rng));
}

TEST(Evaluation, RepeatedEvaluationIsIdentical) {
  const Dataset d = separable(6);
  const TrainConfig c = quick(Method::kFederate, 2);
  const TrainRunOutput out = train_run(c, d);
  EvalOptions e;
  e.privacy_metrics = true;
  e.probe.epochs = 3;
  e.probe.block_fractions = {0.1, 0.5, 1.0};
  EXPECT_EQ(to_json(evaluate_run(out.model, d, c, e)).dump(),
            to_json(evaluate_run(out.model, d, c, e)).dump());
}

TEST(Evaluation, RandomBaselineUsesExpectedValues) {
  const Dataset d = separable(7);
  const RunResult r = evaluate_random(d, 0);
  EXPECT_DOUBLE_EQ(r.test.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(r.test.gap, 0.0);
  EXPECT_DOUBLE_EQ(*r.mdl_bits, static_cast<double>(d.count(Split::kTest)));
  EXPECT_FALSE(r.leakage.has_value());
}

TEST(RunResultJson, RoundTrip) {
  RunResult r;
  r.mode = Method::kFederate;
  r.epsilon = 9.0;
  r.lambda_max = 0.3;
  r.seed = 4;
  r.val = {0.81, 0.05};
  r.test = {0.8, 0.07};
  r.leakage = 0.6;
  r.mdl_bits = 1234.5;
  r.uniform_bits = 1600.0;
  EXPECT_EQ(to_json(run_result_from_json(to_json(r))).dump(), to_json(r).dump());
  EXPECT_THROW(run_result_from_json(nlohmann::json{{"mode", "federate"}}),
               InputError);
}

}  // namespace
}  // namespace federate
