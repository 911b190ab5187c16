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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "federate/selection/sweep.hpp"

namespace federate {
namespace {

RunResult run(double acc_pct, double gap_pct, std::optional<double> lambda = {},
              std::optional<double> eps = {}, std::uint64_t seed = 0) {
  RunResult r;
  r.mode = Method::kFederate;
  r.seed = seed;
  r.lambda_max = lambda;
  r.epsilon = eps;
  r.val = {acc_pct / 100.0, gap_pct / 100.0};
  r.test = r.val;
  return r;
}

std::vector<RunResult> toy_table() {
  return {run(75, 5, 0.1), run(74.5, 2, 0.3), run(70, 1, 0.5)};
}

TEST(SelectWithRt, ToyTable) {
  const auto runs = toy_table();
  const SelectionResult s = select_with_rt(runs, 1.0);
  EXPECT_DOUBLE_EQ(s.alpha_star, 75.0);
  EXPECT_EQ(s.candidate_count, 2u);
  EXPECT_DOUBLE_EQ(s.chosen.val.accuracy, 0.745);
  EXPECT_DOUBLE_EQ(s.chosen.val.gap, 0.02);
}

TEST(SelectWithRt, ZeroRtReturnsMaxAccuracy) {
  const auto runs = toy_table();
  EXPECT_DOUBLE_EQ(select_with_rt(runs, 0.0).chosen.val.accuracy, 0.75);
}

TEST(SelectWithRt, HugeRtReturnsMinGap) {
  const auto runs = toy_table();
  EXPECT_DOUBLE_EQ(select_with_rt(runs, 100.0).chosen.val.gap, 0.01);
}

TEST(SelectWithRt, TiesPreferAccuracyThenEpsilonThenLambda) {
  std::vector<RunResult> runs{run(80, 3, 0.5, 12), run(81, 3, 0.9, 14)};
  EXPECT_DOUBLE_EQ(select_with_rt(runs, 5).chosen.val.accuracy, 0.81);
  runs = {run(80, 3, 0.5, 12), run(80, 3, 0.3, 9), run(80, 3, 0.1, 9)};
  const RunResult c = select_with_rt(runs, 5).chosen;
  EXPECT_EQ(*c.epsilon, 9.0);
  EXPECT_EQ(*c.lambda_max, 0.1);
}

TEST(SelectWithRt, PrivacyCriterionBreaksGapTies) {
  std::vector<RunResult> runs{run(80, 3, 0.1), run(79, 3, 0.3)};
  runs[0].leakage = 0.7;
  runs[1].leakage = 0.6;
  EXPECT_DOUBLE_EQ(select_with_rt(runs, 5).chosen.val.accuracy, 0.80);
  EXPECT_DOUBLE_EQ(select_with_rt(runs, 5, {true}).chosen.val.accuracy, 0.79);
}

TEST(SelectWithRt, IgnoresFailedRuns) {
  std::vector<RunResult> runs = toy_table();
  runs[1].error = "diverged";
  EXPECT_DOUBLE_EQ(select_with_rt(runs, 1.0).chosen.val.accuracy, 0.75);
  for (RunResult& r : runs) r.error = "diverged";
  EXPECT_THROW(select_with_rt(runs, 1.0), UsageError);
}

TEST(SelectWithRt, NegativeRtIsRejected) {
  const auto runs = toy_table();
  EXPECT_THROW(select_with_rt(runs, -0.1), ParameterError);
}

TEST(SelectWithRt, ChosenGapNonIncreasingInRtProperty) {
  Rng rng(3, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RunResult> runs;
    for (int k = 0; k < 12; ++k) {
      runs.push_back(run(60 + 20 * rng.uniform(), 10 * rng.uniform(), 0.1 * k));
    }
    double prev_gap = std::numeric_limits<double>::infinity();
    double prev_acc = std::numeric_limits<double>::infinity();
    for (double rt : {0.0, 0.5, 1.0, 3.0, 10.0, 100.0}) {
      const RunResult c = select_with_rt(runs, rt).chosen;
      EXPECT_LE(c.val.gap, prev_gap);
      EXPECT_LE(c.val.accuracy, prev_acc + 1e-12 + rt);
      prev_gap = c.val.gap;
      prev_acc = c.val.accuracy;
    }
  }
}

TEST(AggregateSeeds, SampleStd) {
  const std::vector<double> v{1.0, 3.0};
  const MeanStd s = aggregate_seeds(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_NEAR(s.std, 1.41421356, 1e-8);
  EXPECT_EQ(aggregate_seeds(std::vector<double>{4.0}).std, 0.0);
  EXPECT_THROW(aggregate_seeds(std::vector<double>{}), UsageError);
}

TEST(SelectPerSeed, OneChoicePerSeed) {
  std::vector<RunResult> runs{run(75, 5, 0.1, {}, 0), run(74.5, 2, 0.3, {}, 0),
                              run(70, 1, 0.1, {}, 1), run(60, 9, 0.3, {}, 1)};
  const auto chosen = select_per_seed(runs, 1.0);
  ASSERT_EQ(chosen.size(), 2u);
  EXPECT_DOUBLE_EQ(chosen[0].val.gap, 0.02);
  EXPECT_DOUBLE_EQ(chosen[1].val.gap, 0.01);
}

TEST(SweepGrid, RunsPerSeed) {
  const SweepGrid g;
  EXPECT_EQ(g.runs_per_seed(Method::kFederate), 150u);
  EXPECT_EQ(g.runs_per_seed(Method::kAdversarial), 15u);
  EXPECT_EQ(g.runs_per_seed(Method::kNoise), 10u);
  EXPECT_EQ(g.runs_per_seed(Method::kUnconstrained), 1u);
  EXPECT_EQ(g.runs_per_seed(Method::kRandom), 1u);
  EXPECT_EQ(sweep_keys(g).size(), 5u * (150 + 15 + 10 + 1 + 1));
}

TEST(SweepGrid, Validation) {
  SweepGrid g;
  g.lambdas = {};
  EXPECT_THROW(g.validate(), ConfigError);
  g = {};
  g.epsilons = {0.0};
  EXPECT_THROW(g.validate(), ConfigError);
}

struct SweepFixture : ::testing::Test {
  Dataset data = split_dataset(make_synthetic(SyntheticSpec::axis_aligned(
                                   600, 4, 2.0, 2.0, 1.0, 1)),
                               {}, 1)
                     .dataset;
  SweepGrid grid;
  TrainConfig base;
  std::string dir;

  void SetUp() override {
    grid.modes = {Method::kRandom, Method::kUnconstrained, Method::kFederate};
    grid.lambdas = {0.1, 0.5};
    grid.epsilons = {8, 16};
    grid.seed_count = 2;
    base.epochs = 2;
    base.batch_size = 64;
    dir = (std::filesystem::temp_directory_path() /
           ("federate_sweep_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name())))
              .string();
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
  }
  void TearDown() override { std::filesystem::remove_all(dir); }

  SweepOptions options(const std::string& name, std::size_t workers) {
    SweepOptions o;
    o.workers = workers;
    o.results_path = dir + "/" + name;
    o.probe.epochs = 2;
    o.probe.block_fractions = {0.1, 0.5, 1.0};
    return o;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_F(SweepFixture, WorkerCountDoesNotChangeTheBytes) {
  run_sweep(grid, data, base, options("one.jsonl", 1));
  run_sweep(grid, data, base, options("two.jsonl", 2));
  const std::string a = slurp(dir + "/one.jsonl");
  EXPECT_EQ(a, slurp(dir + "/two.jsonl"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 2 * (1 + 1 + 4));
}

TEST_F(SweepFixture, ResumeSkipsFinishedRunsAndMatchesAFreshSweep) {
  const SweepOptions o = options("r.jsonl", 1);
  run_sweep(grid, data, base, o);
  const std::string full = slurp(*o.results_path);
  // Keep only the first three lines, as if the sweep had been interrupted.
  std::istringstream lines(full);
  std::string line, partial;
  for (int i = 0; i < 3 && std::getline(lines, line); ++i) partial += line + "\n";
  {
    std::ofstream out(*o.results_path, std::ios::trunc);
    out << partial;
  }
  run_sweep(grid, data, base, o);
  EXPECT_EQ(slurp(*o.results_path), full);
}

TEST_F(SweepFixture, SelectedRunsCarryPrivacyMetrics) {
  const auto results = run_sweep(grid, data, base, options("p.jsonl", 1));
  for (Method m : {Method::kUnconstrained, Method::kFederate}) {
    std::vector<RunResult> mode_runs;
    for (const RunResult& r : results) {
      if (r.mode == m) mode_runs.push_back(r);
    }
    for (const RunResult& c : select_per_seed(mode_runs, 1.0)) {
      EXPECT_TRUE(c.leakage.has_value());
      EXPECT_TRUE(c.mdl_bits.has_value());
    }
  }
}

TEST_F(SweepFixture, PrivacyFailureKeepsTheTrainedRun) {
  SweepOptions o = options("k.jsonl", 1);
  o.probe.block_fractions = ProbeConfig{}.block_fractions;  // first block empty
  const auto results = run_sweep(grid, data, base, o);
  for (const RunResult& r : results) {
    EXPECT_TRUE(r.ok());
    EXPECT_FALSE(r.leakage.has_value());
  }
}

TEST_F(SweepFixture, FailuresAreRecordedNotFatal) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(data.split[i] == Split::kTrain && data.sensitive[i] == 1)) keep.push_back(i);
  }
  const auto results =
      run_sweep(grid, data.subset(keep), base, options("f.jsonl", 2));
  std::size_t failed = 0;
  for (const RunResult& r : results) {
    if (!r.ok()) {
      ++failed;
      EXPECT_NE(r.error->find("missing from the train split"), std::string::npos);
    }
  }
  EXPECT_EQ(failed, 2u * (1 + 4));
  EXPECT_EQ(read_results(dir + "/f.jsonl").size(), results.size());
}

TEST(ReadResults, MalformedLineNamesTheLine) {
  const std::string path =
      (std::filesystem::temp_directory_path() / "federate_bad.jsonl").string();
  {
    std::ofstream out(path);
    out << to_json(run(70, 1, 0.1)).dump() << "\n{not json\n";
  }
  try {
    read_results(path);
    FAIL();
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find(path + ":2"), std::string::npos);
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace federate
