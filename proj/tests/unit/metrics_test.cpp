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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "federate/metrics/fairness.hpp"
#include "federate/metrics/probe.hpp"

namespace federate {
namespace {

TEST(Accuracy, SmallExample) {
  const std::vector<int> y{0, 1, 1, 0}, p{0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(accuracy_eval(p, y), 0.75);
}

TEST(Accuracy, Errors) {
  const std::vector<int> a{0, 1}, b{0};
  EXPECT_THROW(accuracy_eval(a, b), ShapeError);
  EXPECT_THROW(accuracy_eval(std::vector<int>{}, std::vector<int>{}), UsageError);
}

TEST(TprGap, SmallExample) {
  // Positives in group 1: rows 0..3, 3 of 4 hit. Group 0: rows 4..5, 1 of 2.
  const std::vector<int> y{1, 1, 1, 1, 1, 1, 0, 0};
  const std::vector<int> p{1, 1, 1, 0, 1, 0, 1, 0};
  const std::vector<int> z{1, 1, 1, 1, 0, 0, 0, 1};
  EXPECT_DOUBLE_EQ(tpr_gap(p, y, z), 0.75 - 0.5);
}

TEST(TprGap, ClassAbsentFromGroupIsAnError) {
  const std::vector<int> y{1, 0}, p{1, 0}, z{1, 0};
  try {
    tpr_gap(p, y, z);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("class 1"), std::string::npos);
  }
}

TEST(Grms, KnownValue) {
  const std::vector<double> g{0.3, 0.4};
  EXPECT_NEAR(grms(g), 0.35355339, 1e-8);
}

TEST(Grms, PermutationInvariantProperty) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> g(1 + trial % 7);
    for (double& v : g) v = u(gen);
    const double base = grms(g);
    std::shuffle(g.begin(), g.end(), gen);
    EXPECT_NEAR(grms(g), base, 1e-15);
    for (double& v : g) v = -v;
    EXPECT_NEAR(grms(g), base, 1e-15);
  }
}

TEST(FairnessScore, BinaryUsesAbsoluteGap) {
  const std::vector<int> y{1, 1, 1, 1, 0, 0}, p{0, 0, 1, 1, 0, 0},
      z{1, 1, 0, 0, 1, 0};
  const FairnessScore s = fairness_score(p, y, z, 2);
  EXPECT_DOUBLE_EQ(s.signed_gap, -1.0);
  EXPECT_DOUBLE_EQ(s.scalar, 1.0);
}

TEST(FairnessScore, MulticlassUsesGrms) {
  // Class 0: group 1 hits 1/1, group 0 hits 0/1 -> gap 1.
  // Class 1: both groups hit everything -> gap 0. Class 2: same.
  const std::vector<int> y{0, 0, 1, 1, 2, 2}, p{0, 1, 1, 1, 2, 2},
      z{1, 0, 1, 0, 1, 0};
  const FairnessScore s = fairness_score(p, y, z, 3);
  EXPECT_NEAR(s.scalar, std::sqrt(1.0 / 3.0), 1e-15);
}

Matrix gaussian(std::size_t n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed, 1);
  Matrix x(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

std::vector<int> coin_labels(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, 2);
  std::vector<int> z(n);
  for (int& v : z) v = rng.uniform() < 0.5 ? 1 : 0;
  return z;
}

TEST(Leakage, OneHotGroupIsFullyLeaked) {
  const std::size_t n = 2000;
  const std::vector<int> z = coin_labels(n, 1);
  Matrix x = gaussian(n, 4, 3) * 0.1;
  for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), z[i]) += 1.0;
  const Matrix train = x.topRows(1000), test = x.bottomRows(1000);
  const std::vector<int> ztr(z.begin(), z.begin() + 1000), zte(z.begin() + 1000, z.end());
  EXPECT_GE(leakage_probe(train, ztr, test, zte, {}), 0.99);
}

TEST(Leakage, IndependentNoiseIsNearChance) {
  const std::size_t n = 10000;
  const std::vector<int> z = coin_labels(2 * n, 4);
  const Matrix x = gaussian(2 * n, 8, 5);
  const std::vector<int> ztr(z.begin(), z.begin() + n), zte(z.begin() + n, z.end());
  const double leak = leakage_probe(x.topRows(n), ztr, x.bottomRows(n), zte, {});
  EXPECT_NEAR(leak, 0.5, 0.02);
}

TEST(Leakage, SingleGroupIsAnError) {
  const std::vector<int> z(10, 1);
  EXPECT_THROW(leakage_probe(gaussian(10, 2, 1), z, gaussian(10, 2, 2), z, {}),
               InputError);
}

TEST(Mdl, BlockEndsFollowFractions) {
  ProbeConfig config;
  const std::size_t n = 4096;
  const auto ends = mdl_block_ends(n, config);
  ASSERT_EQ(ends.size(), config.block_fractions.size());
  for (std::size_t k = 0; k < ends.size(); ++k) {
    EXPECT_EQ(ends[k], static_cast<std::size_t>(std::floor(
                           config.block_fractions[k] * n + 0.5)));
  }
}

TEST(Mdl, EmptyFirstBlockIsAConfigError) {
  EXPECT_THROW(mdl_block_ends(100, ProbeConfig{}), ConfigError);
}

TEST(Mdl, SingleBlockIsTheUniformCode) {
  ProbeConfig config;
  config.block_fractions = {1.0};
  const std::vector<int> z = coin_labels(300, 7);
  const PrivacyScore s = mdl_online(gaussian(300, 3, 1), z, 3, config);
  EXPECT_DOUBLE_EQ(s.mdl_bits, 300 * std::log2(3.0));
  EXPECT_DOUBLE_EQ(s.uniform_codelength_bits, 300 * std::log2(3.0));
}

TEST(Mdl, FirstBlockOfTenBinaryLabelsCostsTenBits) {
  ProbeConfig config;
  config.block_fractions = {1.0};
  const std::vector<int> z{0, 1, 1, 0, 1, 0, 0, 1, 1, 1};
  EXPECT_EQ(mdl_online(gaussian(10, 2, 3), z, 2, config).mdl_bits, 10.0);
}

TEST(Mdl, NeverBelowTheFirstBlockCostProperty) {
  const std::vector<int> z = coin_labels(1000, 21);
  Matrix x = Matrix::Zero(1000, 2);
  for (std::size_t i = 0; i < z.size(); ++i) x(static_cast<Eigen::Index>(i), z[i]) = 1.0;
  const PrivacyScore s = mdl_online(x, z, 2, {});
  EXPECT_GE(s.mdl_bits, static_cast<double>(s.block_ends.front()));
}

TEST(Mdl, RandomLabelsStayNearUniform) {
  const std::size_t n = 2048;
  const std::vector<int> z = coin_labels(n, 9);
  const PrivacyScore s = mdl_online(gaussian(n, 8, 10), z, 2, {});
  EXPECT_NEAR(s.mdl_bits / s.uniform_codelength_bits, 1.0, 0.05);
}

TEST(Mdl, PerfectlyEncodedLabelsCompress) {
  const std::size_t n = 2048;
  const std::vector<int> z = coin_labels(n, 11);
  Matrix x = Matrix::Zero(n, 2);
  for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), z[i]) = 1.0;
  const PrivacyScore s = mdl_online(x, z, 2, {});
  EXPECT_LE(s.mdl_bits, 0.2 * s.uniform_codelength_bits);
}

TEST(Mdl, SameSeedSameCodelength) {
  const std::vector<int> z = coin_labels(1000, 12);
  const Matrix x = gaussian(1000, 4, 13);
  EXPECT_EQ(mdl_online(x, z, 2, {}).mdl_bits, mdl_online(x, z, 2, {}).mdl_bits);
}

TEST(ProbeConfig, RejectsBadBlocks) {
  ProbeConfig c;
  c.block_fractions = {0.5, 0.25, 1.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c.block_fractions = {0.5, 0.9};
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace federate
