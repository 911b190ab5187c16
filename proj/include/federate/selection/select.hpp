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
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "federate/training/run.hpp"

namespace federate {

struct SelectionResult {
  double rt = 0.0;
  double alpha_star = 0.0;  // percent
  RunResult chosen;
  std::size_t candidate_count = 0;
};

struct SelectOptions {
  // Break gap ties by lower leakage before the accuracy/epsilon/lambda order.
  bool privacy_criterion = false;
};

namespace select_internal {

inline double percent(double fraction) { return 100.0 * fraction; }

inline double epsilon_key(const RunResult& r) {
  return r.epsilon.value_or(std::numeric_limits<double>::infinity());
}

inline double lambda_key(const RunResult& r) {
  return r.lambda_max.value_or(0.0);
}

inline double leakage_key(const RunResult& r) {
  return r.leakage.value_or(std::numeric_limits<double>::infinity());
}

}  // namespace select_internal

// Relaxation-threshold selection over the runs of one mode and seed.
// alpha* is the best validation accuracy (percent); among runs whose accuracy
// lies in [alpha* - rt, alpha*] the one with the smallest validation gap wins.
// Ties: higher accuracy, then lower epsilon, then lower lambda, then seed.
inline SelectionResult select_with_rt(std::span<const RunResult> runs,
                                      double rt,
                                      const SelectOptions& options = {}) {
  using namespace select_internal;
  if (!(rt >= 0.0)) throw ParameterError("rt must be >= 0");
  std::vector<const RunResult*> ok;
  for (const RunResult& r : runs) {
    if (r.ok()) ok.push_back(&r);
  }
  if (ok.empty()) throw UsageError("select_with_rt: no successful runs");

  SelectionResult out;
  out.rt = rt;
  out.alpha_star = -std::numeric_limits<double>::infinity();
  for (const RunResult* r : ok) {
    out.alpha_star = std::max(out.alpha_star, percent(r->val.accuracy));
  }
  const double floor = out.alpha_star - rt;
  auto key = [&](const RunResult* r) {
    return std::make_tuple(r->val.gap,
                           options.privacy_criterion ? leakage_key(*r) : 0.0,
                           -r->val.accuracy, epsilon_key(*r), lambda_key(*r),
                           r->seed);
  };
  const RunResult* best = nullptr;
  for (const RunResult* r : ok) {
    if (percent(r->val.accuracy) < floor) continue;
    ++out.candidate_count;
    if (best == nullptr || key(r) < key(best)) best = r;
  }
  out.chosen = *best;
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

// Sample mean and standard deviation (n - 1 denominator, 0 for one value).
inline MeanStd aggregate_seeds(std::span<const double> values) {
  if (values.empty()) throw UsageError("aggregate_seeds: no values");
  MeanStd s;
  s.count = values.size();
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

// Table columns of one method; accuracy, gap and leakage in percent, MDL in
// bits. Leakage and MDL are absent when no selected run carries them.
struct MethodSummary {
  Method mode = Method::kUnconstrained;
  MeanStd accuracy;
  MeanStd gap;
  std::optional<MeanStd> leakage;
  std::optional<MeanStd> mdl_bits;
  std::size_t seeds = 0;
};

inline MethodSummary summarize(Method mode,
                               std::span<const RunResult> selected) {
  if (selected.empty()) throw UsageError("summarize: no selected runs");
  MethodSummary s;
  s.mode = mode;
  s.seeds = selected.size();
  std::vector<double> acc, gap, leak, mdl;
  for (const RunResult& r : selected) {
    acc.push_back(100.0 * r.test.accuracy);
    gap.push_back(100.0 * r.test.gap);
    if (r.leakage) leak.push_back(100.0 * *r.leakage);
    if (r.mdl_bits) mdl.push_back(*r.mdl_bits);
  }
  s.accuracy = aggregate_seeds(acc);
  s.gap = aggregate_seeds(gap);
  if (!leak.empty()) s.leakage = aggregate_seeds(leak);
  if (!mdl.empty()) s.mdl_bits = aggregate_seeds(mdl);
  return s;
}

// Per-seed selection for every seed present among `runs` (one mode).
inline std::vector<RunResult> select_per_seed(std::span<const RunResult> runs,
                                              double rt,
                                              const SelectOptions& options = {}) {
  std::map<std::uint64_t, std::vector<RunResult>> by_seed;
  for (const RunResult& r : runs) by_seed[r.seed].push_back(r);
  std::vector<RunResult> chosen;
  for (const auto& [seed, group] : by_seed) {
    bool any_ok = false;
    for (const RunResult& r : group) any_ok |= r.ok();
    if (!any_ok) continue;
    chosen.push_back(select_with_rt(group, rt, options).chosen);
  }
  return chosen;
}

}  // namespace federate
