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

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "federate/selection/select.hpp"

namespace federate {

struct SweepGrid {
  std::vector<Method> modes = {Method::kRandom, Method::kUnconstrained,
                               Method::kNoise, Method::kAdversarial,
                               Method::kFederate};
  std::vector<double> lambdas = default_lambdas();
  std::vector<double> epsilons = {8, 9, 10, 11, 12, 13, 14, 15, 16, 20};
  std::size_t seed_count = 5;
  std::uint64_t base_seed = 0;

  // 0.1, 0.3, ..., 2.9
  static std::vector<double> default_lambdas() {
    std::vector<double> v;
    for (int k = 0; k < 15; ++k) v.push_back((1 + 2 * k) / 10.0);
    return v;
  }

  void validate() const {
    if (modes.empty()) throw ConfigError("sweep: no modes");
    if (seed_count == 0) throw ConfigError("sweep: seed count must be >= 1");
    for (Method m : modes) {
      if (uses_adversary(m) && lambdas.empty()) {
        throw ConfigError("sweep: empty lambda axis");
      }
      if (uses_noise(m) && epsilons.empty()) {
        throw ConfigError("sweep: empty epsilon axis");
      }
    }
    for (double l : lambdas) {
      if (!(l >= 0.0)) throw ConfigError("sweep: lambda values must be >= 0");
    }
    for (double e : epsilons) {
      if (!(e > 0.0)) throw ConfigError("sweep: epsilon values must be > 0");
    }
  }

  std::vector<std::uint64_t> seeds() const {
    std::vector<std::uint64_t> s;
    for (std::size_t i = 0; i < seed_count; ++i) s.push_back(base_seed + i);
    return s;
  }

  // Hyperparameter tuples of one mode, excluding the seed axis.
  std::vector<std::pair<std::optional<double>, std::optional<double>>>
  points(Method m) const {
    std::vector<std::optional<double>> ls{std::nullopt}, es{std::nullopt};
    if (uses_adversary(m)) ls.assign(lambdas.begin(), lambdas.end());
    if (uses_noise(m)) es.assign(epsilons.begin(), epsilons.end());
    std::vector<std::pair<std::optional<double>, std::optional<double>>> out;
    for (const auto& l : ls) {
      for (const auto& e : es) out.emplace_back(l, e);
    }
    return out;
  }

  std::size_t runs_per_seed(Method m) const { return points(m).size(); }
};

// Identity of one run; results are ordered and deduplicated by it.
struct RunKey {
  Method mode;
  std::uint64_t seed;
  std::optional<double> lambda_max;
  std::optional<double> epsilon;

  auto tie() const {
    return std::make_tuple(static_cast<int>(mode), seed,
                           lambda_max.has_value(), lambda_max.value_or(0.0),
                           epsilon.has_value(), epsilon.value_or(0.0));
  }
  bool operator<(const RunKey& o) const { return tie() < o.tie(); }
  bool operator==(const RunKey& o) const { return tie() == o.tie(); }

  static RunKey of(const RunResult& r) {
    return {r.mode, r.seed, r.lambda_max, r.epsilon};
  }
};

enum class PrivacyMetrics { kNone, kSelected, kAll };

inline PrivacyMetrics parse_privacy_metrics(std::string_view s) {
  if (s == "none") return PrivacyMetrics::kNone;
  if (s == "selected") return PrivacyMetrics::kSelected;
  if (s == "all") return PrivacyMetrics::kAll;
  throw ConfigError("unknown privacy metrics setting '" + std::string(s) +
                    "' (none|selected|all)");
}

inline const char* to_string(PrivacyMetrics p) {
  switch (p) {
    case PrivacyMetrics::kNone: return "none";
    case PrivacyMetrics::kSelected: return "selected";
    case PrivacyMetrics::kAll: return "all";
  }
  return "?";
}

struct SweepOptions {
  std::size_t workers = 1;
  std::optional<std::string> results_path;
  PrivacyMetrics privacy = PrivacyMetrics::kSelected;
  double rt = 1.0;  // selection used to pick runs for privacy metrics
  SelectOptions select;
  ProbeConfig probe;
};

// FEDERATE_WORKERS overrides the configured worker count when set.
inline std::size_t resolve_workers(std::size_t configured) {
  if (const char* env = std::getenv("FEDERATE_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("FEDERATE_WORKERS must be a positive integer, got '") +
                      env + "'");
  }
  return std::max<std::size_t>(1, configured);
}

inline std::vector<RunResult> read_results(const std::string& path) {
  std::vector<RunResult> out;
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open results file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(run_result_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw IngestionError(path + ":" + std::to_string(line_no) + ": " +
                           e.what());
    } catch (const InputError& e) {
      throw IngestionError(path + ":" + std::to_string(line_no) + ": " +
                           e.what());
    }
  }
  return out;
}

inline void write_results(const std::string& path,
                          const std::vector<RunResult>& results) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IngestionError("cannot write results file '" + path + "'");
    for (const RunResult& r : results) out << to_json(r).dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

inline TrainConfig config_for(const TrainConfig& base, const RunKey& key) {
  TrainConfig c = base;
  c.mode = key.mode;
  c.seed = key.seed;
  if (key.lambda_max) c.lambda_max = *key.lambda_max;
  if (key.epsilon) c.epsilon = *key.epsilon;
  return c;
}

// Trains (or, for the random reference, evaluates) one grid point. Module
// errors are recorded on the result rather than propagated.
inline RunResult execute_run(const RunKey& key, const Dataset& dataset,
                             const TrainConfig& base, const EvalOptions& eval) {
  try {
    if (key.mode == Method::kRandom) return evaluate_random(dataset, key.seed);
    RunOptions options;
    options.eval = eval;
    return train_run(config_for(base, key), dataset, options).result;
  } catch (const std::exception& e) {
    RunResult r;
    r.mode = key.mode;
    r.seed = key.seed;
    r.lambda_max = key.lambda_max;
    r.epsilon = key.epsilon;
    r.error = e.what();
    return r;
  }
}

inline std::vector<RunKey> sweep_keys(const SweepGrid& grid) {
  std::vector<RunKey> keys;
  for (Method m : grid.modes) {
    for (std::uint64_t seed : grid.seeds()) {
      for (const auto& [l, e] : grid.points(m)) keys.push_back({m, seed, l, e});
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

// Runs every grid point not already present in the results file, on up to
// `workers` threads, then (optionally) attaches leakage and MDL to the run
// selected per mode and seed. The file is rewritten in key order, so its
// bytes do not depend on scheduling or on how often the sweep was resumed.
inline std::vector<RunResult> run_sweep(const SweepGrid& grid,
                                        const Dataset& dataset,
                                        const TrainConfig& base,
                                        const SweepOptions& options = {}) {
  grid.validate();
  base.validate();
  std::map<RunKey, RunResult> done;
  if (options.results_path && std::filesystem::exists(*options.results_path)) {
    for (RunResult& r : read_results(*options.results_path)) {
      if (r.ok()) done.emplace(RunKey::of(r), std::move(r));
    }
  }
  std::vector<RunKey> todo;
  for (const RunKey& k : sweep_keys(grid)) {
    if (!done.contains(k)) todo.push_back(k);
  }

  EvalOptions eval;
  eval.probe = options.probe;
  eval.privacy_metrics = options.privacy == PrivacyMetrics::kAll;
  std::mutex mu;
  std::optional<std::ofstream> journal;
  if (options.results_path) journal.emplace(*options.results_path, std::ios::app);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      RunResult r = execute_run(todo[i], dataset, base, eval);
      std::lock_guard<std::mutex> lock(mu);
      if (journal) *journal << to_json(r).dump() << '\n' << std::flush;
      done.insert_or_assign(todo[i], std::move(r));
    }
  };
  const std::size_t n_workers =
      std::min(resolve_workers(options.workers), std::max<std::size_t>(1, todo.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  journal.reset();

  if (options.privacy == PrivacyMetrics::kSelected) {
    EvalOptions with_privacy = eval;
    with_privacy.privacy_metrics = true;
    std::map<std::pair<Method, std::uint64_t>, std::vector<RunResult>> groups;
    for (const auto& [key, r] : done) {
      if (key.mode != Method::kRandom) groups[{key.mode, key.seed}].push_back(r);
    }
    for (const auto& [group_key, runs] : groups) {
      bool any_ok = false;
      for (const RunResult& r : runs) any_ok |= r.ok();
      if (!any_ok) continue;
      const RunResult chosen =
          select_with_rt(runs, options.rt, options.select).chosen;
      if (chosen.leakage && chosen.mdl_bits) continue;
      const RunKey key = RunKey::of(chosen);
      RunResult rerun = execute_run(key, dataset, base, with_privacy);
      if (!rerun.ok()) {
        // Keep the trained metrics; the privacy columns stay empty.
        std::cerr << "warning: privacy metrics failed for " << to_string(key.mode)
                  << " seed " << key.seed << ": " << *rerun.error << "\n";
        continue;
      }
      done.insert_or_assign(key, std::move(rerun));
    }
  }

  std::vector<RunResult> ordered;
  for (auto& [key, r] : done) ordered.push_back(std::move(r));
  if (options.results_path) write_results(*options.results_path, ordered);
  return ordered;
}

}  // namespace federate
