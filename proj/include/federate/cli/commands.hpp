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
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "federate/cli/config.hpp"
#include "federate/cli/rep_dump.hpp"
#include "federate/cli/report.hpp"
#include "federate/privacy/audit.hpp"

namespace federate {

inline Dataset load_dataset(const ExperimentConfig& c) {
  Dataset d;
  if (c.dataset == "adult") {
    AdultOptions options;
    options.fractions = c.split;
    options.split_seed = c.split_seed;
    AdultData adult = load_adult_csv(c.dataset_path, options);
    d = std::move(adult.dataset);
  } else {
    SyntheticSpec spec = SyntheticSpec::axis_aligned(
        c.synthetic_n, c.synthetic_dim, c.synthetic_class_sep,
        c.synthetic_group_sep, c.synthetic_noise_std, c.synthetic_seed,
        c.synthetic_classes);
    d = split_dataset(make_synthetic(spec), c.split, c.split_seed).dataset;
  }
  if (const std::optional<SkewSpec> skew = parse_skew(c.skew)) {
    d = skew_subgroups(d, *skew, c.split_seed);
  }
  return d;
}

inline EvalOptions eval_options(const ExperimentConfig& c) {
  EvalOptions e;
  e.privacy_metrics = c.privacy_metrics;
  e.probe = c.probe;
  return e;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out << text;
}

// Validation then test representations, drawn exactly as evaluate_run draws
// them, so probe/mdl on the dump reproduce the run's privacy metrics.
inline RepDump dump_representations(const ModelParams& model,
                                    const Dataset& dataset,
                                    const TrainConfig& config) {
  Rng noise(config.seed, stream::kEvalNoise);
  RepDump dump;
  dump.num_groups = dataset.num_groups;
  std::vector<Matrix> blocks;
  for (Split s : {Split::kValid, Split::kTest}) {
    const SplitView view = SplitView::of(dataset, s);
    blocks.push_back(private_representation(model, view.x, config, noise));
    dump.groups.insert(dump.groups.end(), view.z.begin(), view.z.end());
    dump.split.insert(dump.split.end(), view.size(), s);
  }
  dump.reps.resize(blocks[0].rows() + blocks[1].rows(), model.rep_dim);
  dump.reps << blocks[0], blocks[1];
  return dump;
}

inline int command_train(const ExperimentConfig& c, std::ostream& out) {
  if (c.train.mode == Method::kRandom) {
    const RunResult r = evaluate_random(load_dataset(c), c.train.seed);
    write_text(c.results_path, to_json(r).dump() + "\n");
    out << to_json(r).dump() << "\n";
    return 0;
  }
  const Dataset d = load_dataset(c);
  RunOptions options;
  options.eval = eval_options(c);
  if (!c.log_path.empty()) {
    write_text(c.log_path, "");
    options.history_path = c.log_path;
  }
  const TrainRunOutput run = train_run(c.train, d, options);
  write_text(c.results_path, to_json(run.result).dump() + "\n");
  if (!c.reps_path.empty()) {
    write_rep_dump(dump_representations(run.model, d, c.train), c.reps_path);
  }
  out << to_json(run.result).dump() << "\n";
  return 0;
}

inline int command_sweep(const ExperimentConfig& c, std::ostream& out) {
  const Dataset d = load_dataset(c);
  SweepOptions options;
  options.workers = c.sweep_workers;
  options.results_path = c.results_path;
  options.privacy = c.sweep_privacy;
  options.rt = c.rt;
  options.select.privacy_criterion = c.select_privacy;
  options.probe = c.probe;
  const std::vector<RunResult> results = run_sweep(c.sweep, d, c.train, options);
  std::size_t failed = 0;
  for (const RunResult& r : results) failed += !r.ok();
  out << nlohmann::json{{"results", c.results_path},
                        {"runs", results.size()},
                        {"failed", failed}}
             .dump()
      << "\n";
  return 0;
}

inline Matrix gather_dump_rows(const RepDump& dump,
                               const std::vector<std::size_t>& idx,
                               std::vector<int>& groups) {
  Matrix x(static_cast<Eigen::Index>(idx.size()), dump.reps.cols());
  groups.clear();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    x.row(static_cast<Eigen::Index>(k)) =
        dump.reps.row(static_cast<Eigen::Index>(idx[k]));
    groups.push_back(dump.groups[idx[k]]);
  }
  return x;
}

// Leakage of a dump: probe fit on its validation rows, scored on test rows.
inline int command_probe(const ExperimentConfig& c, const std::string& reps,
                         std::ostream& out) {
  const RepDump dump = read_rep_dump(reps);
  std::vector<int> train_z, test_z;
  const Matrix train_x = gather_dump_rows(dump, dump.rows(Split::kValid), train_z);
  const Matrix test_x = gather_dump_rows(dump, dump.rows(Split::kTest), test_z);
  if (train_z.empty() || test_z.empty()) {
    throw InputError("probe: the dump needs validation and test rows");
  }
  const double leakage = leakage_probe(train_x, train_z, test_x, test_z, c.probe);
  out << nlohmann::json{{"leakage", leakage},
                        {"train_rows", train_z.size()},
                        {"test_rows", test_z.size()}}
             .dump()
      << "\n";
  return 0;
}

// Online codelength of z given the test rows of a dump.
inline int command_mdl(const ExperimentConfig& c, const std::string& reps,
                       std::ostream& out) {
  const RepDump dump = read_rep_dump(reps);
  std::vector<int> z;
  const Matrix x = gather_dump_rows(dump, dump.rows(Split::kTest), z);
  if (z.empty()) throw InputError("mdl: the dump has no test rows");
  const PrivacyScore s = mdl_online(x, z, dump.num_groups, c.probe);
  out << nlohmann::json{{"mdl_bits", s.mdl_bits},
                        {"uniform_bits", s.uniform_codelength_bits},
                        {"block_ends", s.block_ends}}
             .dump()
      << "\n";
  return 0;
}

// Sensitivity of both normalizers over random inputs plus the worst-case
// pair, and the ratio test of each mechanism on the min-max worst-case pair.
inline int command_audit(const ExperimentConfig& c, std::ostream& out) {
  Rng input_rng(c.audit_seed, 0xa0);
  std::vector<Vector> inputs;
  for (std::size_t i = 0; i < c.audit_inputs; ++i) {
    Vector v(c.audit_dim);
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = input_rng.normal();
    inputs.push_back(v);
  }
  const auto [a, b] = worst_case_pair(Normalizer::kMinMax, c.audit_dim);
  nlohmann::json report = nlohmann::json::array();
  for (Normalizer n : {Normalizer::kL1, Normalizer::kMinMax}) {
    const SensitivityReport s = sensitivity_audit(n, inputs, true);
    Rng rng(c.audit_seed, 0xa1);
    const std::vector<double> edges =
        default_ratio_bins(n, c.audit_epsilon, a, b);
    const RatioTestResult t =
        dp_ratio_test(n, c.audit_epsilon, a, b, edges, c.audit_samples, rng);
    report.push_back(
        {{"normalizer", to_string(n)},
         {"dim", s.dim},
         {"bound", s.bound},
         {"max_l1_distance", s.max_l1_distance},
         {"adversarial_distance", *s.adversarial_distance},
         {"pairs", s.pair_count},
         {"ratio_test",
          {{"epsilon", t.epsilon},
           {"noise_scale", t.noise_scale},
           {"samples", c.audit_samples},
           {"max_abs_log_ratio", t.max_abs_log_ratio},
           {"slack", t.slack},
           {"min_bin_count", t.min_bin_count},
           {"pass", t.pass}}}});
  }
  out << report.dump(2) << "\n";
  return 0;
}

inline int command_report(const ExperimentConfig& c,
                          const std::vector<double>& rt_curve,
                          std::ostream& out) {
  const std::vector<RunResult> results = read_results(c.results_path);
  SelectOptions select;
  select.privacy_criterion = c.select_privacy;
  if (!rt_curve.empty()) {
    if (results.empty()) throw InputError("no runs: the results file is empty");
    out << render_rt_curve(results, rt_curve, select);
  } else {
    out << write_report(results, c.format, c.rt, select);
  }
  return 0;
}

}  // namespace federate
