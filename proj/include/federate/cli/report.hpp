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

#include <cstdio>
#include <string>
#include <vector>

#include "federate/selection/select.hpp"

namespace federate {

inline const char* display_name(Method m) {
  switch (m) {
    case Method::kRandom: return "Random";
    case Method::kUnconstrained: return "Unconstrained";
    case Method::kNoise: return "Noise";
    case Method::kAdversarial: return "Adversarial";
    case Method::kFederate: return "FEDERATE";
  }
  return "?";
}

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string mean_std_cell(const std::optional<MeanStd>& s) {
  if (!s) return "-";
  return fixed2(s->mean) + " ± " + fixed2(s->std);
}

// Per-seed RT selection and seed aggregation for every method present, in
// table order.
inline std::vector<MethodSummary> summarize_results(
    const std::vector<RunResult>& results, double rt,
    const SelectOptions& options = {}) {
  std::vector<MethodSummary> rows;
  for (Method m : {Method::kRandom, Method::kUnconstrained, Method::kNoise,
                   Method::kAdversarial, Method::kFederate}) {
    std::vector<RunResult> runs;
    for (const RunResult& r : results) {
      if (r.mode == m) runs.push_back(r);
    }
    if (runs.empty()) continue;
    const std::vector<RunResult> chosen = select_per_seed(runs, rt, options);
    if (chosen.empty()) continue;
    rows.push_back(summarize(m, chosen));
  }
  if (rows.empty()) throw InputError("no runs: the results contain no successful run");
  return rows;
}

inline std::string render_markdown(const std::vector<MethodSummary>& rows) {
  std::string out =
      "| Method | Accuracy ↑ | Gap ↓ | Leakage ↓ | MDL ↑ |\n"
      "|---|---|---|---|---|\n";
  for (const MethodSummary& s : rows) {
    out += std::string("| ") + display_name(s.mode) + " | " +
           mean_std_cell(s.accuracy) + " | " + mean_std_cell(s.gap) + " | " +
           mean_std_cell(s.leakage) + " | " + mean_std_cell(s.mdl_bits) +
           " |\n";
  }
  return out;
}

inline std::string render_csv(const std::vector<MethodSummary>& rows) {
  std::string out =
      "method,accuracy,accuracy_std,gap,gap_std,leakage,leakage_std,mdl,mdl_"
      "std,seeds\n";
  auto pair = [](const std::optional<MeanStd>& s) {
    return s ? fixed2(s->mean) + "," + fixed2(s->std) : std::string("-,-");
  };
  for (const MethodSummary& s : rows) {
    out += std::string(display_name(s.mode)) + "," + pair(s.accuracy) + "," +
           pair(s.gap) + "," + pair(s.leakage) + "," + pair(s.mdl_bits) + "," +
           std::to_string(s.seeds) + "\n";
  }
  return out;
}

inline std::string write_report(const std::vector<RunResult>& results,
                                const std::string& format, double rt,
                                const SelectOptions& options = {}) {
  if (results.empty()) throw InputError("no runs: the results file is empty");
  const std::vector<MethodSummary> rows =
      summarize_results(results, rt, options);
  if (format == "markdown") return render_markdown(rows);
  if (format == "csv") return render_csv(rows);
  throw ConfigError("unknown report format '" + format + "'");
}

// Plot-ready selected validation/test metrics as a function of RT.
inline std::string render_rt_curve(const std::vector<RunResult>& results,
                                   const std::vector<double>& rts,
                                   const SelectOptions& options = {}) {
  std::string out = "rt,method,accuracy,accuracy_std,gap,gap_std\n";
  for (double rt : rts) {
    for (const MethodSummary& s : summarize_results(results, rt, options)) {
      out += format_double(rt) + "," + display_name(s.mode) + "," +
             fixed2(s.accuracy.mean) + "," + fixed2(s.accuracy.std) + "," +
             fixed2(s.gap.mean) + "," + fixed2(s.gap.std) + "\n";
    }
  }
  return out;
}

}  // namespace federate
