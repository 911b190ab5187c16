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

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "federate/data/adult.hpp"
#include "federate/selection/sweep.hpp"

namespace federate {

// Experiment configuration. The file format is flat `key = value` lines with
// `#` comments; every key is listed in config_fields() below.
struct ExperimentConfig {
  std::string dataset;  // synthetic | adult
  std::string dataset_path;
  std::string skew = "none";
  SplitFractions split;
  std::uint64_t split_seed = 0;

  std::size_t synthetic_n = 8000;
  Eigen::Index synthetic_dim = 8;
  int synthetic_classes = 2;
  double synthetic_class_sep = 1.0;
  double synthetic_group_sep = 3.0;
  double synthetic_noise_std = 1.0;
  std::uint64_t synthetic_seed = 0;

  TrainConfig train;
  bool privacy_metrics = true;

  SweepGrid sweep;
  std::size_t sweep_workers = 1;
  PrivacyMetrics sweep_privacy = PrivacyMetrics::kSelected;
  bool select_privacy = false;
  double rt = 1.0;

  ProbeConfig probe;

  std::string results_path = "results.jsonl";
  std::string log_path;
  std::string reps_path;
  std::string format = "markdown";

  Eigen::Index audit_dim = 4;
  double audit_epsilon = 1.0;
  std::size_t audit_samples = 1000000;
  std::size_t audit_inputs = 200;
  std::uint64_t audit_seed = 0;
};

namespace config_internal {

inline std::string trim(std::string_view s) { return adult_internal::trim(s); }

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value +
                      "'");
  }
  return out;
}

inline double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value +
                      "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" +
                    value + "'");
}

inline std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<double> parse_real_list(const std::string& key,
                                           const std::string& value) {
  std::vector<double> out;
  for (const std::string& s : parse_list(value)) out.push_back(parse_real(key, s));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define FEDERATE_REAL(name, member)                                        \
  Field{name,                                                              \
        [](ExperimentConfig& c, const std::string& v) {                    \
          c.member = parse_real(name, v);                                  \
        },                                                                 \
        [](const ExperimentConfig& c) { return format_double(c.member); }}
#define FEDERATE_INT(name, member)                                         \
  Field{name,                                                              \
        [](ExperimentConfig& c, const std::string& v) {                    \
          c.member = parse_integer<decltype(c.member)>(name, v);           \
        },                                                                 \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }}
#define FEDERATE_STRING(name, member)                                      \
  Field{name,                                                              \
        [](ExperimentConfig& c, const std::string& v) { c.member = v; },   \
        [](const ExperimentConfig& c) { return c.member; }}
#define FEDERATE_BOOL(name, member)                                        \
  Field{name,                                                              \
        [](ExperimentConfig& c, const std::string& v) {                    \
          c.member = parse_bool(name, v);                                  \
        },                                                                 \
        [](const ExperimentConfig& c) {                                    \
          return std::string(c.member ? "true" : "false");                 \
        }}

inline const std::vector<Field>& config_fields() {
  static const std::vector<Field> fields = {
      FEDERATE_STRING("dataset", dataset),
      FEDERATE_STRING("dataset.path", dataset_path),
      FEDERATE_STRING("dataset.skew", skew),
      FEDERATE_REAL("split.train", split.train),
      FEDERATE_REAL("split.valid", split.valid),
      FEDERATE_REAL("split.test", split.test),
      FEDERATE_INT("split.seed", split_seed),
      FEDERATE_INT("synthetic.n", synthetic_n),
      FEDERATE_INT("synthetic.dim", synthetic_dim),
      FEDERATE_INT("synthetic.classes", synthetic_classes),
      FEDERATE_REAL("synthetic.class_sep", synthetic_class_sep),
      FEDERATE_REAL("synthetic.group_sep", synthetic_group_sep),
      FEDERATE_REAL("synthetic.noise_std", synthetic_noise_std),
      FEDERATE_INT("synthetic.seed", synthetic_seed),
      Field{"mode",
            [](ExperimentConfig& c, const std::string& v) {
              c.train.mode = parse_method(v);
            },
            [](const ExperimentConfig& c) {
              return std::string(to_string(c.train.mode));
            }},
      FEDERATE_REAL("lr", train.lr),
      FEDERATE_INT("batch_size", train.batch_size),
      FEDERATE_INT("epochs", train.epochs),
      FEDERATE_REAL("lambda_max", train.lambda_max),
      FEDERATE_REAL("schedule_scale", train.schedule_scale),
      FEDERATE_REAL("epsilon", train.epsilon),
      FEDERATE_INT("seed", train.seed),
      FEDERATE_INT("hidden", train.model.hidden),
      FEDERATE_INT("rep_dim", train.model.rep_dim),
      FEDERATE_INT("adversary_hidden", train.model.adversary_hidden),
      FEDERATE_REAL("dropout", train.model.dropout),
      FEDERATE_BOOL("privacy_metrics", privacy_metrics),
      Field{"sweep.modes",
            [](ExperimentConfig& c, const std::string& v) {
              c.sweep.modes.clear();
              for (const std::string& m : parse_list(v)) {
                c.sweep.modes.push_back(parse_method(m));
              }
            },
            [](const ExperimentConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.sweep.modes.size(); ++i) {
                out += (i ? "," : "") + std::string(to_string(c.sweep.modes[i]));
              }
              return out;
            }},
      Field{"sweep.lambdas",
            [](ExperimentConfig& c, const std::string& v) {
              c.sweep.lambdas = parse_real_list("sweep.lambdas", v);
            },
            [](const ExperimentConfig& c) { return join(c.sweep.lambdas); }},
      Field{"sweep.epsilons",
            [](ExperimentConfig& c, const std::string& v) {
              c.sweep.epsilons = parse_real_list("sweep.epsilons", v);
            },
            [](const ExperimentConfig& c) { return join(c.sweep.epsilons); }},
      FEDERATE_INT("sweep.seeds", sweep.seed_count),
      FEDERATE_INT("sweep.base_seed", sweep.base_seed),
      FEDERATE_INT("sweep.workers", sweep_workers),
      Field{"sweep.privacy_metrics",
            [](ExperimentConfig& c, const std::string& v) {
              c.sweep_privacy = parse_privacy_metrics(v);
            },
            [](const ExperimentConfig& c) {
              return std::string(to_string(c.sweep_privacy));
            }},
      FEDERATE_BOOL("sweep.select_privacy", select_privacy),
      FEDERATE_REAL("rt", rt),
      Field{"probe.hidden",
            [](ExperimentConfig& c, const std::string& v) {
              c.probe.hidden_sizes.clear();
              for (const std::string& h : parse_list(v)) {
                c.probe.hidden_sizes.push_back(
                    parse_integer<Eigen::Index>("probe.hidden", h));
              }
            },
            [](const ExperimentConfig& c) { return join(c.probe.hidden_sizes); }},
      Field{"probe.blocks",
            [](ExperimentConfig& c, const std::string& v) {
              c.probe.block_fractions = parse_real_list("probe.blocks", v);
            },
            [](const ExperimentConfig& c) {
              return join(c.probe.block_fractions);
            }},
      FEDERATE_INT("probe.seed", probe.seed),
      FEDERATE_INT("probe.epochs", probe.epochs),
      FEDERATE_REAL("probe.lr", probe.lr),
      FEDERATE_INT("probe.batch_size", probe.batch_size),
      FEDERATE_REAL("probe.holdout", probe.holdout_fraction),
      FEDERATE_STRING("output.results", results_path),
      FEDERATE_STRING("output.log", log_path),
      FEDERATE_STRING("output.reps", reps_path),
      FEDERATE_STRING("output.format", format),
      FEDERATE_INT("audit.dim", audit_dim),
      FEDERATE_REAL("audit.epsilon", audit_epsilon),
      FEDERATE_INT("audit.samples", audit_samples),
      FEDERATE_INT("audit.inputs", audit_inputs),
      FEDERATE_INT("audit.seed", audit_seed),
  };
  return fields;
}

#undef FEDERATE_REAL
#undef FEDERATE_INT
#undef FEDERATE_STRING
#undef FEDERATE_BOOL

inline const Field& field(const std::string& key) {
  for (const Field& f : config_fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown key '" + key + "'");
}

}  // namespace config_internal

// "none", "40-10-10-40", or explicit "y:z:p" triples separated by commas.
inline std::optional<SkewSpec> parse_skew(const std::string& text) {
  using namespace config_internal;
  if (text == "none") return std::nullopt;
  if (text == "40-10-10-40") return SkewSpec::correlated_40_10_10_40();
  SkewSpec spec;
  for (const std::string& item : parse_list(text)) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(item);
    while (std::getline(in, part, ':')) parts.push_back(trim(part));
    if (parts.size() != 3) {
      throw ConfigError("key 'dataset.skew': expected y:z:fraction, got '" +
                        item + "'");
    }
    spec.proportions[{parse_integer<int>("dataset.skew", parts[0]),
                      parse_integer<int>("dataset.skew", parts[1])}] =
        parse_real("dataset.skew", parts[2]);
  }
  try {
    spec.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("key 'dataset.skew': ") + e.what());
  }
  return spec;
}

inline void validate_config(const ExperimentConfig& c) {
  if (c.dataset != "synthetic" && c.dataset != "adult") {
    throw ConfigError("key 'dataset': expected synthetic or adult, got '" +
                      c.dataset + "'");
  }
  if (c.dataset == "adult") {
    if (c.dataset_path.empty()) {
      throw ConfigError("missing required key 'dataset.path' for dataset adult");
    }
    if (!std::filesystem::exists(c.dataset_path)) {
      throw ConfigError("key 'dataset.path': file '" + c.dataset_path +
                        "' does not exist");
    }
  }
  parse_skew(c.skew);
  const double total = c.split.train + c.split.valid + c.split.test;
  if (!(c.split.train > 0 && c.split.valid >= 0 && c.split.test >= 0) ||
      std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("keys 'split.*': fractions must be >= 0 and sum to 1");
  }
  if (c.synthetic_n == 0) throw ConfigError("key 'synthetic.n' must be positive");
  if (c.synthetic_dim < 2) throw ConfigError("key 'synthetic.dim' must be >= 2");
  if (c.synthetic_classes < 2) {
    throw ConfigError("key 'synthetic.classes' must be >= 2");
  }
  if (!(c.synthetic_noise_std > 0.0)) {
    throw ConfigError("key 'synthetic.noise_std' must be positive");
  }
  if (!(c.train.model.dropout >= 0.0 && c.train.model.dropout < 1.0)) {
    throw ConfigError("key 'dropout' must lie in [0, 1)");
  }
  if (c.train.model.hidden <= 0 || c.train.model.rep_dim <= 0 ||
      c.train.model.adversary_hidden <= 0) {
    throw ConfigError("keys 'hidden', 'rep_dim', 'adversary_hidden' must be positive");
  }
  try {
    c.train.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  c.sweep.validate();
  c.probe.validate();
  if (!(c.rt >= 0.0)) throw ConfigError("key 'rt' must be >= 0");
  if (c.format != "markdown" && c.format != "csv") {
    throw ConfigError("key 'output.format': expected markdown or csv, got '" +
                      c.format + "'");
  }
  if (c.audit_dim < 2) throw ConfigError("key 'audit.dim' must be >= 2");
  if (!(c.audit_epsilon > 0.0)) throw ConfigError("key 'audit.epsilon' must be positive");
  if (c.audit_samples == 0 || c.audit_inputs < 2) {
    throw ConfigError("keys 'audit.samples' and 'audit.inputs' are too small");
  }
}

// Parses configuration text, then applies `key=value` overrides. Defaults
// are filled for every key except `dataset`; `epochs` defaults to 30 for
// synthetic data and 40 for Adult Income.
inline ExperimentConfig parse_config_text(
    const std::string& text, const std::vector<std::string>& overrides = {}) {
  using namespace config_internal;
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    field(key);
    if (!values.emplace(key, trim(t.substr(eq + 1))).second) {
      throw ConfigError("duplicate key '" + key + "'");
    }
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override '" + o + "': expected key=value");
    }
    const std::string key = trim(o.substr(0, eq));
    field(key);
    values[key] = trim(o.substr(eq + 1));
  }
  if (!values.contains("dataset")) {
    throw ConfigError("missing required key 'dataset'");
  }
  ExperimentConfig c;
  c.train.epochs = values.at("dataset") == "adult" ? 40 : 30;
  for (const auto& [key, value] : values) field(key).set(c, value);
  validate_config(c);
  return c;
}

inline ExperimentConfig parse_config_file(
    const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), overrides);
}

// Every key, in schema order.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  for (const config_internal::Field& f : config_internal::config_fields()) {
    out += f.key + " = " + f.get(c) + "\n";
  }
  return out;
}

inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : config_internal::config_fields()) keys.push_back(f.key);
  return keys;
}

}  // namespace federate
