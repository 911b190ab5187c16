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

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "federate/common.hpp"

namespace federate {

enum class Split : std::uint8_t { kTrain = 0, kValid = 1, kTest = 2 };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "valid") return Split::kValid;
  if (s == "test") return Split::kTest;
  throw InputError("unknown split tag '" + std::string(s) + "'");
}

// Rows of (x, y, z) with a split tag per row.
struct Dataset {
  Matrix features;                 // [n x d]
  std::vector<int> labels;         // y in [0, num_classes)
  std::vector<int> sensitive;      // z in [0, num_groups)
  std::vector<Split> split;
  std::vector<std::string> feature_names;
  int num_classes = 2;
  int num_groups = 2;

  std::size_t size() const { return labels.size(); }
  Eigen::Index dim() const { return features.cols(); }

  void validate() const {
    const std::size_t n = labels.size();
    if (sensitive.size() != n || split.size() != n ||
        static_cast<std::size_t>(features.rows()) != n) {
      throw ShapeError("dataset: row counts of x, y, z and split disagree");
    }
    if (!feature_names.empty() &&
        feature_names.size() != static_cast<std::size_t>(features.cols())) {
      throw ShapeError("dataset: feature name count != feature columns");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] < 0 || labels[i] >= num_classes) {
        throw InputError("dataset: label out of range at row " +
                         std::to_string(i));
      }
      if (sensitive[i] < 0 || sensitive[i] >= num_groups) {
        throw InputError("dataset: group out of range at row " +
                         std::to_string(i));
      }
    }
  }

  // Every class and every group must occur among the training rows.
  void require_train_coverage() const {
    std::vector<bool> seen_y(num_classes, false), seen_z(num_groups, false);
    for (std::size_t i = 0; i < size(); ++i) {
      if (split[i] != Split::kTrain) continue;
      seen_y[labels[i]] = true;
      seen_z[sensitive[i]] = true;
    }
    for (int c = 0; c < num_classes; ++c) {
      if (!seen_y[c]) {
        throw InputError("class " + std::to_string(c) +
                         " missing from the train split");
      }
    }
    for (int g = 0; g < num_groups; ++g) {
      if (!seen_z[g]) {
        throw InputError("group " + std::to_string(g) +
                         " missing from the train split");
      }
    }
  }

  std::vector<std::size_t> rows(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (split[i] == s) out.push_back(i);
    }
    return out;
  }

  std::size_t count(Split s) const {
    return static_cast<std::size_t>(std::count(split.begin(), split.end(), s));
  }

  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out.features.row(static_cast<Eigen::Index>(k)) =
          features.row(static_cast<Eigen::Index>(idx[k]));
      out.labels.push_back(labels[idx[k]]);
      out.sensitive.push_back(sensitive[idx[k]]);
      out.split.push_back(split[idx[k]]);
    }
    out.feature_names = feature_names;
    out.num_classes = num_classes;
    out.num_groups = num_groups;
    return out;
  }

  Dataset only(Split s) const { return subset(rows(s)); }
};

// ---------------------------------------------------------------------------
// Splitting.

struct SplitFractions {
  double train = 0.6;
  double valid = 0.2;
  double test = 0.2;
};

struct SplitResult {
  Dataset dataset;
  bool stratified = true;
  std::vector<std::string> warnings;
};

// Disjoint, exhaustive train/valid/test assignment, stratified by (y, z).
//
// Rows are ranked inside their (y, z) cell by a seeded shuffle and keyed by
// their relative rank; the globally sorted key order is then cut at the
// requested sizes. Every cell therefore lands in each split in proportion,
// within one row, and the split sizes are exact.
inline SplitResult split_dataset(const Dataset& dataset,
                                 const SplitFractions& fractions,
                                 std::uint64_t seed) {
  const double total = fractions.train + fractions.valid + fractions.test;
  if (std::abs(total - 1.0) > 1e-9 || fractions.train < 0 ||
      fractions.valid < 0 || fractions.test < 0) {
    throw ParameterError("split fractions must be non-negative and sum to 1");
  }
  const std::size_t n = dataset.size();
  Rng rng(seed, 0x5b11);
  SplitResult result;
  result.dataset = dataset;

  std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < n; ++i) {
    cells[{dataset.labels[i], dataset.sensitive[i]}].push_back(i);
  }
  for (const auto& [cell, members] : cells) {
    if (members.size() < 3) {
      result.stratified = false;
      result.warnings.push_back(
          "cell (y=" + std::to_string(cell.first) +
          ", z=" + std::to_string(cell.second) + ") has " +
          std::to_string(members.size()) +
          " rows; falling back to an unstratified split");
    }
  }

  struct Keyed {
    double key;
    std::size_t cell_order;
    std::size_t row;
  };
  std::vector<Keyed> order;
  order.reserve(n);
  if (result.stratified) {
    std::vector<std::size_t> cell_priority = iota_indices(cells.size());
    shuffle(cell_priority, rng);
    std::size_t c = 0;
    for (auto& [cell, members] : cells) {
      std::vector<std::size_t> ranked = members;
      shuffle(ranked, rng);
      const double size = static_cast<double>(ranked.size());
      for (std::size_t r = 0; r < ranked.size(); ++r) {
        order.push_back({(static_cast<double>(r) + 0.5) / size,
                         cell_priority[c], ranked[r]});
      }
      ++c;
    }
    std::sort(order.begin(), order.end(), [](const Keyed& a, const Keyed& b) {
      return a.key != b.key ? a.key < b.key : a.cell_order < b.cell_order;
    });
  } else {
    std::vector<std::size_t> all = iota_indices(n);
    shuffle(all, rng);
    for (std::size_t r = 0; r < n; ++r) order.push_back({0.0, 0, all[r]});
  }

  const auto nd = static_cast<double>(n);
  const auto n_train =
      static_cast<std::size_t>(std::floor(fractions.train * nd + 0.5));
  const auto n_train_valid = std::min(
      n, static_cast<std::size_t>(
             std::floor((fractions.train + fractions.valid) * nd + 0.5)));
  for (std::size_t k = 0; k < n; ++k) {
    const Split s = k < n_train         ? Split::kTrain
                    : k < n_train_valid ? Split::kValid
                                        : Split::kTest;
    result.dataset.split[order[k].row] = s;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Subgroup skew of the training split.

struct SkewSpec {
  std::map<std::pair<int, int>, double> proportions;  // (y, z) -> fraction

  void validate() const {
    double total = 0.0;
    for (const auto& [cell, p] : proportions) {
      if (!(p >= 0.0)) throw ParameterError("skew fractions must be >= 0");
      total += p;
    }
    if (proportions.empty() || std::abs(total - 1.0) > 1e-9) {
      throw ParameterError("skew fractions must sum to 1");
    }
  }

  // 40% (y=1, z=1), 10% (y=0, z=1), 10% (y=1, z=0), 40% (y=0, z=0).
  static SkewSpec correlated_40_10_10_40() {
    SkewSpec s;
    s.proportions = {{{1, 1}, 0.4}, {{0, 1}, 0.1}, {{1, 0}, 0.1},
                     {{0, 0}, 0.4}};
    return s;
  }
};

// Subsamples the train rows so their (y, z) mix matches `spec`, keeping as
// many rows as the proportions allow. Valid and test rows are untouched.
inline Dataset skew_subgroups(const Dataset& dataset, const SkewSpec& spec,
                              std::uint64_t seed) {
  spec.validate();
  std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.split[i] == Split::kTrain) {
      cells[{dataset.labels[i], dataset.sensitive[i]}].push_back(i);
    }
  }
  for (const auto& [cell, members] : cells) {
    if (!spec.proportions.contains(cell)) {
      throw ParameterError("skew spec does not cover train cell (y=" +
                           std::to_string(cell.first) +
                           ", z=" + std::to_string(cell.second) + ")");
    }
  }
  double target = std::numeric_limits<double>::infinity();
  for (const auto& [cell, p] : spec.proportions) {
    const auto it = cells.find(cell);
    if (p > 0.0 && it == cells.end()) {
      throw InputError("skew cell (y=" + std::to_string(cell.first) +
                       ", z=" + std::to_string(cell.second) +
                       ") is absent from the train split");
    }
    if (p > 0.0) {
      target = std::min(
          target, std::floor(static_cast<double>(it->second.size()) / p + 1e-9));
    }
  }
  Rng rng(seed, 0x5e3);
  std::vector<bool> keep(dataset.size(), true);
  for (auto& [cell, members] : cells) {
    const double p = spec.proportions.at(cell);
    const std::size_t want = std::min(
        members.size(), static_cast<std::size_t>(std::floor(p * target + 0.5)));
    std::vector<std::size_t> pool = members;
    shuffle(pool, rng);
    for (std::size_t k = want; k < pool.size(); ++k) keep[pool[k]] = false;
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (keep[i]) kept.push_back(i);
  }
  return dataset.subset(kept);
}

// ---------------------------------------------------------------------------
// Synthetic Gaussian subgroups.

struct SyntheticSpec {
  std::size_t n = 4000;
  Eigen::Index dim = 8;
  std::vector<Vector> class_means;  // one per class, length dim
  Vector group_shift;               // length dim; group z adds (z - 1/2) * shift
  double noise_std = 1.0;
  std::uint64_t seed = 0;

  // Classes separated along axis 0, groups along axis 1.
  static SyntheticSpec axis_aligned(std::size_t n, Eigen::Index dim,
                                    double class_separation,
                                    double group_separation, double noise_std,
                                    std::uint64_t seed, int classes = 2) {
    SyntheticSpec s;
    s.n = n;
    s.dim = dim;
    s.noise_std = noise_std;
    s.seed = seed;
    for (int c = 0; c < classes; ++c) {
      Vector m = Vector::Zero(dim);
      m[0] = (c - 0.5 * (classes - 1)) * class_separation;
      s.class_means.push_back(m);
    }
    s.group_shift = Vector::Zero(dim);
    if (dim > 1) s.group_shift[1] = group_separation;
    return s;
  }
};

// Balanced (y, z) cells; features ~ N(mean(y) + shift(z), noise_std^2 I).
inline Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0) throw ParameterError("synthetic: n must be positive");
  if (spec.dim < 2) throw ParameterError("synthetic: dim must be >= 2");
  if (!(spec.noise_std > 0.0)) {
    throw ParameterError("synthetic: noise_std must be positive");
  }
  if (spec.class_means.size() < 2) {
    throw ParameterError("synthetic: need at least two class means");
  }
  for (const Vector& m : spec.class_means) {
    if (m.size() != spec.dim) throw ShapeError("synthetic: class mean dim");
  }
  if (spec.group_shift.size() != spec.dim) {
    throw ShapeError("synthetic: group shift dim");
  }
  const int classes = static_cast<int>(spec.class_means.size());
  const int groups = 2;
  Rng rng(spec.seed, 0x5a7);
  std::vector<std::size_t> order = iota_indices(spec.n);
  shuffle(order, rng);

  Dataset d;
  d.num_classes = classes;
  d.num_groups = groups;
  d.features.resize(static_cast<Eigen::Index>(spec.n), spec.dim);
  d.labels.resize(spec.n);
  d.sensitive.resize(spec.n);
  d.split.assign(spec.n, Split::kTrain);
  for (Eigen::Index j = 0; j < spec.dim; ++j) {
    d.feature_names.push_back("x" + std::to_string(j));
  }
  for (std::size_t k = 0; k < spec.n; ++k) {
    const std::size_t i = order[k];
    const int cell = static_cast<int>(k % static_cast<std::size_t>(classes * groups));
    d.labels[i] = cell % classes;
    d.sensitive[i] = cell / classes;
  }
  for (std::size_t i = 0; i < spec.n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double z_offset = static_cast<double>(d.sensitive[i]) - 0.5;
    for (Eigen::Index j = 0; j < spec.dim; ++j) {
      d.features(r, j) = spec.class_means[d.labels[i]][j] +
                         z_offset * spec.group_shift[j] +
                         spec.noise_std * rng.normal();
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// CSV cache. Doubles are written in shortest round-trip form, so a write/read
// cycle reproduces every bit.

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IngestionError(context + ": '" + std::string(s) +
                         "' is not a number");
  }
  return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') {
    out.back().pop_back();
  }
  return out;
}

inline void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot open " + path + " for writing");
  out << "# classes=" << d.num_classes << " groups=" << d.num_groups << "\n";
  for (std::size_t j = 0; j < static_cast<std::size_t>(d.dim()); ++j) {
    out << (j < d.feature_names.size() ? d.feature_names[j]
                                       : "x" + std::to_string(j))
        << ',';
  }
  out << "label,sensitive,split\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (Eigen::Index j = 0; j < d.dim(); ++j) {
      out << format_double(d.features(static_cast<Eigen::Index>(i), j)) << ',';
    }
    out << d.labels[i] << ',' << d.sensitive[i] << ',' << to_string(d.split[i])
        << '\n';
  }
  if (!out) throw IngestionError("write failed for " + path);
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path);
  std::string line;
  Dataset d;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# classes=%d groups=%d", &d.num_classes,
                  &d.num_groups) != 2) {
    throw IngestionError(path + ":1: missing '# classes=.. groups=..' line");
  }
  if (!std::getline(in, line)) throw IngestionError(path + ": missing header");
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3) throw IngestionError(path + ": header too short");
  const std::size_t dim = header.size() - 3;
  d.feature_names.assign(header.begin(), header.begin() + dim);
  std::vector<double> values;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (f.size() != header.size()) {
      throw IngestionError(where + ": expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(f.size()));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      values.push_back(parse_double(f[j], where));
    }
    d.labels.push_back(static_cast<int>(parse_double(f[dim], where)));
    d.sensitive.push_back(static_cast<int>(parse_double(f[dim + 1], where)));
    d.split.push_back(parse_split(f[dim + 2]));
  }
  d.features.resize(static_cast<Eigen::Index>(d.labels.size()),
                    static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          values[i * dim + j];
    }
  }
  d.validate();
  return d;
}

}  // namespace federate
