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
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "federate/data/dataset.hpp"

namespace federate {

// Adult Income ingestion.
//
// Nine features per row:
//   age, education-num, capital-gain, capital-loss, hours-per-week
//     standardized with the train split's mean and population std;
//   workclass, occupation, relationship, race
//     ordinal codes (index in the sorted list of train categories).
// z = sex (Female -> 1, Male -> 0); y = income > 50K.
// Rows with a missing ('?') value in any used column are dropped.
//
// Accepts the UCI files as published (no header, 15 columns, optional '|'
// comment line and trailing '.' on the income of adult.test) and headered
// CSV exports whose column names use '-', '_' or spaces.

struct AdultOptions {
  SplitFractions fractions;
  std::uint64_t split_seed = 0;
};

struct AdultData {
  Dataset dataset;
  std::size_t dropped_missing = 0;
  std::size_t rows_read = 0;
  std::vector<std::string> warnings;
};

namespace adult_internal {

inline std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return std::string(s);
}

inline std::string canonical_column(std::string s) {
  s = trim(s);
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == '_' || c == ' ' || c == '.') c = '-';
  }
  if (s == "educational-num") return "education-num";
  if (s == "gender") return "sex";
  if (s == "class" || s == "salary" || s == "income-bracket" ||
      s == "income-level") {
    return "income";
  }
  return s;
}

inline const std::vector<std::string>& uci_columns() {
  static const std::vector<std::string> cols = {
      "age",          "workclass",    "fnlwgt",         "education",
      "education-num", "marital-status", "occupation",   "relationship",
      "race",         "sex",          "capital-gain",   "capital-loss",
      "hours-per-week", "native-country", "income"};
  return cols;
}

inline const std::vector<std::string>& continuous_columns() {
  static const std::vector<std::string> cols = {
      "age", "education-num", "capital-gain", "capital-loss", "hours-per-week"};
  return cols;
}

inline const std::vector<std::string>& categorical_columns() {
  static const std::vector<std::string> cols = {"workclass", "occupation",
                                                "relationship", "race"};
  return cols;
}

struct RawRow {
  std::size_t line;
  std::vector<double> continuous;
  std::vector<std::string> categorical;
};

inline bool looks_numeric(const std::string& s) {
  const std::string t = trim(s);
  return !t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) ||
                        t[0] == '-' || t[0] == '+');
}

}  // namespace adult_internal

inline AdultData load_adult_csv(const std::string& path,
                                const AdultOptions& options = {}) {
  using namespace adult_internal;
  std::ifstream in(path);
  if (!in) throw IngestionError("adult: cannot open '" + path + "'");

  std::vector<std::string> columns;
  std::vector<RawRow> rows;
  std::vector<int> labels, groups;
  AdultData result;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;

  auto resolve_columns = [&](const std::vector<std::string>& names) {
    columns = names;
    for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;
    std::vector<std::string> needed = continuous_columns();
    needed.insert(needed.end(), categorical_columns().begin(),
                  categorical_columns().end());
    needed.push_back("sex");
    needed.push_back("income");
    for (const std::string& c : needed) {
      if (!index.contains(c)) {
        throw IngestionError("adult: " + path + " has no column '" + c + "'");
      }
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '|') continue;
    std::vector<std::string> fields = split_csv_line(stripped);
    if (columns.empty()) {
      if (looks_numeric(fields.front())) {
        resolve_columns(uci_columns());
      } else {
        std::vector<std::string> names;
        for (const std::string& f : fields) names.push_back(canonical_column(f));
        resolve_columns(names);
        continue;
      }
    }
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != columns.size()) {
      throw IngestionError("adult: " + where + ": expected " +
                           std::to_string(columns.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    ++result.rows_read;
    for (std::string& f : fields) f = trim(f);
    auto field = [&](const std::string& name) -> const std::string& {
      return fields[index.at(name)];
    };
    bool missing = false;
    for (const std::string& c : continuous_columns()) missing |= field(c) == "?";
    for (const std::string& c : categorical_columns()) {
      missing |= field(c) == "?" || field(c).empty();
    }
    missing |= field("sex") == "?" || field("income") == "?";
    if (missing) {
      ++result.dropped_missing;
      continue;
    }
    RawRow row;
    row.line = line_no;
    for (const std::string& c : continuous_columns()) {
      row.continuous.push_back(parse_double(field(c), where + " column " + c));
    }
    for (const std::string& c : categorical_columns()) {
      row.categorical.push_back(field(c));
    }
    const std::string& sex = field("sex");
    if (sex == "Female") {
      groups.push_back(1);
    } else if (sex == "Male") {
      groups.push_back(0);
    } else {
      throw IngestionError("adult: " + where + ": unknown sex '" + sex + "'");
    }
    std::string income = field("income");
    if (!income.empty() && income.back() == '.') income.pop_back();
    if (income == ">50K") {
      labels.push_back(1);
    } else if (income == "<=50K") {
      labels.push_back(0);
    } else {
      throw IngestionError("adult: " + where + ": unknown income '" + income +
                           "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IngestionError("adult: no usable rows in " + path);

  Dataset skeleton;
  skeleton.labels = labels;
  skeleton.sensitive = groups;
  skeleton.split.assign(rows.size(), Split::kTrain);
  skeleton.features.resize(static_cast<Eigen::Index>(rows.size()), 0);
  SplitResult split =
      split_dataset(skeleton, options.fractions, options.split_seed);
  result.warnings = split.warnings;
  Dataset& d = split.dataset;

  const std::size_t n_cont = continuous_columns().size();
  const std::size_t n_cat = categorical_columns().size();
  std::vector<double> mean(n_cont, 0.0), sd(n_cont, 0.0);
  std::vector<std::set<std::string>> seen(n_cat);
  std::size_t n_train = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (d.split[i] != Split::kTrain) continue;
    ++n_train;
    for (std::size_t j = 0; j < n_cont; ++j) mean[j] += rows[i].continuous[j];
    for (std::size_t j = 0; j < n_cat; ++j) seen[j].insert(rows[i].categorical[j]);
  }
  if (n_train == 0) throw IngestionError("adult: empty train split");
  for (double& m : mean) m /= static_cast<double>(n_train);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (d.split[i] != Split::kTrain) continue;
    for (std::size_t j = 0; j < n_cont; ++j) {
      const double diff = rows[i].continuous[j] - mean[j];
      sd[j] += diff * diff;
    }
  }
  for (double& s : sd) {
    s = std::sqrt(s / static_cast<double>(n_train));
    if (!(s > 0.0)) s = 1.0;
  }
  std::vector<std::map<std::string, int>> codes(n_cat);
  for (std::size_t j = 0; j < n_cat; ++j) {
    int k = 0;
    for (const std::string& cat : seen[j]) codes[j][cat] = k++;
  }

  d.features.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(n_cont + n_cat));
  d.feature_names = continuous_columns();
  d.feature_names.insert(d.feature_names.end(), categorical_columns().begin(),
                         categorical_columns().end());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < n_cont; ++j) {
      d.features(r, static_cast<Eigen::Index>(j)) =
          (rows[i].continuous[j] - mean[j]) / sd[j];
    }
    for (std::size_t j = 0; j < n_cat; ++j) {
      const auto it = codes[j].find(rows[i].categorical[j]);
      if (it == codes[j].end()) {
        throw IngestionError("adult: " + path + ":" +
                             std::to_string(rows[i].line) +
                             ": unknown category '" + rows[i].categorical[j] +
                             "' in column " + categorical_columns()[j] +
                             " (not present in the train split)");
      }
      d.features(r, static_cast<Eigen::Index>(n_cont + j)) = it->second;
    }
  }
  d.num_classes = 2;
  d.num_groups = 2;
  d.validate();
  result.dataset = std::move(d);
  return result;
}

}  // namespace federate
