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

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "federate/data/dataset.hpp"

namespace federate {

// Representation dump, all integers and reals little-endian:
//   8 bytes   magic "FDREPS01"
//   u64       n (rows), u64 D (columns), u64 G (number of groups)
//   n*D f64   representations, row-major
//   n   i32   sensitive group per row
//   n   u8    split tag per row (0 train, 1 valid, 2 test)
struct RepDump {
  Matrix reps;
  std::vector<int> groups;
  std::vector<Split> split;
  int num_groups = 2;

  void validate() const {
    const auto n = static_cast<std::size_t>(reps.rows());
    if (groups.size() != n || split.size() != n) {
      throw ShapeError("rep dump: row counts differ");
    }
    for (int z : groups) {
      if (z < 0 || z >= num_groups) {
        throw InputError("rep dump: group id out of range");
      }
    }
  }

  std::vector<std::size_t> rows(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i) {
      if (split[i] == s) out.push_back(i);
    }
    return out;
  }
};

namespace rep_dump_internal {

inline constexpr std::array<char, 8> kMagic = {'F', 'D', 'R', 'E',
                                               'P', 'S', '0', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little,
                "rep dumps assume a little-endian host");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.write(bytes, sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  char bytes[sizeof(T)];
  if (!in.read(bytes, sizeof(T))) {
    throw IngestionError("rep dump '" + path + "' is truncated");
  }
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace rep_dump_internal

inline void write_rep_dump(const RepDump& dump, const std::string& path) {
  using namespace rep_dump_internal;
  dump.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestionError("cannot write rep dump '" + path + "'");
  out.write(kMagic.data(), kMagic.size());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(dump.reps.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(dump.reps.cols()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(dump.num_groups));
  for (Eigen::Index i = 0; i < dump.reps.rows(); ++i) {
    for (Eigen::Index j = 0; j < dump.reps.cols(); ++j) {
      put<double>(out, dump.reps(i, j));
    }
  }
  for (int z : dump.groups) put<std::int32_t>(out, z);
  for (Split s : dump.split) put<std::uint8_t>(out, static_cast<std::uint8_t>(s));
}

inline RepDump read_rep_dump(const std::string& path) {
  using namespace rep_dump_internal;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open rep dump '" + path + "'");
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw IngestionError("'" + path + "' is not a representation dump");
  }
  const auto n = get<std::uint64_t>(in, path);
  const auto d = get<std::uint64_t>(in, path);
  const auto g = get<std::uint64_t>(in, path);
  if (g < 2 || g > 1u << 20 || d == 0 || d > 1u << 20) {
    throw IngestionError("rep dump '" + path + "' has an implausible header");
  }
  RepDump dump;
  dump.num_groups = static_cast<int>(g);
  dump.reps.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < dump.reps.rows(); ++i) {
    for (Eigen::Index j = 0; j < dump.reps.cols(); ++j) {
      dump.reps(i, j) = get<double>(in, path);
    }
  }
  for (std::uint64_t i = 0; i < n; ++i) dump.groups.push_back(get<std::int32_t>(in, path));
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto tag = get<std::uint8_t>(in, path);
    if (tag > 2) throw IngestionError("rep dump '" + path + "': bad split tag");
    dump.split.push_back(static_cast<Split>(tag));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IngestionError("rep dump '" + path + "' has trailing bytes");
  }
  try {
    dump.validate();
  } catch (const Error& e) {
    throw IngestionError("rep dump '" + path + "': " + e.what());
  }
  return dump;
}

}  // namespace federate
