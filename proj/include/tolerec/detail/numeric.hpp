// Copyright 2026 The tolerec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

namespace tolerec::detail {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view text, double& out) {
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

// Incremental mean: after add(x_1..x_n), mean == (x_1 + ... + x_n) / n up to
// rounding. Adding a value equal to the current mean leaves it bit-identical.
struct RunningMean {
  std::uint64_t count = 0;
  double mean = 0.0;

  void add(double x) {
    ++count;
    mean += (x - mean) / static_cast<double>(count);
  }

  // Pooled mean of two disjoint sets. Combining equal means is exact.
  static RunningMean combine(const RunningMean& a, const RunningMean& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    const std::uint64_t n = a.count + b.count;
    const double w = static_cast<double>(b.count) / static_cast<double>(n);
    return RunningMean{n, a.mean + (b.mean - a.mean) * w};
  }
};

// splitmix64 finalizer; used to derive independent seeds from (seed, tag...).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t seed, Tags... tags) {
  std::uint64_t s = mix64(seed);
  ((s = mix64(s ^ static_cast<std::uint64_t>(tags))), ...);
  return s;
}

}  // namespace tolerec::detail
