// Copyright 2026 The PairMix Authors.
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

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pairmix {

/// SplitMix64 finalizer. Used to derive independent child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Folds a sequence of integers into one 64-bit seed. Order matters:
/// mix_seed({g, a, b}) != mix_seed({g, b, a}) in general.
constexpr std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6A09E667F3BCC908ULL;
  for (std::uint64_t p : parts) {
    h = splitmix64(h ^ splitmix64(p));
  }
  return h;
}

/// Seeded generator with fully specified distributions.
///
/// The engine is std::mt19937_64 (bit-exact across standard libraries). The
/// distributions are implemented here rather than taken from <random>, whose
/// distribution algorithms are implementation-defined; every augmentation in
/// this library must reproduce the same output for the same seed on any
/// toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). Unbiased (rejection sampling). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform integer on [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Bernoulli(p): one uniform draw, true iff u < p.
  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via the Box-Muller transform (one value per call; the
  /// second Box-Muller value is discarded so the stream position depends only
  /// on the number of calls).
  double normal();

  /// log of a Gamma(shape, 1) variate. Working in the log domain keeps tiny
  /// shapes (e.g. 0.1) free of underflow.
  double log_gamma_variate(double shape);

 private:
  std::mt19937_64 engine_;
};

}  // namespace pairmix
