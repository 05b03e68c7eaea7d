// Copyright 2026 The qot developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>

namespace qot {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// master seed; also a decent general-purpose 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the i-th derived stream of a master seed.
///
/// stream_seed(master, i) = mix64(master + (i + 1) * 0x9e3779b97f4a7c15).
/// Stream 0 is distinct from the master itself, so consuming the master
/// generator never collides with a derived stream.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master + (stream + 1) * 0x9e3779b97f4a7c15ULL);
}

/// Seedable generator with portable derived quantities.
///
/// The raw source is std::mt19937_64 (a fixed, standardized algorithm).
/// Uniform doubles, bounded integers and normal deviates are produced by
/// the explicit recipes below rather than the standard-library distribution
/// templates, whose output is implementation-defined. Two builds of this
/// library on different standard libraries therefore produce identical
/// streams for identical seeds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Unbiased uniform integer in [0, bound) by rejection sampling.
  std::uint64_t uniform_int(std::uint64_t bound) {
    const std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint64_t x = gen_();
      if (x >= threshold) return x % bound;
    }
  }

  /// Standard normal deviate via Box-Muller; one spare value is cached.
  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    return r * std::cos(angle);
  }

 private:
  std::mt19937_64 gen_;
  std::optional<double> spare_;
};

}  // namespace qot
