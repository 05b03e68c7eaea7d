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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qot/errors.hpp"
#include "qot/rng.hpp"

namespace qot {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// A coloring of n qubits by colors {0, ..., k-1}.
///
/// Qubits are 0-based throughout the C++ API; file formats label them
/// 1..n left to right. A function need not use every color: random draws
/// may miss one, in which case it is simply never injective on any subset
/// that would need the missing color.
struct HashFunction {
  std::vector<std::uint8_t> colors;  // colors[q] = color of qubit q

  int n() const { return static_cast<int>(colors.size()); }

  /// True if all qubits in `subset` receive pairwise distinct colors.
  bool injective_on(std::span<const int> subset) const {
    std::uint64_t seen = 0;  // color count never exceeds 64 in practice
    for (int q : subset) {
      const std::uint64_t bit = std::uint64_t{1} << colors[static_cast<std::size_t>(q)];
      if (seen & bit) return false;
      seen |= bit;
    }
    return true;
  }
};

/// How a family was produced; kept for provenance and file round-trips.
struct Construction {
  enum class Kind { binary, random, explicit_tag };
  Kind kind = Kind::explicit_tag;
  std::uint64_t seed = 0;  // random only
  double delta = 0.0;      // random only

  std::string to_string() const {
    switch (kind) {
      case Kind::binary: return "binary";
      case Kind::random:
        return "random(seed=" + std::to_string(seed) +
               ",delta=" + std::to_string(delta) + ")";
      default: return "explicit";
    }
  }

  static Construction parse(const std::string& s) {
    Construction c;
    if (s == "binary") {
      c.kind = Kind::binary;
    } else if (s.rfind("random", 0) == 0) {
      c.kind = Kind::random;
      const auto seed_pos = s.find("seed=");
      const auto delta_pos = s.find("delta=");
      if (seed_pos != std::string::npos)
        c.seed = std::stoull(s.substr(seed_pos + 5));
      if (delta_pos != std::string::npos)
        c.delta = std::stod(s.substr(delta_pos + 6));
    } else {
      c.kind = Kind::explicit_tag;
    }
    return c;
  }
};

/// An ordered list of colorings intended to be an (n, k) perfect hash
/// family: every k-subset of qubits gets k distinct colors under at least
/// one member. Randomly drawn families carry that property only with
/// probability >= 1 - delta; verify_perfect() checks it exhaustively.
struct PerfectHashFamily {
  int n = 0;
  int k = 0;
  std::vector<HashFunction> functions;
  Construction construction;

  int size() const { return static_cast<int>(functions.size()); }
};

inline void validate_family(const PerfectHashFamily& family) {
  if (family.n < 2 || family.k < 2 || family.k > family.n)
    throw invalid_argument("family requires 2 <= k <= n");
  if (family.k > 64) throw invalid_argument("k larger than 64 is unsupported");
  if (family.functions.empty())
    throw invalid_argument("family has no member functions");
  for (const HashFunction& f : family.functions) {
    if (f.n() != family.n)
      throw invalid_argument("family member has mismatched qubit count");
    for (std::uint8_t c : f.colors)
      if (c >= family.k)
        throw invalid_argument("family member uses a color out of range");
  }
}

// ---------------------------------------------------------------------------
// Small combinatorics helpers
// ---------------------------------------------------------------------------

/// C(n, k) if it does not exceed `cap`, else nullopt. Exact integer
/// arithmetic; used for enumeration guards.
inline std::optional<std::uint64_t> binomial_capped(int n, int k,
                                                    std::uint64_t cap) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (int i = 1; i <= k; ++i) {
    // result * (n - k + i) / i is exact at every step (it is C(n-k+i, i)).
    result = result * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (result > cap) return std::nullopt;
  }
  return static_cast<std::uint64_t>(result);
}

/// ln C(n, k) via lgamma.
inline double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Advance a k-combination of {0..n-1} in lexicographic order.
/// Returns false when `comb` was the last combination.
inline bool next_combination(std::vector<int>& comb, int n) {
  const int k = static_cast<int>(comb.size());
  for (int i = k - 1; i >= 0; --i) {
    if (comb[static_cast<std::size_t>(i)] < n - k + i) {
      ++comb[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

/// The explicit (n, 2) family of q = ceil(log2 n) functions: function i
/// colors a qubit by the i-th most significant bit of its 0-based index
/// written with q binary digits. Distinct qubits have distinct binary
/// expansions, so some bit separates them: the family is perfect.
inline PerfectHashFamily binary_family(int n) {
  if (n < 2) throw invalid_argument("binary_family requires n >= 2");
  int q = 0;
  while ((std::uint64_t{1} << q) < static_cast<std::uint64_t>(n)) ++q;
  q = std::max(q, 1);

  PerfectHashFamily family;
  family.n = n;
  family.k = 2;
  family.construction.kind = Construction::Kind::binary;
  family.functions.reserve(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    HashFunction f;
    f.colors.resize(static_cast<std::size_t>(n));
    const int shift = q - 1 - i;  // function 0 reads the most significant bit
    for (int qubit = 0; qubit < n; ++qubit)
      f.colors[static_cast<std::size_t>(qubit)] =
          static_cast<std::uint8_t>((qubit >> shift) & 1);
    family.functions.push_back(std::move(f));
  }
  return family;
}

/// Smallest N with C(n,k) * (1 - k!/k^k)^N < delta, evaluated as
/// N = ceil( ln(C(n,k)/delta) / -ln(1 - k!/k^k) ).
/// The ratio is snapped to the nearest integer when within 1e-9 so that
/// analytically integral boundaries (e.g. n=2, k=2, delta=0.5) do not get
/// bumped by floating-point noise.
inline int required_random_size(int n, int k, double delta) {
  if (k < 2 || k > n) throw invalid_argument("required 2 <= k <= n");
  if (k > 64) throw invalid_argument("k larger than 64 is unsupported");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw invalid_argument("delta must lie in (0, 1)");
  double injective_prob = 1.0;  // k!/k^k as prod_{i=1..k} i/k
  for (int i = 1; i <= k; ++i)
    injective_prob *= static_cast<double>(i) / static_cast<double>(k);
  const double rate = -std::log1p(-injective_prob);
  const double x = (log_binomial(n, k) - std::log(delta)) / rate;
  const double snapped = std::abs(x - std::round(x)) < 1e-9 ? std::round(x) : x;
  return std::max(1, static_cast<int>(std::ceil(snapped - 1e-12)));
}

/// Draws required_random_size(n, k, delta) functions with i.i.d. uniform
/// colors from mt19937_64(seed), qubit-major within each function. The
/// result is NOT guaranteed perfect; callers verify when it matters.
inline PerfectHashFamily random_family(int n, int k, double delta,
                                       std::uint64_t seed) {
  const int size = required_random_size(n, k, delta);
  PerfectHashFamily family;
  family.n = n;
  family.k = k;
  family.construction = {Construction::Kind::random, seed, delta};
  family.functions.reserve(static_cast<std::size_t>(size));
  Rng rng(seed);
  for (int i = 0; i < size; ++i) {
    HashFunction f;
    f.colors.resize(static_cast<std::size_t>(n));
    for (int qubit = 0; qubit < n; ++qubit)
      f.colors[static_cast<std::size_t>(qubit)] =
          static_cast<std::uint8_t>(rng.uniform_int(static_cast<std::uint64_t>(k)));
    family.functions.push_back(std::move(f));
  }
  return family;
}

/// Colors the sites of an L x L square lattice by (row + col) mod 2, in
/// row-major site order. Every nearest-neighbor pair is bichromatic, so a
/// single-function "family" built from this coloring covers all such pairs.
inline HashFunction checkerboard_coloring(int side) {
  if (side < 2) throw invalid_argument("checkerboard requires side >= 2");
  HashFunction f;
  f.colors.resize(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
  for (int row = 0; row < side; ++row)
    for (int col = 0; col < side; ++col)
      f.colors[static_cast<std::size_t>(row * side + col)] =
          static_cast<std::uint8_t>((row + col) % 2);
  return f;
}

/// Wraps the checkerboard coloring as a single-member (L^2, 2) family.
/// Not a perfect family: it only separates lattice nearest neighbors.
inline PerfectHashFamily checkerboard_family(int side) {
  PerfectHashFamily family;
  HashFunction f = checkerboard_coloring(side);
  family.n = f.n();
  family.k = 2;
  family.construction.kind = Construction::Kind::explicit_tag;
  family.functions.push_back(std::move(f));
  return family;
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

/// Outcome of an exhaustive perfection check.
struct VerifyResult {
  bool perfect = false;
  std::vector<int> violating_subset;  // lexicographically first, 0-based

  explicit operator bool() const { return perfect; }
};

inline constexpr std::uint64_t kVerifySubsetGuard = 100'000'000;

/// Exhaustively enumerates all k-subsets in lexicographic order and returns
/// the first subset on which no member function is injective, or `perfect`.
/// Refuses (resource_limit) when C(n,k) exceeds kVerifySubsetGuard rather
/// than silently sampling.
inline VerifyResult verify_perfect(const PerfectHashFamily& family) {
  validate_family(family);
  if (!binomial_capped(family.n, family.k, kVerifySubsetGuard))
    throw resource_limit(
        "verify_perfect: C(n,k) exceeds the enumeration guard of 1e8 subsets");

  std::vector<int> subset(static_cast<std::size_t>(family.k));
  for (int i = 0; i < family.k; ++i) subset[static_cast<std::size_t>(i)] = i;
  do {
    bool covered = false;
    for (const HashFunction& f : family.functions) {
      if (f.injective_on(subset)) {
        covered = true;
        break;
      }
    }
    if (!covered) return {false, subset};
  } while (next_combination(subset, family.n));
  return {true, {}};
}

/// Indices (0-based positions in the family; function i here is f_{i+1} in
/// 1-based naming) of all members assigning distinct colors to `subset`,
/// ascending. Nonempty for every k-subset when the family is perfect.
inline std::vector<int> injective_functions(const PerfectHashFamily& family,
                                            std::span<const int> subset) {
  if (static_cast<int>(subset.size()) != family.k)
    throw invalid_argument("subset size must equal the family's k");
  for (int q : subset)
    if (q < 0 || q >= family.n)
      throw invalid_argument("subset index out of range");
  for (std::size_t i = 0; i < subset.size(); ++i)
    for (std::size_t j = i + 1; j < subset.size(); ++j)
      if (subset[i] == subset[j])
        throw invalid_argument("subset entries must be distinct");

  std::vector<int> hits;
  for (int i = 0; i < family.size(); ++i)
    if (family.functions[static_cast<std::size_t>(i)].injective_on(subset))
      hits.push_back(i);
  return hits;
}

}  // namespace qot
