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

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "qot/hash_family.hpp"

using namespace qot;

namespace {

// Independent oracle: the family-size inequality evaluated directly in log
// space, scanning N upward. Boundary cases where the bound equals delta
// exactly are accepted (the ceiling-formula convention).
int smallest_size_by_scan(int n, int k, double delta) {
  double p = 1.0;
  for (int i = 1; i <= k; ++i) p *= static_cast<double>(i) / k;
  const double log_c = log_binomial(n, k);
  const double log_delta = std::log(delta);
  for (int size = 1;; ++size) {
    if (log_c + size * std::log1p(-p) <= log_delta + 1e-9) return size;
  }
}

}  // namespace

TEST_CASE("binary family reproduces the worked (16,2) values") {
  const PerfectHashFamily family = binary_family(16);
  REQUIRE(family.size() == 4);
  REQUIRE(family.k == 2);
  // Qubit 5 (index 4) has 4 = 0100 in binary: bits 0,1,0,0 MSB first.
  CHECK(family.functions[0].colors[4] == 0);
  CHECK(family.functions[1].colors[4] == 1);
  CHECK(family.functions[2].colors[4] == 0);
  CHECK(family.functions[3].colors[4] == 0);
}

TEST_CASE("binary family edge cases") {
  const PerfectHashFamily f2 = binary_family(2);
  REQUIRE(f2.size() == 1);
  CHECK(f2.functions[0].colors == std::vector<std::uint8_t>{0, 1});

  CHECK(binary_family(1024).size() == 10);
  CHECK(binary_family(1025).size() == 11);
  CHECK(binary_family(3).size() == 2);

  CHECK_THROWS_AS(binary_family(1), invalid_argument);
}

TEST_CASE("binary family is perfect for all n in [2, 64]") {
  for (int n = 2; n <= 64; ++n) {
    const VerifyResult verdict = verify_perfect(binary_family(n));
    INFO("n = " << n);
    CHECK(verdict.perfect);
  }
}

TEST_CASE("required_random_size matches direct evaluation of the bound") {
  struct Case {
    int n, k;
    double delta;
    int expected;
  };
  // Expected values computed by smallest_size_by_scan (re-checked below).
  const Case cases[] = {
      {16, 2, 0.05, 12}, {2, 2, 0.5, 1},    {1024, 2, 0.01, 26},
      {4, 2, 0.05, 7},   {20, 3, 0.1, 38},  {12, 3, 0.1, 31},
  };
  for (const Case& c : cases) {
    INFO("n=" << c.n << " k=" << c.k << " delta=" << c.delta);
    CHECK(required_random_size(c.n, c.k, c.delta) == c.expected);
    CHECK(smallest_size_by_scan(c.n, c.k, c.delta) == c.expected);
  }
}

TEST_CASE("required_random_size rejects bad arguments") {
  CHECK_THROWS_AS(required_random_size(4, 5, 0.1), invalid_argument);
  CHECK_THROWS_AS(required_random_size(4, 1, 0.1), invalid_argument);
  CHECK_THROWS_AS(required_random_size(4, 2, 0.0), invalid_argument);
  CHECK_THROWS_AS(required_random_size(4, 2, 1.0), invalid_argument);
}

TEST_CASE("required_random_size is monotone in n and delta") {
  for (int k = 2; k <= 4; ++k) {
    int prev = 0;
    for (int n = k; n <= 40; ++n) {
      if (n < 2 || k > n) continue;
      const int size = required_random_size(std::max(n, k), k, 0.05);
      CHECK(size >= prev);
      prev = size;
    }
  }
  int prev = 1 << 30;
  for (double delta : {0.001, 0.01, 0.05, 0.2, 0.5, 0.9}) {
    const int size = required_random_size(24, 3, delta);
    CHECK(size <= prev);
    prev = size;
  }
}

TEST_CASE("random families are reproducible and have the promised size") {
  const PerfectHashFamily a = random_family(4, 2, 0.05, 1234);
  const PerfectHashFamily b = random_family(4, 2, 0.05, 1234);
  REQUIRE(a.size() == 7);
  REQUIRE(b.size() == 7);
  for (int i = 0; i < a.size(); ++i)
    CHECK(a.functions[i].colors == b.functions[i].colors);

  const PerfectHashFamily c = random_family(4, 2, 0.05, 1235);
  bool any_difference = false;
  for (int i = 0; i < a.size(); ++i)
    if (a.functions[i].colors != c.functions[i].colors) any_difference = true;
  CHECK(any_difference);

  CHECK(random_family(20, 3, 0.1, 9).size() == 38);
  for (const HashFunction& f : random_family(6, 3, 0.2, 7).functions)
    for (std::uint8_t color : f.colors) CHECK(color < 3);
}

TEST_CASE("Monte-Carlo check of the random-family failure bound at n=16") {
  // 12 functions suffice for delta = 0.05; the union bound actually gives
  // 120 * 2^-12 ~ 0.029, so the observed failure fraction over 1e4 seeds
  // must sit safely below 0.05.
  const int trials = 10000;
  int failures = 0;
  for (int seed = 0; seed < trials; ++seed)
    if (!verify_perfect(random_family(16, 2, 0.05, static_cast<std::uint64_t>(seed))))
      ++failures;
  const double fraction = static_cast<double>(failures) / trials;
  INFO("failure fraction = " << fraction);
  CHECK(fraction < 0.05);
}

TEST_CASE("verify_perfect finds the first violating subset") {
  PerfectHashFamily family;
  family.n = 3;
  family.k = 2;
  family.functions.push_back(HashFunction{{0, 0, 0}});
  const VerifyResult verdict = verify_perfect(family);
  REQUIRE_FALSE(verdict.perfect);
  CHECK(verdict.violating_subset == std::vector<int>{0, 1});
}

TEST_CASE("verify_perfect reports a violation only for uncovered subsets") {
  // Two functions that jointly cover all pairs of 4 qubits except {2,3}.
  PerfectHashFamily family;
  family.n = 4;
  family.k = 2;
  family.functions.push_back(HashFunction{{0, 1, 0, 0}});
  family.functions.push_back(HashFunction{{0, 0, 1, 1}});
  const VerifyResult verdict = verify_perfect(family);
  REQUIRE_FALSE(verdict.perfect);
  CHECK(verdict.violating_subset == std::vector<int>{2, 3});
}

TEST_CASE("verify_perfect refuses oversized enumerations") {
  PerfectHashFamily family;
  family.n = 1000;
  family.k = 5;  // C(1000,5) ~ 8e12 subsets
  family.functions.push_back(HashFunction{std::vector<std::uint8_t>(1000, 0)});
  CHECK_THROWS_AS(verify_perfect(family), resource_limit);
}

TEST_CASE("injective_functions on the (16,2) binary family") {
  const PerfectHashFamily family = binary_family(16);

  // Qubits 1 and 2 (indices 0, 1): 0000 vs 0001 differ only in the last
  // bit, i.e. only the least-significant-bit function separates them.
  const std::vector<int> s12 = {0, 1};
  CHECK(injective_functions(family, s12) == std::vector<int>{3});

  // Qubits 1 and 16: 0000 vs 1111 differ everywhere.
  const std::vector<int> s116 = {0, 15};
  CHECK(injective_functions(family, s116) == std::vector<int>{0, 1, 2, 3});

  const std::vector<int> degenerate = {4, 4};
  CHECK_THROWS_AS(injective_functions(family, degenerate), invalid_argument);
  const std::vector<int> wrong_size = {1, 2, 3};
  CHECK_THROWS_AS(injective_functions(family, wrong_size), invalid_argument);
}

TEST_CASE("perfect families cover every subset with some injective function") {
  const PerfectHashFamily binary = binary_family(16);
  for (int a = 0; a < 16; ++a)
    for (int b = a + 1; b < 16; ++b) {
      const std::vector<int> subset = {a, b};
      CHECK_FALSE(injective_functions(binary, subset).empty());
    }

  // First seed whose random (12,3) family verifies perfect.
  for (std::uint64_t seed = 0;; ++seed) {
    const PerfectHashFamily family = random_family(12, 3, 0.1, seed);
    if (!verify_perfect(family)) continue;
    std::vector<int> subset = {0, 1, 2};
    do {
      CHECK_FALSE(injective_functions(family, subset).empty());
    } while (next_combination(subset, 12));
    break;
  }
}

TEST_CASE("checkerboard coloring") {
  const HashFunction board2 = checkerboard_coloring(2);
  CHECK(board2.colors == std::vector<std::uint8_t>{0, 1, 1, 0});

  for (int side : {3, 4}) {
    const HashFunction board = checkerboard_coloring(side);
    int pairs_checked = 0;
    for (int row = 0; row < side; ++row)
      for (int col = 0; col < side; ++col) {
        const int site = row * side + col;
        if (col + 1 < side) {
          CHECK(board.colors[site] != board.colors[site + 1]);
          ++pairs_checked;
        }
        if (row + 1 < side) {
          CHECK(board.colors[site] != board.colors[site + side]);
          ++pairs_checked;
        }
      }
    CHECK(pairs_checked == 2 * side * (side - 1));
  }
  CHECK_THROWS_AS(checkerboard_coloring(1), invalid_argument);
}

TEST_CASE("construction tags round-trip through their string form") {
  CHECK(Construction::parse("binary").kind == Construction::Kind::binary);
  const Construction random{Construction::Kind::random, 42, 0.05};
  const Construction parsed = Construction::parse(random.to_string());
  CHECK(parsed.kind == Construction::Kind::random);
  CHECK(parsed.seed == 42);
  CHECK(parsed.delta == Catch::Approx(0.05));
  CHECK(Construction::parse("explicit").kind == Construction::Kind::explicit_tag);
}
