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

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "qot/errors.hpp"
#include "qot/hash_family.hpp"

namespace qot {

using BigInt = boost::multiprecision::cpp_int;

/// Exact C(n, k) in big-integer arithmetic (n = 1024 with large k overflows
/// every fixed-width type).
inline BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt result = 1;
  for (int i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;  // exact at every step
  }
  return result;
}

// ---------------------------------------------------------------------------
// Tail bounds
// ---------------------------------------------------------------------------

/// Two-sided Hoeffding tail for the mean of M variables valued in [-1, 1]:
/// Pr[|mean - E| > eps] <= 2 exp(-M eps^2 / 2). Can exceed 1 (vacuous).
inline double hoeffding_tail(std::uint64_t shots, double epsilon) {
  if (shots < 1) throw invalid_argument("shots must be >= 1");
  if (!(epsilon > 0.0)) throw invalid_argument("epsilon must be positive");
  return 2.0 * std::exp(-0.5 * static_cast<double>(shots) * epsilon * epsilon);
}

enum class BoundScope { global, per_subset };

/// ln(4^k - 1), stable for any k.
inline double log_pauli_count(int k) {
  return k * std::log(4.0) + std::log1p(-std::pow(4.0, -k));
}

/// Union-bound failure probability that ANY estimated coefficient deviates
/// by more than eps, capped at 1:
///   global:     2 (4^k - 1) C(n,k) exp(-M eps^2 / 2)   (all subsets)
///   per_subset: 2 (4^k - 1)         exp(-M eps^2 / 2)  (one subset)
inline double failure_bound(std::uint64_t shots, double epsilon, int n, int k,
                            BoundScope scope) {
  if (shots < 1) throw invalid_argument("shots must be >= 1");
  if (!(epsilon > 0.0)) throw invalid_argument("epsilon must be positive");
  if (k < 1 || k > n) throw invalid_argument("requires 1 <= k <= n");
  double log_bound = std::log(2.0) + log_pauli_count(k) -
                     0.5 * static_cast<double>(shots) * epsilon * epsilon;
  if (scope == BoundScope::global) log_bound += log_binomial(n, k);
  return log_bound >= 0.0 ? 1.0 : std::exp(log_bound);
}

/// Shots per setting so that the global failure bound is at most delta:
///   M = ceil( (2/eps^2) ln( 2 (4^k - 1) C(n,k) / delta ) ).
inline std::uint64_t shots_required(double epsilon, double delta, int n, int k) {
  if (!(epsilon > 0.0) || !(epsilon < 2.0))
    throw invalid_argument("epsilon must lie in (0, 2)");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw invalid_argument("delta must lie in (0, 1)");
  if (k < 1 || k > n) throw invalid_argument("requires 1 <= k <= n");
  const double log_term = std::log(2.0) + log_pauli_count(k) +
                          log_binomial(n, k) - std::log(delta);
  const double m = (2.0 / (epsilon * epsilon)) * log_term;
  const double snapped = std::abs(m - std::round(m)) < 1e-6 ? std::round(m) : m;
  return static_cast<std::uint64_t>(
      std::max(1.0, std::ceil(snapped - 1e-12)));
}

// ---------------------------------------------------------------------------
// Campaign arithmetic
// ---------------------------------------------------------------------------

enum class Strategy { qot, naive };

inline std::string to_string(Strategy s) {
  return s == Strategy::qot ? "qot" : "naive";
}

/// One experiment budget: statistical targets, per-setting shots, total
/// rounds under both strategies, and the wall clock of the chosen one.
struct ShotBudget {
  double epsilon = 0;
  double delta = 0;  // global failure bound achieved at `shots`
  std::uint64_t shots = 0;
  int n = 0;
  int k = 0;
  Strategy strategy = Strategy::qot;
  std::uint64_t settings = 0;      // settings in the chosen strategy's plan
  std::uint64_t rounds = 0;        // chosen strategy
  std::uint64_t rounds_qot = 0;    // 3M + 6M ceil(log2 n)
  std::uint64_t rounds_naive = 0;  // 9M C(n,2)/(n/2); 0 when n is odd
  double cycle_seconds = 0;
  double wallclock_seconds = 0;

  double wallclock_days() const { return wallclock_seconds / 86400.0; }
  double wallclock_weeks() const { return wallclock_seconds / (86400.0 * 7.0); }
};

/// Computes the budget for measuring all pair RDMs of n qubits with either
/// the overlapping (qot) or the naive disjoint-pairs strategy. Only k = 2
/// is supported: the naive comparison and the 3M + 6Mq round count are
/// pair-protocol arithmetic. Shots default to shots_required(eps, delta).
inline ShotBudget campaign(int n, int k, double epsilon, double delta,
                           double cycle_seconds, Strategy strategy,
                           std::optional<std::uint64_t> shots_override = {}) {
  if (k != 2)
    throw invalid_argument("campaign supports k = 2 only");
  if (n < 2) throw invalid_argument("campaign requires n >= 2");
  if (!(cycle_seconds > 0.0))
    throw invalid_argument("cycle_seconds must be positive");
  if (strategy == Strategy::naive && n % 2 != 0)
    throw invalid_argument("the naive strategy requires even n");

  ShotBudget budget;
  budget.epsilon = epsilon;
  budget.n = n;
  budget.k = k;
  budget.strategy = strategy;
  budget.cycle_seconds = cycle_seconds;
  budget.shots = shots_override ? *shots_override
                                : shots_required(epsilon, delta, n, k);
  budget.delta = failure_bound(budget.shots, epsilon, n, k, BoundScope::global);

  int q = 0;
  while ((std::uint64_t{1} << q) < static_cast<std::uint64_t>(n)) ++q;
  q = std::max(q, 1);
  budget.rounds_qot = budget.shots * (3 + 6 * static_cast<std::uint64_t>(q));
  budget.rounds_naive =
      n % 2 == 0 ? 9 * budget.shots * static_cast<std::uint64_t>(n - 1) : 0;

  if (strategy == Strategy::qot) {
    budget.settings = 3 + 6 * static_cast<std::uint64_t>(q);
    budget.rounds = budget.rounds_qot;
  } else {
    budget.settings = 9;  // per disjoint-pair block
    budget.rounds = budget.rounds_naive;
  }
  budget.wallclock_seconds =
      static_cast<double>(budget.rounds) * cycle_seconds;
  return budget;
}

}  // namespace qot
