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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "qot/errors.hpp"
#include "qot/hash_family.hpp"
#include "qot/pauli.hpp"

namespace qot {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// One parallel measurement setting: a basis character ('x'|'y'|'z') per
/// qubit, left to right in qubit order.
struct BasisSetting {
  std::string bases;

  int n() const { return static_cast<int>(bases.size()); }
  Basis at(int qubit) const {
    return basis_from_char(bases[static_cast<std::size_t>(qubit)]);
  }
};

/// Where a setting came from: one of the three uniform settings, or a
/// color->basis assignment applied to one family member.
struct Provenance {
  enum class Kind { uniform, derived };
  Kind kind = Kind::uniform;
  Basis uniform_basis = Basis::X;        // kind == uniform
  int function_index = -1;               // kind == derived, 0-based
  std::vector<Basis> color_to_basis;     // kind == derived, indexed by color
};

struct PlanSetting {
  BasisSetting setting;
  Provenance provenance;
};

/// A compiled measurement plan. Setting IDs are 0-based positions in
/// `settings`; counts files reference them by that ID. Settings are pairwise
/// distinct as basis vectors (duplicates are dropped at compile time, first
/// occurrence wins).
struct MeasurementPlan {
  int n = 0;
  int k = 0;
  std::uint64_t shots = 0;  // per-setting repetitions M
  std::vector<PlanSetting> settings;

  int size() const { return static_cast<int>(settings.size()); }
  std::uint64_t total_rounds() const {
    return shots * static_cast<std::uint64_t>(settings.size());
  }
  const BasisSetting& setting(int id) const {
    if (id < 0 || id >= size())
      throw invalid_argument("setting id " + std::to_string(id) +
                             " out of range");
    return settings[static_cast<std::size_t>(id)].setting;
  }
};

// ---------------------------------------------------------------------------
// Plan compilation
// ---------------------------------------------------------------------------

namespace detail {

inline void append_unique(MeasurementPlan& plan,
                          std::unordered_set<std::string>& seen,
                          std::string bases, Provenance prov) {
  if (seen.insert(bases).second)
    plan.settings.push_back({BasisSetting{std::move(bases)}, std::move(prov)});
}

inline void append_uniform_settings(MeasurementPlan& plan,
                                    std::unordered_set<std::string>& seen) {
  for (Basis b : kAllBases) {
    Provenance prov;
    prov.kind = Provenance::Kind::uniform;
    prov.uniform_basis = b;
    append_unique(plan, seen,
                  std::string(static_cast<std::size_t>(plan.n), to_char(b)),
                  std::move(prov));
  }
}

inline std::string apply_color_map(const HashFunction& f,
                                   std::span<const Basis> color_to_basis) {
  std::string bases(static_cast<std::size_t>(f.n()), 'z');
  for (int qubit = 0; qubit < f.n(); ++qubit)
    bases[static_cast<std::size_t>(qubit)] =
        to_char(color_to_basis[f.colors[static_cast<std::size_t>(qubit)]]);
  return bases;
}

}  // namespace detail

/// Compiles a (n, 2) family into the pair protocol: the three uniform
/// settings (all-x, all-y, all-z), then for each family member the six
/// mixed settings in the fixed order
///   (color0, color1) = xy, yx, xz, zx, yz, zy.
/// The order is part of the format: setting IDs are reproducible across
/// runs. Requires family.k == 2; the family is trusted (verify separately).
inline MeasurementPlan plan_k2(const PerfectHashFamily& family,
                               std::uint64_t shots) {
  validate_family(family);
  if (family.k != 2) throw invalid_argument("plan_k2 requires a k = 2 family");
  if (shots < 1) throw invalid_argument("shots must be >= 1");

  MeasurementPlan plan;
  plan.n = family.n;
  plan.k = 2;
  plan.shots = shots;

  std::unordered_set<std::string> seen;
  detail::append_uniform_settings(plan, seen);

  static constexpr std::array<std::array<Basis, 2>, 6> kMixedOrder = {{
      {Basis::X, Basis::Y},
      {Basis::Y, Basis::X},
      {Basis::X, Basis::Z},
      {Basis::Z, Basis::X},
      {Basis::Y, Basis::Z},
      {Basis::Z, Basis::Y},
  }};

  for (int i = 0; i < family.size(); ++i) {
    const HashFunction& f = family.functions[static_cast<std::size_t>(i)];
    for (const auto& pair : kMixedOrder) {
      Provenance prov;
      prov.kind = Provenance::Kind::derived;
      prov.function_index = i;
      prov.color_to_basis = {pair[0], pair[1]};
      detail::append_unique(plan, seen, detail::apply_color_map(f, pair),
                            std::move(prov));
    }
  }
  return plan;
}

/// Compiles a general (n, k) family: the three uniform settings, then for
/// each member every non-constant color->basis assignment (3^k - 3 of them,
/// lexicographic in x < y < z with color 0 the most significant digit).
/// Identical basis vectors arising from different members are deduplicated.
/// For k = 2 this routes through plan_k2 so the two entry points agree
/// exactly.
inline MeasurementPlan plan_general(const PerfectHashFamily& family,
                                    std::uint64_t shots) {
  validate_family(family);
  if (shots < 1) throw invalid_argument("shots must be >= 1");
  if (family.k == 2) return plan_k2(family, shots);
  if (family.k > 20)
    throw resource_limit("plan_general: 3^k settings per function exceeds the guard");

  MeasurementPlan plan;
  plan.n = family.n;
  plan.k = family.k;
  plan.shots = shots;

  std::unordered_set<std::string> seen;
  detail::append_uniform_settings(plan, seen);

  std::uint64_t assignments = 1;
  for (int i = 0; i < family.k; ++i) assignments *= 3;

  for (int i = 0; i < family.size(); ++i) {
    const HashFunction& f = family.functions[static_cast<std::size_t>(i)];
    for (std::uint64_t code = 0; code < assignments; ++code) {
      std::vector<Basis> color_to_basis(static_cast<std::size_t>(family.k));
      std::uint64_t c = code;
      bool constant = true;
      for (int color = family.k - 1; color >= 0; --color) {
        color_to_basis[static_cast<std::size_t>(color)] = kAllBases[c % 3];
        c /= 3;
      }
      for (int color = 1; color < family.k; ++color)
        if (color_to_basis[static_cast<std::size_t>(color)] != color_to_basis[0])
          constant = false;
      if (constant) continue;  // uniform settings are shared across members
      Provenance prov;
      prov.kind = Provenance::Kind::derived;
      prov.function_index = i;
      prov.color_to_basis = color_to_basis;
      detail::append_unique(plan, seen,
                            detail::apply_color_map(f, color_to_basis),
                            std::move(prov));
    }
  }
  return plan;
}

/// Rounds needed by the naive strategy of tomographing disjoint pairs in
/// parallel: 9 M C(n,2) / (n/2). Only defined for k = 2 and even n.
inline std::uint64_t naive_rounds(int n, int k, std::uint64_t shots) {
  if (k != 2)
    throw invalid_argument("naive_rounds supports k = 2 only");
  if (n < 2 || n % 2 != 0)
    throw invalid_argument("naive_rounds requires even n >= 2");
  if (shots < 1) throw invalid_argument("shots must be >= 1");
  // C(n,2) / (n/2) = n - 1 exactly.
  return 9 * shots * static_cast<std::uint64_t>(n - 1);
}

// ---------------------------------------------------------------------------
// Coverage queries
// ---------------------------------------------------------------------------

/// True if the setting measures every non-identity position of `label`
/// (aligned with `qubits`) in the matching basis. Identity positions are
/// unconstrained: their estimate ignores the basis at that qubit.
inline bool setting_covers(const BasisSetting& setting,
                           std::span<const int> qubits,
                           const std::string& label) {
  for (std::size_t j = 0; j < qubits.size(); ++j) {
    const Pauli p = pauli_from_char(label[j]);
    if (p == Pauli::I) continue;
    if (setting.at(qubits[j]) != basis_of(p)) return false;
  }
  return true;
}

/// IDs of all plan settings covering (qubits, label), ascending. The label
/// must contain at least one non-identity factor.
inline std::vector<int> covering_settings(const MeasurementPlan& plan,
                                          std::span<const int> qubits,
                                          const std::string& label) {
  if (label.size() != qubits.size())
    throw invalid_argument("label length must match subset size");
  bool nontrivial = false;
  for (std::size_t j = 0; j < qubits.size(); ++j) {
    if (qubits[j] < 0 || qubits[j] >= plan.n)
      throw invalid_argument("subset index out of range");
    if (pauli_from_char(label[j]) != Pauli::I) nontrivial = true;
  }
  if (!nontrivial)
    throw invalid_argument(
        "all-identity label is fixed at 1 and is never measured");

  std::vector<int> ids;
  for (int id = 0; id < plan.size(); ++id)
    if (setting_covers(plan.settings[static_cast<std::size_t>(id)].setting,
                       qubits, label))
      ids.push_back(id);
  return ids;
}

}  // namespace qot
