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

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qot/backend.hpp"
#include "qot/errors.hpp"
#include "qot/hash_family.hpp"
#include "qot/parallel.hpp"
#include "qot/pauli.hpp"
#include "qot/schedule.hpp"

namespace qot {

// ---------------------------------------------------------------------------
// Domain type
// ---------------------------------------------------------------------------

/// A reconstructed k-qubit reduced density matrix.
///
/// pauli_coeffs holds all 4^k labels; the all-identity coefficient is fixed
/// at 1 (it is never estimated). The matrix satisfies
///   rho = (1/2^k) sum_L coeff(L) * P_L
/// which forces Hermiticity and unit trace. Raw (linear-inversion) matrices
/// may have negative eigenvalues; `projected` records whether the PSD
/// projection was applied.
struct ReducedDensityMatrix {
  std::vector<int> qubits;  // 0-based, in tensor-factor order
  std::map<std::string, double> pauli_coeffs;
  Eigen::MatrixXcd matrix;
  bool projected = false;
  std::optional<double> concurrence;  // k = 2 only
  std::optional<double> eof;          // k = 2 only

  int k() const { return static_cast<int>(qubits.size()); }
};

struct EstimateOptions {
  /// Average each coefficient over every covering setting instead of the
  /// first one (plan order). Uses strictly more of the collected data;
  /// never increases variance.
  bool pooling = false;
  /// Replace the linear-inversion matrix by its PSD projection.
  bool psd_projection = false;
  /// Fill concurrence / entanglement of formation for pair subsets.
  bool entanglement = false;
  int workers = 1;
};

// ---------------------------------------------------------------------------
// Pauli-tensor arithmetic (row-sparse: each Pauli tensor has exactly one
// nonzero entry per row)
// ---------------------------------------------------------------------------

namespace detail {

/// Nonzero entry of row `a` of the k-fold Pauli tensor `label`:
/// returns (column, value).
inline std::pair<std::size_t, Complex> pauli_row_entry(const std::string& label,
                                                       std::size_t a) {
  const int k = static_cast<int>(label.size());
  std::size_t b = a;
  Complex value(1, 0);
  for (int j = 0; j < k; ++j) {
    const std::size_t bit = std::size_t{1} << (k - 1 - j);
    const bool aj = (a & bit) != 0;
    switch (pauli_from_char(label[static_cast<std::size_t>(j)])) {
      case Pauli::I:
        break;
      case Pauli::X:
        b ^= bit;
        break;
      case Pauli::Y:
        b ^= bit;
        value *= aj ? Complex(0, 1) : Complex(0, -1);
        break;
      case Pauli::Z:
        if (aj) value = -value;
        break;
    }
  }
  return {b, value};
}

}  // namespace detail

/// rho = (1/2^k) sum_L coeff(L) P_L. Labels absent from the map contribute 0.
inline Eigen::MatrixXcd matrix_from_coeffs(
    const std::map<std::string, double>& coeffs, int k) {
  const std::size_t dim = std::size_t{1} << k;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(dim));
  const double scale = 1.0 / static_cast<double>(dim);
  for (const auto& [label, coeff] : coeffs) {
    if (static_cast<int>(label.size()) != k)
      throw invalid_argument("coefficient label of wrong length: " + label);
    if (coeff == 0.0) continue;
    for (std::size_t a = 0; a < dim; ++a) {
      const auto [b, value] = detail::pauli_row_entry(label, a);
      rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
          scale * coeff * value;
    }
  }
  return rho;
}

/// coeff(L) = Re tr(P_L rho) for every label of length k.
inline std::map<std::string, double> coeffs_from_matrix(
    const Eigen::MatrixXcd& rho, int k) {
  std::map<std::string, double> coeffs;
  const std::size_t dim = std::size_t{1} << k;
  for (const std::string& label : all_pauli_labels(k)) {
    Complex trace(0, 0);
    for (std::size_t a = 0; a < dim; ++a) {
      const auto [b, value] = detail::pauli_row_entry(label, a);
      trace += value * rho(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
    }
    coeffs[label] = trace.real();
  }
  return coeffs;
}

// ---------------------------------------------------------------------------
// Coefficient estimation from counts
// ---------------------------------------------------------------------------

/// Mean over shots of the +/-1 product across `qubits`: bit '0' counts as
/// +1, bit '1' as -1. The Pauli this estimates is determined by the
/// setting's bases at those qubits; the arithmetic itself only needs bits.
/// Reuses every shot of the setting, which is what makes one mixed setting
/// serve the pair label and both single-site labels at once.
inline double expectation_from_counts(const CountsTable& counts,
                                      int setting_id,
                                      std::span<const int> qubits) {
  if (qubits.empty()) throw invalid_argument("subset must be nonempty");
  for (int q : qubits)
    if (q < 0 || q >= counts.n())
      throw invalid_argument("subset index out of range");
  const auto& tallies = counts.for_setting(setting_id);  // throws missing_data
  std::uint64_t total = 0;
  std::int64_t accum = 0;
  for (const auto& [outcome, count] : tallies) {
    int sign = 1;
    for (int q : qubits)
      if (outcome[static_cast<std::size_t>(q)] == '1') sign = -sign;
    accum += sign * static_cast<std::int64_t>(count);
    total += count;
  }
  if (total == 0)
    throw missing_data("setting " + std::to_string(setting_id) +
                       " has zero recorded shots");
  return static_cast<double>(accum) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Routing
// ---------------------------------------------------------------------------

/// Default dataset routing for one pair (r, s): for each of the 15
/// non-identity pair labels, the first covering setting in plan order.
///
/// For plans built by plan_k2 this reproduces the canonical routing:
/// same-basis labels (xx, yy, zz) and single-site labels resolve to the
/// uniform settings, and mixed labels resolve to the six settings of the
/// earliest family member that separates r and s -- for the binary family,
/// the most significant bit on which the 0-based indices of r and s differ.
/// The orientation (which of r, s is color 0) is implicit in the matching
/// itself: we select the setting whose bases at (r, s) equal the label.
inline std::map<std::string, int> route_pair(int r, int s,
                                             const MeasurementPlan& plan) {
  if (r == s) throw invalid_argument("pair requires two distinct qubits");
  const std::array<int, 2> qubits = {r, s};
  std::map<std::string, int> routes;
  for (const std::string& label : all_pauli_labels(2)) {
    if (label == "II") continue;
    const std::vector<int> ids = covering_settings(plan, qubits, label);
    if (ids.empty())
      throw missing_data("plan has no setting measuring qubits (" +
                         std::to_string(r + 1) + "," + std::to_string(s + 1) +
                         ") in bases " + label);
    routes[label] = ids.front();
  }
  return routes;
}

// ---------------------------------------------------------------------------
// PSD projection
// ---------------------------------------------------------------------------

/// Eigenvalue clipping: diagonalize the (Hermitian) input, zero out the
/// negative eigenvalues, rescale the spectrum to unit trace. Idempotent.
inline Eigen::MatrixXcd project_psd_matrix(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != rho.cols()) throw invalid_argument("matrix must be square");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw invalid_argument("project_psd requires a Hermitian input");
  const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
  const double trace = vals.sum();
  if (trace <= 0)
    throw invalid_argument("matrix has no positive spectral weight");
  vals /= trace;
  return es.eigenvectors() * vals.asDiagonal() *
         es.eigenvectors().adjoint();
}

inline ReducedDensityMatrix project_psd(const ReducedDensityMatrix& rdm) {
  ReducedDensityMatrix out;
  out.qubits = rdm.qubits;
  out.matrix = project_psd_matrix(rdm.matrix);
  out.pauli_coeffs = coeffs_from_matrix(out.matrix, rdm.k());
  out.projected = true;
  return out;
}

// ---------------------------------------------------------------------------
// Two-qubit entanglement measures
// ---------------------------------------------------------------------------

/// Wootters concurrence. With rho_tilde = (sy (x) sy) conj(rho) (sy (x) sy)
/// and l_1 >= ... >= l_4 the square roots of the eigenvalues of
/// rho * rho_tilde:  C = max(0, l_1 - l_2 - l_3 - l_4).
///
/// The input must be a density matrix: Hermitian, unit trace, and PSD with
/// eigenvalues >= -psd_tol. Raw finite-shot estimates often violate
/// positivity; project them (project_psd) first.
inline double concurrence(const Eigen::Matrix4cd& rho, double psd_tol = 1e-8) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw invalid_argument("concurrence requires a Hermitian matrix");
  if (std::abs(rho.trace().real() - 1.0) > 1e-6)
    throw invalid_argument("concurrence requires a unit-trace matrix");
  {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
    if (es.eigenvalues().minCoeff() < -psd_tol)
      throw invalid_argument(
          "concurrence requires a PSD matrix; apply project_psd first");
  }

  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  // sigma_y (x) sigma_y is real: antidiagonal (-1, 1, 1, -1).
  yy(0, 3) = Complex(-1, 0);
  yy(1, 2) = Complex(1, 0);
  yy(2, 1) = Complex(1, 0);
  yy(3, 0) = Complex(-1, 0);

  const Eigen::Matrix4cd rho_tilde = yy * rho.conjugate() * yy;
  const Eigen::Matrix4cd product = rho * rho_tilde;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(product);

  std::array<double, 4> lambdas{};
  for (int i = 0; i < 4; ++i)
    lambdas[static_cast<std::size_t>(i)] =
        std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  std::sort(lambdas.begin(), lambdas.end(), std::greater<double>());
  const double c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
  return std::clamp(c, 0.0, 1.0);
}

/// Binary entropy in bits, with h(0) = h(1) = 0.
inline double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Entanglement of formation from a concurrence value:
/// EoF = h( (1 + sqrt(1 - C^2)) / 2 ).
inline double entanglement_of_formation(double concurrence_value) {
  if (concurrence_value < 0.0 || concurrence_value > 1.0)
    throw invalid_argument("concurrence must lie in [0, 1]");
  const double root = std::sqrt(std::max(0.0, 1.0 - concurrence_value * concurrence_value));
  return binary_entropy(0.5 * (1.0 + root));
}

inline double entanglement_of_formation(const Eigen::Matrix4cd& rho,
                                        double psd_tol = 1e-8) {
  return entanglement_of_formation(concurrence(rho, psd_tol));
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

namespace detail {

inline double estimate_one_label(const CountsTable& counts,
                                 const MeasurementPlan& plan,
                                 std::span<const int> subset,
                                 const std::string& label, bool pooling) {
  // Estimation uses only the non-identity positions.
  std::vector<int> active;
  for (std::size_t j = 0; j < subset.size(); ++j)
    if (pauli_from_char(label[j]) != Pauli::I) active.push_back(subset[j]);

  const std::vector<int> ids = covering_settings(plan, subset, label);
  if (ids.empty()) {
    std::string qubit_list;
    for (int q : subset)
      qubit_list += (qubit_list.empty() ? "" : ",") + std::to_string(q + 1);
    throw missing_data("plan has no setting measuring qubits (" + qubit_list +
                       ") in bases " + label);
  }
  if (!pooling) return expectation_from_counts(counts, ids.front(), active);
  double sum = 0;
  for (int id : ids) sum += expectation_from_counts(counts, id, active);
  return sum / static_cast<double>(ids.size());
}

inline void maybe_fill_entanglement(ReducedDensityMatrix& rdm) {
  if (rdm.k() != 2) return;
  try {
    const double c = concurrence(Eigen::Matrix4cd(rdm.matrix));
    rdm.concurrence = c;
    rdm.eof = entanglement_of_formation(c);
  } catch (const invalid_argument&) {
    // Raw estimate too unphysical to score; leave the fields unset.
  }
}

}  // namespace detail

/// Checks that counts contain every plan setting with exactly plan.shots
/// recorded shots. Throws missing_data naming the first offending setting.
inline void validate_counts(const CountsTable& counts,
                            const MeasurementPlan& plan) {
  if (counts.n() != plan.n)
    throw invalid_argument("counts and plan disagree on qubit count");
  for (int id = 0; id < plan.size(); ++id) {
    if (!counts.has_setting(id))
      throw missing_data("no counts recorded for setting " + std::to_string(id));
    const std::uint64_t total = counts.total_shots(id);
    if (total != plan.shots)
      throw missing_data("setting " + std::to_string(id) + " has " +
                         std::to_string(total) + " shots, plan expects " +
                         std::to_string(plan.shots));
  }
}

/// Estimates all 4^k - 1 nontrivial coefficients of the subset's RDM from
/// counts and assembles the matrix. The default routing takes each
/// coefficient from the first covering setting in plan order; pooling
/// averages over all of them.
inline ReducedDensityMatrix reconstruct_rdm(std::span<const int> subset,
                                            const CountsTable& counts,
                                            const MeasurementPlan& plan,
                                            const EstimateOptions& options = {}) {
  if (counts.n() != plan.n)
    throw invalid_argument("counts and plan disagree on qubit count");
  detail::validate_subset(plan.n, subset);
  const int k = static_cast<int>(subset.size());
  if (k > 8)
    throw resource_limit("reconstruction supports subsets of at most 8 qubits");

  ReducedDensityMatrix rdm;
  rdm.qubits.assign(subset.begin(), subset.end());
  for (const std::string& label : all_pauli_labels(k)) {
    if (label == std::string(static_cast<std::size_t>(k), 'I')) {
      rdm.pauli_coeffs[label] = 1.0;
      continue;
    }
    rdm.pauli_coeffs[label] =
        detail::estimate_one_label(counts, plan, subset, label, options.pooling);
  }
  rdm.matrix = matrix_from_coeffs(rdm.pauli_coeffs, k);
  if (options.psd_projection) rdm = project_psd(rdm);
  if (options.entanglement) detail::maybe_fill_entanglement(rdm);
  return rdm;
}

/// Exact-mode reconstruction: identical assembly, but the coefficients come
/// from the backend's exact expectation values instead of counts. Used to
/// validate the estimation path against the partial-trace oracle.
template <typename State>
ReducedDensityMatrix reconstruct_rdm_exact(const State& state,
                                           std::span<const int> subset,
                                           const EstimateOptions& options = {}) {
  detail::validate_subset(state.n(), subset);
  const int k = static_cast<int>(subset.size());
  if (k > 8)
    throw resource_limit("reconstruction supports subsets of at most 8 qubits");

  ReducedDensityMatrix rdm;
  rdm.qubits.assign(subset.begin(), subset.end());
  for (const std::string& label : all_pauli_labels(k)) {
    if (label == std::string(static_cast<std::size_t>(k), 'I')) {
      rdm.pauli_coeffs[label] = 1.0;
      continue;
    }
    const std::vector<Pauli> paulis = parse_pauli_label(label);
    rdm.pauli_coeffs[label] = exact_expectation(state, subset, paulis);
  }
  rdm.matrix = matrix_from_coeffs(rdm.pauli_coeffs, k);
  if (options.psd_projection) rdm = project_psd(rdm);
  if (options.entanglement) detail::maybe_fill_entanglement(rdm);
  return rdm;
}

/// All C(n, k) subset RDMs in lexicographic subset order. Subsets are
/// processed independently (parallel across workers); the output order and
/// every value are independent of the worker count.
inline std::vector<ReducedDensityMatrix> reconstruct_all(
    const CountsTable& counts, const MeasurementPlan& plan, int k,
    const EstimateOptions& options = {}) {
  if (k < 1 || k > plan.n)
    throw invalid_argument("subset size must lie in [1, n]");
  if (counts.n() != plan.n)
    throw invalid_argument("counts and plan disagree on qubit count");
  const auto total = binomial_capped(plan.n, k, kVerifySubsetGuard);
  if (!total)
    throw resource_limit("reconstruct_all: C(n,k) exceeds the enumeration guard");

  std::vector<std::vector<int>> subsets;
  subsets.reserve(static_cast<std::size_t>(*total));
  std::vector<int> subset(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) subset[static_cast<std::size_t>(i)] = i;
  do {
    subsets.push_back(subset);
  } while (next_combination(subset, plan.n));

  std::vector<ReducedDensityMatrix> out(subsets.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(subsets.size(), options.workers,
               [&](std::size_t begin, std::size_t end) {
                 try {
                   for (std::size_t i = begin; i < end; ++i)
                     out[i] = reconstruct_rdm(subsets[i], counts, plan, options);
                 } catch (...) {
                   const std::lock_guard<std::mutex> lock(failure_mutex);
                   if (!failure) failure = std::current_exception();
                 }
               });
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace qot
