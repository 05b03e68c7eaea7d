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
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qot/errors.hpp"
#include "qot/pauli.hpp"
#include "qot/parallel.hpp"
#include "qot/rng.hpp"
#include "qot/schedule.hpp"

namespace qot {

/// Dense statevectors refuse to exceed this qubit count (16 MB of
/// amplitudes); larger systems go through DimerState.
inline constexpr int kDenseQubitGuard = 20;

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Dense n-qubit pure state. Amplitude index bit layout: qubit 0 is the
/// most significant bit, so the binary expansion of an index read left to
/// right is the outcome string in qubit order.
class PureState {
 public:
  PureState(int n, std::vector<Complex> amplitudes,
            int guard = kDenseQubitGuard)
      : n_(n), amps_(std::move(amplitudes)) {
    if (n < 1) throw invalid_argument("state needs at least one qubit");
    if (n > guard)
      throw resource_limit("dense state of " + std::to_string(n) +
                           " qubits exceeds the guard of " +
                           std::to_string(guard));
    if (amps_.size() != (std::size_t{1} << n))
      throw invalid_argument("amplitude vector must have length 2^n");
    double norm2 = 0;
    for (const Complex& a : amps_) norm2 += std::norm(a);
    if (std::abs(norm2 - 1.0) > 1e-10)
      throw invalid_argument("state is not normalized (|norm^2 - 1| > 1e-10)");
  }

  int n() const { return n_; }
  const std::vector<Complex>& amplitudes() const { return amps_; }

  /// Builds a state from an unnormalized amplitude vector.
  static PureState normalized(int n, std::vector<Complex> amplitudes,
                              int guard = kDenseQubitGuard) {
    double norm2 = 0;
    for (const Complex& a : amplitudes) norm2 += std::norm(a);
    if (norm2 <= 0) throw invalid_argument("cannot normalize the zero vector");
    const double inv = 1.0 / std::sqrt(norm2);
    for (Complex& a : amplitudes) a *= inv;
    return PureState(n, std::move(amplitudes), guard);
  }

 private:
  int n_;
  std::vector<Complex> amps_;
};

/// A state of n qubits composed of disjoint entangled pairs: a perfect
/// matching plus one 2-qubit density matrix per pair. Sampling and exact
/// marginals factorize over pairs, so this scales to thousands of qubits.
class DimerState {
 public:
  DimerState(int n, std::vector<std::pair<int, int>> pairing,
             std::vector<Eigen::Matrix4cd> pair_states)
      : n_(n), pairing_(std::move(pairing)), pair_states_(std::move(pair_states)) {
    if (n < 2 || n % 2 != 0)
      throw invalid_argument("dimer state requires even n >= 2");
    if (pairing_.size() != static_cast<std::size_t>(n) / 2)
      throw invalid_argument("pairing must contain n/2 pairs");
    if (pair_states_.size() != pairing_.size())
      throw invalid_argument("need one 2-qubit density matrix per pair");
    std::vector<char> hit(static_cast<std::size_t>(n), 0);
    for (auto [a, b] : pairing_) {
      if (a < 0 || a >= n || b < 0 || b >= n || a == b)
        throw invalid_argument("pairing entry out of range");
      if (hit[static_cast<std::size_t>(a)] || hit[static_cast<std::size_t>(b)])
        throw invalid_argument("pairing must cover every qubit exactly once");
      hit[static_cast<std::size_t>(a)] = hit[static_cast<std::size_t>(b)] = 1;
    }
    for (const Eigen::Matrix4cd& rho : pair_states_) validate_pair_state(rho);
    // pair_of_[q] = (pair index << 1) | slot, slot 0 = first member.
    pair_of_.assign(static_cast<std::size_t>(n), -1);
    for (std::size_t p = 0; p < pairing_.size(); ++p) {
      pair_of_[static_cast<std::size_t>(pairing_[p].first)] =
          static_cast<int>(p << 1);
      pair_of_[static_cast<std::size_t>(pairing_[p].second)] =
          static_cast<int>((p << 1) | 1);
    }
  }

  DimerState(int n, std::vector<std::pair<int, int>> pairing,
             const Eigen::Matrix4cd& shared_state)
      : DimerState(n, std::move(pairing),
                   std::vector<Eigen::Matrix4cd>(static_cast<std::size_t>(n) / 2,
                                                 shared_state)) {}

  int n() const { return n_; }
  const std::vector<std::pair<int, int>>& pairing() const { return pairing_; }
  const Eigen::Matrix4cd& pair_state(std::size_t pair) const {
    return pair_states_[pair];
  }
  /// Pair index and slot (0 = first member) of a qubit.
  std::pair<int, int> locate(int qubit) const {
    const int code = pair_of_[static_cast<std::size_t>(qubit)];
    return {code >> 1, code & 1};
  }

  static void validate_pair_state(const Eigen::Matrix4cd& rho) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
      throw invalid_argument("pair state is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-10 ||
        std::abs(rho.trace().imag()) > 1e-10)
      throw invalid_argument("pair state does not have unit trace");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw invalid_argument("pair state is not positive semidefinite");
  }

 private:
  int n_;
  std::vector<std::pair<int, int>> pairing_;
  std::vector<Eigen::Matrix4cd> pair_states_;
  std::vector<int> pair_of_;
};

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

/// |0...0>.
inline PureState zero_state(int n) {
  std::vector<Complex> amps(std::size_t{1} << n, Complex(0, 0));
  amps[0] = Complex(1, 0);
  return PureState(n, std::move(amps));
}

/// (|0...0> + |1...1>) / sqrt(2).
inline PureState ghz_state(int n) {
  if (n < 1) throw invalid_argument("ghz_state needs n >= 1");
  if (n > kDenseQubitGuard)
    throw resource_limit("ghz_state exceeds the dense guard");
  std::vector<Complex> amps(std::size_t{1} << n, Complex(0, 0));
  const double s = 1.0 / std::sqrt(2.0);
  amps.front() = Complex(s, 0);
  amps.back() = Complex(s, 0);
  return PureState(n, std::move(amps));
}

/// Haar-like random state: i.i.d. complex Gaussian amplitudes, normalized.
/// Deterministic per seed (amplitudes drawn index-major, real then imag).
inline PureState random_state(int n, std::uint64_t seed) {
  if (n < 1) throw invalid_argument("random_state needs n >= 1");
  if (n > kDenseQubitGuard)
    throw resource_limit("random_state exceeds the dense guard");
  Rng rng(seed);
  std::vector<Complex> amps(std::size_t{1} << n);
  for (Complex& a : amps) {
    const double re = rng.normal();
    const double im = rng.normal();
    a = Complex(re, im);
  }
  return PureState::normalized(n, std::move(amps));
}

/// |phi+><phi+| with |phi+> = (|00> + |11>)/sqrt(2).
inline Eigen::Matrix4cd bell_pair_state() {
  Eigen::Vector4cd phi = Eigen::Vector4cd::Zero();
  phi(0) = Complex(1, 0);
  phi(3) = Complex(1, 0);
  phi /= std::sqrt(2.0);
  return phi * phi.adjoint();
}

/// I/4.
inline Eigen::Matrix4cd maximally_mixed_pair() {
  return Eigen::Matrix4cd::Identity() * 0.25;
}

/// Dimer state pairing (0,1), (2,3), ... with one shared pair state.
inline DimerState dimer_chain(int n, const Eigen::Matrix4cd& pair_state) {
  if (n < 2 || n % 2 != 0)
    throw invalid_argument("dimer_chain requires even n >= 2");
  std::vector<std::pair<int, int>> pairing;
  pairing.reserve(static_cast<std::size_t>(n) / 2);
  for (int q = 0; q < n; q += 2) pairing.emplace_back(q, q + 1);
  return DimerState(n, std::move(pairing), pair_state);
}

// ---------------------------------------------------------------------------
// Counts
// ---------------------------------------------------------------------------

/// Tally of observed outcome strings per setting. Outcome strings are n
/// characters of '0'/'1' in qubit order; bit 0 means the +1 eigenvalue,
/// bit 1 the -1 eigenvalue, in every basis.
class CountsTable {
 public:
  explicit CountsTable(int n) : n_(n) {
    if (n < 1) throw invalid_argument("counts table needs n >= 1");
  }

  int n() const { return n_; }

  void add(int setting_id, const std::string& outcome, std::uint64_t count = 1) {
    if (setting_id < 0) throw invalid_argument("setting id must be >= 0");
    if (static_cast<int>(outcome.size()) != n_)
      throw invalid_argument("outcome string length must equal n");
    for (char c : outcome)
      if (c != '0' && c != '1')
        throw invalid_argument("outcome strings are over characters 0|1");
    counts_[setting_id][outcome] += count;
  }

  bool has_setting(int setting_id) const {
    return counts_.find(setting_id) != counts_.end();
  }

  /// Tallies for one setting, ordered by outcome string. Throws
  /// missing_data naming the setting when absent.
  const std::map<std::string, std::uint64_t>& for_setting(int setting_id) const {
    const auto it = counts_.find(setting_id);
    if (it == counts_.end())
      throw missing_data("no counts recorded for setting " +
                         std::to_string(setting_id));
    return it->second;
  }

  std::uint64_t total_shots(int setting_id) const {
    std::uint64_t total = 0;
    for (const auto& [outcome, count] : for_setting(setting_id))
      total += count;
    return total;
  }

  std::vector<int> setting_ids() const {
    std::vector<int> ids;
    ids.reserve(counts_.size());
    for (const auto& [id, tallies] : counts_) ids.push_back(id);
    return ids;
  }

  const std::map<int, std::map<std::string, std::uint64_t>>& data() const {
    return counts_;
  }

 private:
  int n_;
  std::map<int, std::map<std::string, std::uint64_t>> counts_;
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

struct SampleOptions {
  /// Symmetric per-qubit readout bit-flip probability; 0 disables the
  /// faulty-measurement model (and consumes no extra random numbers).
  double bit_flip_prob = 0.0;
  int workers = 1;
};

namespace detail {

/// Applies a single-qubit 2x2 matrix to `amps` on the given qubit.
inline void apply_single_qubit(std::vector<Complex>& amps, int n, int qubit,
                               const std::array<std::array<Complex, 2>, 2>& u) {
  const int bitpos = n - 1 - qubit;  // qubit 0 is the most significant bit
  const std::size_t stride = std::size_t{1} << bitpos;
  const std::size_t size = amps.size();
  for (std::size_t base = 0; base < size; base += 2 * stride) {
    for (std::size_t low = 0; low < stride; ++low) {
      const std::size_t i0 = base + low;
      const std::size_t i1 = i0 + stride;
      const Complex a0 = amps[i0];
      const Complex a1 = amps[i1];
      amps[i0] = u[0][0] * a0 + u[0][1] * a1;
      amps[i1] = u[1][0] * a0 + u[1][1] * a1;
    }
  }
}

inline std::vector<Complex> rotated_amplitudes(const PureState& state,
                                               const BasisSetting& setting) {
  std::vector<Complex> amps = state.amplitudes();
  for (int qubit = 0; qubit < state.n(); ++qubit) {
    const Basis b = setting.at(qubit);
    if (b != Basis::Z)
      apply_single_qubit(amps, state.n(), qubit, basis_rotation(b));
  }
  return amps;
}

/// Draws an index from a cumulative distribution via binary search.
inline std::size_t draw_index(const std::vector<double>& cumulative, double u) {
  const double target = u * cumulative.back();
  const auto it =
      std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return std::min<std::size_t>(
      static_cast<std::size_t>(it - cumulative.begin()),
      cumulative.size() - 1);
}

inline void flip_bits(std::string& outcome, double prob, Rng& rng) {
  for (char& c : outcome)
    if (rng.uniform() < prob) c = (c == '0') ? '1' : '0';
}

/// Born distribution of one pair under single-qubit rotations (ua, ub):
/// diag((ua (x) ub) rho (ua (x) ub)^dagger), as a cumulative vector over
/// outcomes 00, 01, 10, 11 (first member's bit first).
inline std::vector<double> pair_cumulative(
    const Eigen::Matrix4cd& rho,
    const std::array<std::array<Complex, 2>, 2>& ua,
    const std::array<std::array<Complex, 2>, 2>& ub) {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  for (int ra = 0; ra < 2; ++ra)
    for (int rb = 0; rb < 2; ++rb)
      for (int ca = 0; ca < 2; ++ca)
        for (int cb = 0; cb < 2; ++cb)
          u(2 * ra + rb, 2 * ca + cb) =
              ua[static_cast<std::size_t>(ra)][static_cast<std::size_t>(ca)] *
              ub[static_cast<std::size_t>(rb)][static_cast<std::size_t>(cb)];
  const Eigen::Matrix4cd rotated = u * rho * u.adjoint();
  std::vector<double> cumulative(4);
  double acc = 0;
  for (int j = 0; j < 4; ++j) {
    acc += std::max(0.0, rotated(j, j).real());
    cumulative[static_cast<std::size_t>(j)] = acc;
  }
  return cumulative;
}

}  // namespace detail

/// Samples `plan.shots` outcome strings per setting from the Born
/// distribution of measuring each qubit in the setting's basis.
///
/// Reproducibility contract: setting s uses an independent generator
/// mt19937_64(stream_seed(seed, s)); shots are drawn in order, one uniform
/// deviate per shot, plus (only when bit_flip_prob > 0) n more per shot for
/// the flip decisions in qubit order. Results are therefore identical for
/// any worker count and any subset of settings sampled.
inline CountsTable sample(const PureState& state, const MeasurementPlan& plan,
                          std::uint64_t seed, SampleOptions options = {}) {
  if (state.n() != plan.n)
    throw invalid_argument("state and plan disagree on qubit count");
  const int n = plan.n;
  std::vector<std::map<std::string, std::uint64_t>> per_setting(
      static_cast<std::size_t>(plan.size()));

  parallel_for(
      static_cast<std::size_t>(plan.size()), options.workers,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
          const BasisSetting& setting =
              plan.settings[s].setting;
          const std::vector<Complex> amps =
              detail::rotated_amplitudes(state, setting);
          std::vector<double> cumulative(amps.size());
          double acc = 0;
          for (std::size_t x = 0; x < amps.size(); ++x) {
            acc += std::norm(amps[x]);
            cumulative[x] = acc;
          }
          Rng rng(stream_seed(seed, s));
          for (std::uint64_t shot = 0; shot < plan.shots; ++shot) {
            const std::size_t x = detail::draw_index(cumulative, rng.uniform());
            std::string outcome(static_cast<std::size_t>(n), '0');
            for (int qubit = 0; qubit < n; ++qubit)
              if ((x >> (n - 1 - qubit)) & 1)
                outcome[static_cast<std::size_t>(qubit)] = '1';
            if (options.bit_flip_prob > 0)
              detail::flip_bits(outcome, options.bit_flip_prob, rng);
            ++per_setting[s][outcome];
          }
        }
      });

  CountsTable counts(n);
  for (int s = 0; s < plan.size(); ++s)
    for (const auto& [outcome, count] : per_setting[static_cast<std::size_t>(s)])
      counts.add(s, outcome, count);
  return counts;
}

/// DimerState sampling factorizes over pairs: per shot, each pair's two
/// bits are drawn from the rotated pair state's 4-outcome distribution,
/// pairs visited in pairing order. Same stream discipline as the dense
/// overload (one uniform per pair per shot).
inline CountsTable sample(const DimerState& state, const MeasurementPlan& plan,
                          std::uint64_t seed, SampleOptions options = {}) {
  if (state.n() != plan.n)
    throw invalid_argument("state and plan disagree on qubit count");
  const int n = plan.n;
  const auto& pairing = state.pairing();
  std::vector<std::map<std::string, std::uint64_t>> per_setting(
      static_cast<std::size_t>(plan.size()));

  parallel_for(
      static_cast<std::size_t>(plan.size()), options.workers,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
          const BasisSetting& setting = plan.settings[s].setting;
          std::vector<std::vector<double>> cumulative;
          cumulative.reserve(pairing.size());
          for (std::size_t p = 0; p < pairing.size(); ++p) {
            const auto [a, b] = pairing[p];
            cumulative.push_back(detail::pair_cumulative(
                state.pair_state(p), basis_rotation(setting.at(a)),
                basis_rotation(setting.at(b))));
          }
          Rng rng(stream_seed(seed, s));
          for (std::uint64_t shot = 0; shot < plan.shots; ++shot) {
            std::string outcome(static_cast<std::size_t>(n), '0');
            for (std::size_t p = 0; p < pairing.size(); ++p) {
              const std::size_t x =
                  detail::draw_index(cumulative[p], rng.uniform());
              const auto [a, b] = pairing[p];
              if (x & 2) outcome[static_cast<std::size_t>(a)] = '1';
              if (x & 1) outcome[static_cast<std::size_t>(b)] = '1';
            }
            if (options.bit_flip_prob > 0)
              detail::flip_bits(outcome, options.bit_flip_prob, rng);
            ++per_setting[s][outcome];
          }
        }
      });

  CountsTable counts(n);
  for (int s = 0; s < plan.size(); ++s)
    for (const auto& [outcome, count] : per_setting[static_cast<std::size_t>(s)])
      counts.add(s, outcome, count);
  return counts;
}

/// Exact outcome distribution of one setting on a dense state (index bit
/// layout as in PureState). Test and diagnostics helper.
inline std::vector<double> outcome_distribution(const PureState& state,
                                                const BasisSetting& setting) {
  if (setting.n() != state.n())
    throw invalid_argument("setting and state disagree on qubit count");
  const std::vector<Complex> amps = detail::rotated_amplitudes(state, setting);
  std::vector<double> probs(amps.size());
  for (std::size_t x = 0; x < amps.size(); ++x) probs[x] = std::norm(amps[x]);
  return probs;
}

// ---------------------------------------------------------------------------
// Exact oracles
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_subset(int n, std::span<const int> qubits) {
  if (qubits.empty()) throw invalid_argument("subset must be nonempty");
  for (int q : qubits)
    if (q < 0 || q >= n) throw invalid_argument("subset index out of range");
  for (std::size_t i = 0; i < qubits.size(); ++i)
    for (std::size_t j = i + 1; j < qubits.size(); ++j)
      if (qubits[i] == qubits[j])
        throw invalid_argument("subset entries must be distinct");
}

inline void apply_pauli(std::vector<Complex>& amps, int n, int qubit, Pauli p) {
  const int bitpos = n - 1 - qubit;
  const std::size_t stride = std::size_t{1} << bitpos;
  const std::size_t size = amps.size();
  switch (p) {
    case Pauli::I:
      return;
    case Pauli::X:
      for (std::size_t base = 0; base < size; base += 2 * stride)
        for (std::size_t low = 0; low < stride; ++low)
          std::swap(amps[base + low], amps[base + low + stride]);
      return;
    case Pauli::Y:
      for (std::size_t base = 0; base < size; base += 2 * stride)
        for (std::size_t low = 0; low < stride; ++low) {
          const Complex a0 = amps[base + low];
          const Complex a1 = amps[base + low + stride];
          amps[base + low] = Complex(0, -1) * a1;
          amps[base + low + stride] = Complex(0, 1) * a0;
        }
      return;
    case Pauli::Z:
      for (std::size_t base = 0; base < size; base += 2 * stride)
        for (std::size_t low = 0; low < stride; ++low)
          amps[base + low + stride] = -amps[base + low + stride];
      return;
  }
}

/// tr(rho_pair (sigma_a (x) sigma_b)) for one stored pair.
inline double pair_pauli_expectation(const Eigen::Matrix4cd& rho, Pauli a,
                                     Pauli b) {
  const auto& sa = sigma(a);
  const auto& sb = sigma(b);
  Complex total(0, 0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const Complex op = sa[static_cast<std::size_t>(r >> 1)]
                           [static_cast<std::size_t>(c >> 1)] *
                         sb[static_cast<std::size_t>(r & 1)]
                           [static_cast<std::size_t>(c & 1)];
      if (op != Complex(0, 0)) total += op * rho(c, r);  // tr(P rho)
    }
  return total.real();
}

}  // namespace detail

/// tr( (sigma^{p_1} (x) ... on `qubits`, identity elsewhere) rho ), exact.
/// The all-identity label is rejected: its coefficient is fixed at 1.
inline double exact_expectation(const PureState& state,
                                std::span<const int> qubits,
                                std::span<const Pauli> paulis) {
  detail::validate_subset(state.n(), qubits);
  if (paulis.size() != qubits.size())
    throw invalid_argument("one Pauli per subset qubit required");
  bool nontrivial = false;
  for (Pauli p : paulis)
    if (p != Pauli::I) nontrivial = true;
  if (!nontrivial)
    throw invalid_argument(
        "all-identity label is fixed at 1 and is never measured");

  std::vector<Complex> transformed = state.amplitudes();
  for (std::size_t j = 0; j < qubits.size(); ++j)
    detail::apply_pauli(transformed, state.n(), qubits[j], paulis[j]);
  Complex inner(0, 0);
  const std::vector<Complex>& amps = state.amplitudes();
  for (std::size_t x = 0; x < amps.size(); ++x)
    inner += std::conj(amps[x]) * transformed[x];
  return inner.real();
}

inline double exact_expectation(const DimerState& state,
                                std::span<const int> qubits,
                                std::span<const Pauli> paulis) {
  detail::validate_subset(state.n(), qubits);
  if (paulis.size() != qubits.size())
    throw invalid_argument("one Pauli per subset qubit required");
  bool nontrivial = false;
  for (Pauli p : paulis)
    if (p != Pauli::I) nontrivial = true;
  if (!nontrivial)
    throw invalid_argument(
        "all-identity label is fixed at 1 and is never measured");

  // Group the subset's Paulis by the pair containing each qubit; the
  // expectation is the product of per-pair traces.
  std::map<int, std::array<Pauli, 2>> by_pair;
  for (std::size_t j = 0; j < qubits.size(); ++j) {
    const auto [pair, slot] = state.locate(qubits[j]);
    auto [it, inserted] =
        by_pair.try_emplace(pair, std::array<Pauli, 2>{Pauli::I, Pauli::I});
    it->second[static_cast<std::size_t>(slot)] = paulis[j];
  }
  double result = 1.0;
  for (const auto& [pair, ops] : by_pair)
    result *= detail::pair_pauli_expectation(state.pair_state(static_cast<std::size_t>(pair)),
                                             ops[0], ops[1]);
  return result;
}

/// Reduced density matrix of an ordered subset: partial trace over the
/// complement. The first listed qubit is the most significant bit of the
/// 2^k-dimensional result index. k <= 6 on the dense backend.
inline Eigen::MatrixXcd exact_rdm(const PureState& state,
                                  std::span<const int> qubits) {
  detail::validate_subset(state.n(), qubits);
  const int k = static_cast<int>(qubits.size());
  if (k > 6)
    throw resource_limit("exact_rdm supports subsets of at most 6 qubits");
  const int n = state.n();

  std::vector<int> keep_bitpos(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j)
    keep_bitpos[static_cast<std::size_t>(j)] = n - 1 - qubits[static_cast<std::size_t>(j)];
  std::vector<int> env_bitpos;
  for (int q = 0; q < n; ++q) {
    bool kept = false;
    for (int j = 0; j < k; ++j)
      if (qubits[static_cast<std::size_t>(j)] == q) kept = true;
    if (!kept) env_bitpos.push_back(n - 1 - q);
  }

  const std::size_t dim = std::size_t{1} << k;
  const std::size_t env_dim = std::size_t{1} << (n - k);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(dim));
  const std::vector<Complex>& amps = state.amplitudes();

  std::vector<std::size_t> scattered(dim);
  for (std::size_t a = 0; a < dim; ++a) {
    std::size_t bits = 0;
    for (int j = 0; j < k; ++j)
      if ((a >> (k - 1 - j)) & 1)
        bits |= std::size_t{1} << keep_bitpos[static_cast<std::size_t>(j)];
    scattered[a] = bits;
  }

  for (std::size_t e = 0; e < env_dim; ++e) {
    std::size_t env_bits = 0;
    for (std::size_t j = 0; j < env_bitpos.size(); ++j)
      if ((e >> j) & 1)
        env_bits |= std::size_t{1} << env_bitpos[j];
    for (std::size_t a = 0; a < dim; ++a) {
      const Complex va = amps[scattered[a] | env_bits];
      if (va == Complex(0, 0)) continue;
      for (std::size_t b = 0; b < dim; ++b)
        rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
            va * std::conj(amps[scattered[b] | env_bits]);
    }
  }
  return rho;
}

inline Eigen::MatrixXcd exact_rdm(const DimerState& state,
                                  std::span<const int> qubits) {
  detail::validate_subset(state.n(), qubits);
  const int k = static_cast<int>(qubits.size());
  if (k > 6)
    throw resource_limit("exact_rdm supports subsets of at most 6 qubits");

  // Factor per pair: the full pair state when both members are in the
  // subset, the single-qubit marginal otherwise.
  struct Group {
    Eigen::MatrixXcd factor;        // 2x2 or 4x4
    std::array<int, 2> slots;       // subset positions; slots[1] = -1 if 2x2
  };
  std::map<int, std::vector<std::pair<int, int>>> members;  // pair -> (slot_in_pair, subset_pos)
  for (int j = 0; j < k; ++j) {
    const auto [pair, slot] = state.locate(qubits[static_cast<std::size_t>(j)]);
    members[pair].emplace_back(slot, j);
  }
  std::vector<Group> groups;
  for (const auto& [pair, list] : members) {
    const Eigen::Matrix4cd& rho = state.pair_state(static_cast<std::size_t>(pair));
    if (list.size() == 2) {
      // Both members present; orient the factor as (first listed, second
      // listed) regardless of stored slot order.
      const auto [slot_a, pos_a] = list[0];
      const auto [slot_b, pos_b] = list[1];
      Eigen::Matrix4cd factor;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
          // Row/col bit for the stored slot s is extracted from the stored
          // layout (slot 0 = high bit); rebuild in (pos_a, pos_b) order.
          const int ra = (r >> 1) & 1, rb = r & 1;
          const int ca = (c >> 1) & 1, cb = c & 1;
          int stored_r[2], stored_c[2];
          stored_r[slot_a] = ra; stored_r[slot_b] = rb;
          stored_c[slot_a] = ca; stored_c[slot_b] = cb;
          factor(r, c) = rho(2 * stored_r[0] + stored_r[1],
                             2 * stored_c[0] + stored_c[1]);
        }
      groups.push_back({factor, {pos_a, pos_b}});
    } else {
      const auto [slot, pos] = list[0];
      Eigen::Matrix2cd marginal = Eigen::Matrix2cd::Zero();
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
          for (int other = 0; other < 2; ++other) {
            const int row = slot == 0 ? 2 * r + other : 2 * other + r;
            const int col = slot == 0 ? 2 * c + other : 2 * other + c;
            marginal(r, c) += rho(row, col);
          }
      groups.push_back({marginal, {pos, -1}});
    }
  }

  const std::size_t dim = std::size_t{1} << k;
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) {
      Complex value(1, 0);
      for (const Group& g : groups) {
        const int bit_a0 = static_cast<int>((a >> (k - 1 - g.slots[0])) & 1);
        const int bit_b0 = static_cast<int>((b >> (k - 1 - g.slots[0])) & 1);
        if (g.slots[1] < 0) {
          value *= g.factor(bit_a0, bit_b0);
        } else {
          const int bit_a1 = static_cast<int>((a >> (k - 1 - g.slots[1])) & 1);
          const int bit_b1 = static_cast<int>((b >> (k - 1 - g.slots[1])) & 1);
          value *= g.factor(2 * bit_a0 + bit_a1, 2 * bit_b0 + bit_b1);
        }
        if (value == Complex(0, 0)) break;
      }
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = value;
    }
  return out;
}

}  // namespace qot
