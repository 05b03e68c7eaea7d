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
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "qot/errors.hpp"

namespace qot {

using Complex = std::complex<double>;

/// Single-qubit measurement basis. The character value doubles as the
/// on-disk representation (plan files use lowercase x|y|z).
enum class Basis : char { X = 'x', Y = 'y', Z = 'z' };

inline constexpr std::array<Basis, 3> kAllBases = {Basis::X, Basis::Y,
                                                   Basis::Z};

inline char to_char(Basis b) { return static_cast<char>(b); }

inline Basis basis_from_char(char c) {
  switch (c) {
    case 'x': case 'X': return Basis::X;
    case 'y': case 'Y': return Basis::Y;
    case 'z': case 'Z': return Basis::Z;
    default:
      throw invalid_argument(std::string("invalid basis character '") + c +
                             "' (expected x, y or z)");
  }
}

/// Pauli operator label. Uppercase characters are the on-disk form used in
/// coefficient maps ("IX", "XY", ...).
enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char to_char(Pauli p) {
  constexpr std::array<char, 4> c = {'I', 'X', 'Y', 'Z'};
  return c[static_cast<std::size_t>(p)];
}

inline Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': case 'i': return Pauli::I;
    case 'X': case 'x': return Pauli::X;
    case 'Y': case 'y': return Pauli::Y;
    case 'Z': case 'z': return Pauli::Z;
    default:
      throw invalid_argument(std::string("invalid Pauli character '") + c +
                             "'");
  }
}

/// The basis in which a non-identity Pauli is measured.
inline Basis basis_of(Pauli p) {
  switch (p) {
    case Pauli::X: return Basis::X;
    case Pauli::Y: return Basis::Y;
    case Pauli::Z: return Basis::Z;
    default:
      throw invalid_argument("identity factor has no measurement basis");
  }
}

inline std::string pauli_label(const std::vector<Pauli>& paulis) {
  std::string s;
  s.reserve(paulis.size());
  for (Pauli p : paulis) s.push_back(to_char(p));
  return s;
}

inline std::vector<Pauli> parse_pauli_label(const std::string& label) {
  std::vector<Pauli> out;
  out.reserve(label.size());
  for (char c : label) out.push_back(pauli_from_char(c));
  return out;
}

/// All 4^k Pauli labels of length k in lexicographic order with I < X < Y < Z
/// (the all-identity label comes first).
inline std::vector<std::string> all_pauli_labels(int k) {
  std::vector<std::string> labels;
  const std::size_t total = std::size_t{1} << (2 * k);
  labels.reserve(total);
  std::string cur(k, 'I');
  constexpr std::array<char, 4> alphabet = {'I', 'X', 'Y', 'Z'};
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (int j = k - 1; j >= 0; --j) {
      cur[static_cast<std::size_t>(j)] = alphabet[c & 3];
      c >>= 2;
    }
    labels.push_back(cur);
  }
  return labels;
}

/// Entries of the 2x2 Pauli matrices, row-major.
inline const std::array<std::array<Complex, 2>, 2>& sigma(Pauli p) {
  using A = std::array<std::array<Complex, 2>, 2>;
  static const A id = {{{Complex(1, 0), Complex(0, 0)},
                        {Complex(0, 0), Complex(1, 0)}}};
  static const A sx = {{{Complex(0, 0), Complex(1, 0)},
                        {Complex(1, 0), Complex(0, 0)}}};
  static const A sy = {{{Complex(0, 0), Complex(0, -1)},
                        {Complex(0, 1), Complex(0, 0)}}};
  static const A sz = {{{Complex(1, 0), Complex(0, 0)},
                        {Complex(0, 0), Complex(-1, 0)}}};
  switch (p) {
    case Pauli::I: return id;
    case Pauli::X: return sx;
    case Pauli::Y: return sy;
    default: return sz;
  }
}

/// Single-qubit rotation applied before a computational-basis readout to
/// realize a measurement in the given basis:
///   x-basis: H,  y-basis: H * S^dagger,  z-basis: identity.
/// With the global outcome convention bit 0 -> +1, bit 1 -> -1, measuring
/// |0> in the z basis yields +1 and |+i> in the y basis yields +1.
inline const std::array<std::array<Complex, 2>, 2>& basis_rotation(Basis b) {
  using A = std::array<std::array<Complex, 2>, 2>;
  static const double s = 1.0 / std::sqrt(2.0);
  static const A hx = {{{Complex(s, 0), Complex(s, 0)},
                        {Complex(s, 0), Complex(-s, 0)}}};
  // H * S^dagger; S^dagger maps |1> -> -i|1>.
  static const A hy = {{{Complex(s, 0), Complex(0, -s)},
                        {Complex(s, 0), Complex(0, s)}}};
  static const A id = {{{Complex(1, 0), Complex(0, 0)},
                        {Complex(0, 0), Complex(1, 0)}}};
  switch (b) {
    case Basis::X: return hx;
    case Basis::Y: return hy;
    default: return id;
  }
}

}  // namespace qot
