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

#include <stdexcept>
#include <string>

namespace qot {

/// Raised for malformed inputs (bad sizes, out-of-range indices, invalid
/// parameter combinations). Maps to process exit code 2.
class invalid_argument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
  static constexpr int exit_code = 2;
};

/// Raised when a computation needs data (a setting, a counts record) that is
/// absent from its inputs. Maps to process exit code 3.
class missing_data : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  static constexpr int exit_code = 3;
};

/// Raised when an operation would exceed a hard resource guard (dense state
/// size, exhaustive enumeration size). Maps to process exit code 4.
class resource_limit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  static constexpr int exit_code = 4;
};

}  // namespace qot
