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
#include <cstddef>
#include <thread>
#include <vector>

namespace qot {

inline int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs fn(begin, end) over contiguous chunks of [0, total). Each index is
/// owned by exactly one chunk, so writes keyed by index are race-free and the
/// result is independent of the worker count.
template <typename Fn>
void parallel_for(std::size_t total, int workers, Fn&& fn) {
  if (total == 0) return;
  const std::size_t nw =
      std::min<std::size_t>(std::max(workers, 1), total);
  if (nw <= 1) {
    fn(std::size_t{0}, total);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(nw);
  const std::size_t chunk = (total + nw - 1) / nw;
  for (std::size_t w = 0; w < nw; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(total, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace qot
