// Copyright 2026 The qident Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

#include "qident/core/error.hpp"

namespace qident {

/// Execution knobs shared by the protocol drivers. None of them changes a
/// result.
struct RunOptions {
  unsigned threads = 1;
};

/// Calls fn(i) for i in [0, n) on up to `threads` threads with a static
/// partition. If any call throws, the exception of the smallest failing
/// index is rethrown after all threads finish.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0, n);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, n * w / workers, n * (w + 1) / workers);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Evolution times t_k = t0 + k dt for k = 0..K.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.01;
  std::size_t K = 2000;

  void validate() const {
    if (!(t0 >= 0.0) || !std::isfinite(t0)) throw ContractError("time grid must start at t0 >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("time step must be positive");
    if (K + 1 < 8) throw ContractError("time grid needs at least 8 points");
  }
  std::size_t size() const { return K + 1; }
  double at(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  std::vector<double> times() const {
    std::vector<double> t(size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = at(k);
    return t;
  }
};

}  // namespace qident
