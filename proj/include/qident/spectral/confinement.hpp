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

#include "qident/core/error.hpp"

namespace qident {

/// Leakage bounds from the 0th and 1st order heights of a p0(t) spectrum.
struct ConfinementBounds {
  double lower = 0.0;
  double upper = 0.0;
  double sum = 0.0;
  /// h0 + 2 h1 exceeded 1, which only noise can produce; bounds are zero.
  bool noise_artifact = false;
};

inline ConfinementBounds confinement_bounds(double h0, double h1) {
  ConfinementBounds b;
  b.sum = h0 + 2.0 * h1;
  if (!std::isfinite(b.sum)) throw ContractError("spectral heights must be finite");
  if (b.sum <= 0.5) {
    throw ProtocolError(ProtocolErrorCode::kUndefinedBound, "h0 + 2 h1 <= 1/2: upper leakage bound is undefined");
  }
  if (b.sum > 1.0) {
    b.noise_artifact = true;
    return b;
  }
  b.lower = std::clamp(1.0 - std::sqrt(b.sum), 0.0, 1.0);
  b.upper = std::clamp(0.5 * (1.0 - std::sqrt(2.0 * b.sum - 1.0)), 0.0, 1.0);
  return b;
}

}  // namespace qident
