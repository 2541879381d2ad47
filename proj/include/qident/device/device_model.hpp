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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qident/core/error.hpp"
#include "qident/core/operators.hpp"
#include "qident/device/measurement.hpp"

namespace qident {

/// Everything the simulator knows about a device. Protocols never see it.
struct DeviceModel {
  ControlledHamiltonian hamiltonians;
  LindbladDissipator dissipator;
  HermitianOperator observable;
  /// State before the first (initializing) measurement of every experiment.
  DensityMatrix pre_measurement_state;

  DeviceModel(ControlledHamiltonian h, LindbladDissipator d, HermitianOperator a,
              std::optional<DensityMatrix> pre = std::nullopt)
      : hamiltonians(std::move(h)),
        dissipator(std::move(d)),
        observable(std::move(a)),
        pre_measurement_state(pre ? std::move(*pre) : DensityMatrix::maximally_mixed(hamiltonians.dim())) {
    const Eigen::Index n = hamiltonians.dim();
    if (observable.dim() != n) throw ContractError("observable dimension differs from the Hamiltonian dimension");
    if (!dissipator.terms().empty() && dissipator.dim() != n) {
      throw ContractError("dissipator dimension differs from the Hamiltonian dimension");
    }
    if (pre_measurement_state.dim() != n) throw ContractError("pre-measurement state has the wrong dimension");
  }
};

/// Timed evolution under a control setting, applied between the
/// initializing measurement and the main evolution.
struct PrepareStep {
  ControlSetting setting;
  double duration = 0.0;
};

struct ShotPlan {
  ControlSetting setting;
  double evolve_time = 0.0;
  std::uint64_t shots = 1;
  std::uint64_t seed = 0;
  std::optional<PrepareStep> prepare;

  void validate() const {
    if (shots < 1) throw ContractError("a shot plan needs at least one shot");
    if (!(evolve_time >= 0.0) || !std::isfinite(evolve_time)) throw ContractError("evolution time must be >= 0");
    if (prepare && (!(prepare->duration >= 0.0) || !std::isfinite(prepare->duration))) {
      throw ContractError("prepare duration must be >= 0");
    }
  }
};

/// N_{a,b}: experiments with first outcome a and second outcome b.
struct CountsTable {
  std::vector<double> values;
  /// Row-major n x n tally.
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  /// Index of the lumped "outside the subspace" outcome, if any.
  std::optional<std::size_t> complement;

  CountsTable() = default;
  explicit CountsTable(std::vector<double> outcome_values, std::optional<std::size_t> complement_index = std::nullopt)
      : values(std::move(outcome_values)), counts(values.size() * values.size(), 0), complement(complement_index) {}

  std::size_t outcomes() const { return values.size(); }
  std::uint64_t at(std::size_t a, std::size_t b) const { return counts.at(a * outcomes() + b); }
  void add(std::size_t a, std::size_t b, std::uint64_t n = 1) {
    counts.at(a * outcomes() + b) += n;
    total += n;
  }
  std::uint64_t row_sum(std::size_t a) const {
    std::uint64_t s = 0;
    for (std::size_t b = 0; b < outcomes(); ++b) s += at(a, b);
    return s;
  }
  std::uint64_t col_sum(std::size_t b) const {
    std::uint64_t s = 0;
    for (std::size_t a = 0; a < outcomes(); ++a) s += at(a, b);
    return s;
  }

  /// Equal tallies over the same outcome set (NaN complement values compare equal).
  friend bool operator==(const CountsTable& x, const CountsTable& y) {
    if (x.counts != y.counts || x.total != y.total || x.complement != y.complement) return false;
    if (x.values.size() != y.values.size()) return false;
    for (std::size_t k = 0; k < x.values.size(); ++k) {
      if (!(x.values[k] == y.values[k]) && !(std::isnan(x.values[k]) && std::isnan(y.values[k]))) return false;
    }
    return true;
  }
};

}  // namespace qident
