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

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qident/core/error.hpp"
#include "qident/core/operators.hpp"
#include "qident/device/rng.hpp"
#include "qident/device/simulator.hpp"
#include "qident/protocols/parallel.hpp"
#include "qident/spectral/confinement.hpp"
#include "qident/spectral/spectrum.hpp"

namespace qident {

struct LeakageReport {
  std::vector<double> times;
  std::vector<double> p_leak;
  /// Experiments whose first outcome was inside the subspace.
  std::vector<std::uint64_t> conditioned;
  std::uint64_t total_shots = 0;
  double mean_p_leak = 0.0;
  /// Exact leakage curve, when an oracle was attached.
  std::optional<std::vector<double>> exact;
  std::optional<double> exact_mean;
};

/// Leakage estimate from one three-outcome counts table: experiments that
/// started inside the subspace and were found outside, over all that
/// started inside.
inline std::pair<double, std::uint64_t> leakage_from_counts(const CountsTable& counts) {
  if (!counts.complement) {
    if (counts.total == 0) throw ProtocolError(ProtocolErrorCode::kNoConditionedShots, "empty counts table");
    return {0.0, counts.total};
  }
  const std::size_t out = *counts.complement;
  std::uint64_t leaked = 0;
  for (std::size_t n = 0; n < counts.outcomes(); ++n) {
    if (n != out) leaked += counts.at(n, out);
  }
  const std::uint64_t denom = counts.total - counts.row_sum(out);
  if (denom == 0) {
    throw ProtocolError(ProtocolErrorCode::kNoConditionedShots, "every experiment started outside the subspace");
  }
  return {static_cast<double>(leaked) / static_cast<double>(denom), denom};
}

/// Direct leakage estimation on a time grid; point k uses seed
/// derive_seed(seed, k).
template <ExperimentBackend B>
LeakageReport estimate_leakage_direct(const B& device, const HermitianOperator& projector, const ControlSetting& setting,
                                      const TimeGrid& grid, std::uint64_t shots, std::uint64_t seed,
                                      const RunOptions& options = {}) {
  grid.validate();
  LeakageReport r;
  r.times = grid.times();
  r.p_leak.resize(grid.size());
  r.conditioned.resize(grid.size());
  parallel_for(grid.size(), options.threads, [&](std::size_t k) {
    const ShotPlan plan{setting, grid.at(k), shots, derive_seed(seed, k), std::nullopt};
    const auto [p, n] = leakage_from_counts(device.run_three_outcome_batch(projector, plan));
    r.p_leak[k] = p;
    r.conditioned[k] = n;
  });
  double acc = 0.0;
  for (double p : r.p_leak) acc += p;
  r.mean_p_leak = acc / static_cast<double>(r.p_leak.size());
  r.total_shots = shots * grid.size();
  return r;
}

struct ConfinementReport {
  SampledTrace p0;
  Spectrum spectrum;
  double h0 = 0.0;
  double h1 = 0.0;
  ConfinementBounds bounds;
  std::string note;
};

inline constexpr const char* kConfinementNote =
    "bounds certify confinement to some two-dimensional subspace, which need not be the computational one";

/// p0 estimate: fraction of experiments starting in outcome 0 that end there.
inline std::pair<double, std::uint64_t> p0_from_counts(const CountsTable& counts) {
  const std::uint64_t n = counts.row_sum(0);
  if (n == 0) throw ProtocolError(ProtocolErrorCode::kNoConditionedShots, "no experiment started in outcome 0");
  return {static_cast<double>(counts.at(0, 0)) / static_cast<double>(n), n};
}

inline ConfinementReport confinement_from_trace(const SampledTrace& p0) {
  ConfinementReport r;
  r.p0 = p0;
  r.spectrum = dft(p0);
  if (!r.spectrum.peak) throw ProtocolError(ProtocolErrorCode::kNoPeak, "p0 trace shows no first-order peak");
  r.h0 = r.spectrum.h0;
  r.h1 = r.spectrum.h1();
  r.bounds = confinement_bounds(r.h0, r.h1);
  r.note = kConfinementNote;
  return r;
}

template <ExperimentBackend B>
SampledTrace acquire_p0_trace(const B& device, const ControlSetting& setting, const TimeGrid& grid,
                              std::uint64_t shots, std::uint64_t seed, const RunOptions& options = {}) {
  grid.validate();
  std::vector<double> values(grid.size());
  std::vector<std::uint64_t> n(grid.size());
  parallel_for(grid.size(), options.threads, [&](std::size_t k) {
    const ShotPlan plan{setting, grid.at(k), shots, derive_seed(seed, k), std::nullopt};
    std::tie(values[k], n[k]) = p0_from_counts(device.run_batch(plan));
  });
  return SampledTrace(grid.t0, grid.dt, std::move(values), std::move(n));
}

template <ExperimentBackend B>
ConfinementReport estimate_confinement_fourier(const B& device, const ControlSetting& setting, const TimeGrid& grid,
                                               std::uint64_t shots, std::uint64_t seed,
                                               const RunOptions& options = {}) {
  return confinement_from_trace(acquire_p0_trace(device, setting, grid, shots, seed, options));
}

}  // namespace qident
