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

#include <concepts>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qident/core/error.hpp"
#include "qident/core/evolution.hpp"
#include "qident/core/operators.hpp"
#include "qident/device/device_model.hpp"
#include "qident/device/measurement.hpp"
#include "qident/device/rng.hpp"

namespace qident {

/// What an identification protocol is allowed to ask of a device: counts
/// from initialize-evolve-measure batches and the outcome labels.
template <class B>
concept ExperimentBackend = requires(const B& b, const ShotPlan& plan, const HermitianOperator& p) {
  { b.run_batch(plan) } -> std::same_as<CountsTable>;
  { b.run_three_outcome_batch(p, plan) } -> std::same_as<CountsTable>;
  { b.outcome_values() } -> std::convertible_to<std::vector<double>>;
};

/// Born-rule simulator of a DeviceModel.
///
/// For a plan, each reachable first outcome a is collapsed, prepared and
/// evolved once; shot i then draws (a, b) from its own counter-based
/// substream derive_seed(plan.seed, i). The tally is therefore independent of
/// how shots or plans are scheduled across threads.
class SimulatedDevice {
 public:
  explicit SimulatedDevice(DeviceModel model)
      : model_(std::make_shared<const DeviceModel>(std::move(model))), basis_(model_->observable) {
    if (const auto* table = model_->hamiltonians.table()) {
      for (const auto& [label, entry] : *table) cache_.emplace(label, Propagator(entry.hamiltonian, model_->dissipator));
    }
  }

  const DeviceModel& model() const { return *model_; }
  const MeasurementBasis& basis() const { return basis_; }
  std::vector<double> outcome_values() const { return basis_.values(); }

  /// State after the prepare step and evolution, starting from rho.
  DensityMatrix evolve_state(const DensityMatrix& rho, const ShotPlan& plan) const {
    DensityMatrix state = rho;
    if (plan.prepare) state = evolve_under(plan.prepare->setting, state, plan.prepare->duration);
    return evolve_under(plan.setting, state, plan.evolve_time);
  }

  /// Exact P(a, b) for the two-measurement experiment.
  RealMatrix joint_probabilities(const ShotPlan& plan) const { return joint(basis_, plan); }

  RealMatrix joint_probabilities_three_outcome(const HermitianOperator& projector, const ShotPlan& plan) const {
    return joint(basis_.restricted_to_subspace(projector), plan);
  }

  CountsTable run_batch(const ShotPlan& plan) const {
    plan.validate();
    return sample(basis_, plan);
  }

  CountsTable run_three_outcome_batch(const HermitianOperator& projector, const ShotPlan& plan) const {
    plan.validate();
    return sample(basis_.restricted_to_subspace(projector), plan);
  }

 private:
  DensityMatrix evolve_under(const ControlSetting& s, const DensityMatrix& rho, double t) const {
    if (const auto* label = std::get_if<std::string>(&s)) {
      auto it = cache_.find(*label);
      if (it == cache_.end()) throw ContractError("unknown control label '" + *label + "'");
      return it->second.evolve(rho, t);
    }
    return Propagator(model_->hamiltonians.at(s), model_->dissipator).evolve(rho, t);
  }

  struct Branches {
    RealVector first;
    /// Row a: unnormalized second-outcome weights after first outcome a.
    RealMatrix second;
  };

  Branches branches(const MeasurementBasis& basis, const ShotPlan& plan) const {
    if (!model_->hamiltonians.resolves(plan.setting)) {
      throw ContractError("control setting '" + describe(plan.setting) + "' is not available on this device");
    }
    if (plan.prepare && !model_->hamiltonians.resolves(plan.prepare->setting)) {
      throw ContractError("prepare setting '" + describe(plan.prepare->setting) + "' is not available on this device");
    }
    const auto n = static_cast<Eigen::Index>(basis.size());
    Branches out{outcome_probabilities(model_->pre_measurement_state, basis), RealMatrix::Zero(n, n)};
    if (!(out.first.sum() > 1e-300)) throw ContractError("all outcome probabilities vanish; state is invalid");
    const Matrix& rho = model_->pre_measurement_state.matrix();
    for (Eigen::Index a = 0; a < n; ++a) {
      if (out.first(a) <= 0.0) continue;
      const Matrix& proj = basis.projectors()[static_cast<std::size_t>(a)];
      const DensityMatrix collapsed = DensityMatrix::from_propagated(proj * rho * proj / out.first(a));
      out.second.row(a) = outcome_probabilities(evolve_state(collapsed, plan), basis).transpose();
    }
    return out;
  }

  RealMatrix joint(const MeasurementBasis& basis, const ShotPlan& plan) const {
    plan.validate();
    const Branches br = branches(basis, plan);
    RealMatrix p = RealMatrix::Zero(br.second.rows(), br.second.cols());
    const double z = br.first.sum();
    for (Eigen::Index a = 0; a < p.rows(); ++a) {
      const double row = br.second.row(a).sum();
      if (br.first(a) <= 0.0 || row <= 0.0) continue;
      p.row(a) = (br.first(a) / z) * br.second.row(a) / row;
    }
    return p;
  }

  CountsTable sample(const MeasurementBasis& basis, const ShotPlan& plan) const {
    const Branches br = branches(basis, plan);
    const std::size_t comp = basis.complement_index();
    CountsTable table(basis.values(), comp < basis.size() ? std::optional<std::size_t>(comp) : std::nullopt);
    const double first_total = br.first.sum();
    std::vector<RealVector> rows;
    std::vector<double> row_totals;
    for (Eigen::Index a = 0; a < br.second.rows(); ++a) {
      rows.emplace_back(br.second.row(a).transpose());
      row_totals.push_back(rows.back().sum());
    }
    for (std::uint64_t i = 0; i < plan.shots; ++i) {
      CounterRng rng(derive_seed(plan.seed, i));
      const std::size_t a = detail::draw_index(br.first, first_total, rng.uniform());
      if (!(row_totals[a] > 1e-300)) throw ContractError("evolved state has vanishing outcome probabilities");
      const std::size_t b = detail::draw_index(rows[a], row_totals[a], rng.uniform());
      table.add(a, b);
    }
    return table;
  }

  std::shared_ptr<const DeviceModel> model_;
  MeasurementBasis basis_;
  std::map<std::string, Propagator> cache_;
};

static_assert(ExperimentBackend<SimulatedDevice>);

template <ExperimentBackend B>
CountsTable run_experiment_batch(const B& device, const ShotPlan& plan) {
  return device.run_batch(plan);
}

template <ExperimentBackend B>
CountsTable run_three_outcome_batch(const B& device, const HermitianOperator& projector, const ShotPlan& plan) {
  return device.run_three_outcome_batch(projector, plan);
}

struct ZEstimate {
  double z_hat = 0.0;
  std::uint64_t n_conditioned = 0;
};

/// Ensemble average of the second outcome relative to the first.
///
/// With both_branches, shots that started in outcome 1 are folded in with
/// the outcome labels exchanged: z = (l0 (N00 + N11) + l1 (N01 + N10)) / n.
/// Otherwise only shots that started in outcome 0 are used.
inline ZEstimate estimate_z(const CountsTable& counts, bool both_branches = true) {
  if (counts.outcomes() != 2 || counts.complement) {
    throw ContractError("z estimation needs a two-outcome counts table");
  }
  const double l0 = counts.values[0];
  const double l1 = counts.values[1];
  std::uint64_t same = counts.at(0, 0);
  std::uint64_t flip = counts.at(0, 1);
  if (both_branches) {
    same += counts.at(1, 1);
    flip += counts.at(1, 0);
  }
  const std::uint64_t n = same + flip;
  if (n == 0) throw ProtocolError(ProtocolErrorCode::kNoConditionedShots, "no shots to condition the z estimate on");
  return {(l0 * static_cast<double>(same) + l1 * static_cast<double>(flip)) / static_cast<double>(n), n};
}

/// Expectation of estimate_z under a joint probability matrix P(a, b).
inline double expected_z(const RealMatrix& joint, const std::vector<double>& values, bool both_branches = true) {
  if (joint.rows() != 2 || joint.cols() != 2 || values.size() != 2) {
    throw ContractError("z expectation needs a two-outcome distribution");
  }
  double same = joint(0, 0);
  double flip = joint(0, 1);
  if (both_branches) {
    same += joint(1, 1);
    flip += joint(1, 0);
  }
  if (!(same + flip > 0.0)) throw ContractError("no probability mass to condition on");
  return (values[0] * same + values[1] * flip) / (same + flip);
}

}  // namespace qident
