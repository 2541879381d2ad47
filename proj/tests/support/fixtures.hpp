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

#include <optional>
#include <string>
#include <vector>

#include "qident/qident.hpp"

namespace fixture {

inline qident::AxisAngles axis(double omega, double theta, double phi = 0.0) {
  qident::AxisAngles a;
  a.omega = omega;
  a.theta = theta;
  a.phi = phi;
  return a;
}

/// Qubit device with a table of labelled axes, sigma_z observable.
inline qident::SimulatedDevice qubit_device(const std::vector<std::pair<std::string, qident::AxisAngles>>& axes,
                                            qident::LindbladDissipator diss = {},
                                            std::optional<qident::DensityMatrix> pre = std::nullopt) {
  qident::ControlTable table;
  for (const auto& [label, a] : axes) table[label] = {qident::hamiltonian_from_axis_angles(a), {}};
  return qident::SimulatedDevice(qident::DeviceModel(qident::ControlledHamiltonian(std::move(table)), std::move(diss),
                                                     qident::HermitianOperator(qident::pauli::z()), std::move(pre)));
}

inline qident::SimulatedDevice qubit_device(const qident::AxisAngles& a, qident::LindbladDissipator diss = {},
                                            std::optional<qident::DensityMatrix> pre = std::nullopt) {
  return qubit_device({{"f", a}}, std::move(diss), std::move(pre));
}

/// N-level device with observable diag(1, -1, ..., -1).
inline qident::SimulatedDevice level_device(const qident::Matrix& h, std::optional<qident::DensityMatrix> pre) {
  const auto n = h.rows();
  qident::Matrix obs = -qident::Matrix::Identity(n, n);
  obs(0, 0) = 1.0;
  qident::ControlTable table;
  table["h"] = {qident::HermitianOperator(h), {}};
  return qident::SimulatedDevice(qident::DeviceModel(qident::ControlledHamiltonian(std::move(table)), {},
                                                     qident::HermitianOperator(obs), std::move(pre)));
}

/// Noiseless z(t) trace on a grid from the device's exact joint distribution.
inline qident::SampledTrace exact_z_trace(const qident::SimulatedDevice& dev, const qident::ControlSetting& s,
                                          const qident::TimeGrid& g,
                                          const std::optional<qident::PrepareStep>& prepare = std::nullopt) {
  std::vector<double> z(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const qident::ShotPlan plan{s, g.at(k), 1, 0, prepare};
    z[k] = qident::expected_z(dev.joint_probabilities(plan), dev.outcome_values());
  }
  return qident::SampledTrace(g.t0, g.dt, std::move(z));
}

}  // namespace fixture
