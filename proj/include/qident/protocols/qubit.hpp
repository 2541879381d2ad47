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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qident/core/bloch.hpp"
#include "qident/core/error.hpp"
#include "qident/device/rng.hpp"
#include "qident/device/simulator.hpp"
#include "qident/protocols/parallel.hpp"
#include "qident/spectral/harmonic.hpp"
#include "qident/spectral/spectrum.hpp"

namespace qident {

/// Identified rotation of one control setting. The axis azimuth phi is
/// relative to the reference setting (phi_ref = 0).
struct HamiltonianEstimate {
  std::string setting;
  std::vector<double> control;

  double omega_hat = 0.0;
  /// In [0, pi/2]: the sign of theta and theta <-> pi - theta are not
  /// observable from z(t).
  double theta_hat = 0.0;
  bool omega_undetermined = false;
  double sigma_omega = 0.0;
  double sigma_theta = 0.0;

  double h0 = 0.0;
  /// h0 - cos^2(theta_hat).
  double h0_discrepancy = 0.0;
  /// 2 Re F(w) at the raw spectral peak.
  double spectral_sin2 = 0.0;
  double peak_omega_bin = 0.0;

  std::optional<double> phi_hat;
  std::vector<double> phi_candidates;
  bool phi_ambiguous = false;
  /// phi was taken from the first-order coefficient because theta_f is at
  /// the edge of its range.
  bool phi_from_first_order = false;
  std::optional<double> phi_first_order;
  std::optional<double> sigma_phi;
  double c_hat = 0.0;
  double d_hat = 0.0;

  /// d = omega (sin theta cos phi, sin theta sin phi, cos theta); phi = 0
  /// when it has not been identified.
  Vec3 cartesian() const {
    const double phi = phi_hat.value_or(0.0);
    return omega_hat * Vec3(std::sin(theta_hat) * std::cos(phi), std::sin(theta_hat) * std::sin(phi),
                            std::cos(theta_hat));
  }
};

inline constexpr const char* kThetaAmbiguityNote =
    "z(t) fixes only sin^2(theta): the sign of theta and theta <-> pi - theta are unresolved";

namespace detail {
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a <= -kPi ? a + 2.0 * kPi : a;
}
}  // namespace detail

/// z(t_k) from two-outcome experiments; point k uses derive_seed(seed, k).
template <ExperimentBackend B>
SampledTrace acquire_z_trace(const B& device, const ControlSetting& setting, const TimeGrid& grid, std::uint64_t shots,
                             std::uint64_t seed, const RunOptions& options = {},
                             const std::optional<PrepareStep>& prepare = std::nullopt) {
  grid.validate();
  std::vector<double> z(grid.size());
  std::vector<std::uint64_t> n(grid.size());
  parallel_for(grid.size(), options.threads, [&](std::size_t k) {
    const ShotPlan plan{setting, grid.at(k), shots, derive_seed(seed, k), prepare};
    const ZEstimate e = estimate_z(device.run_batch(plan));
    z[k] = e.z_hat;
    n[k] = e.n_conditioned;
  });
  return SampledTrace(grid.t0, grid.dt, std::move(z), std::move(n));
}

/// (omega, theta) from a z(t) trace started on the measurement axis.
///
/// The spectral peak seeds a least-squares harmonic fit whose frequency is
/// refined within half a bin; the cosine amplitude of that fit estimates
/// sin^2(theta) without the scalloping loss of an off-bin DFT coefficient.
inline HamiltonianEstimate estimate_omega_theta(const SampledTrace& trace) {
  HamiltonianEstimate e;
  const Spectrum s = dft(trace);
  e.h0 = s.h0;
  if (!s.peak) {
    e.omega_undetermined = true;
    e.theta_hat = 0.0;
    e.h0_discrepancy = s.h0 - 1.0;
    return e;
  }
  e.peak_omega_bin = s.peak->omega_bin;
  e.spectral_sin2 = 2.0 * s.peak->coefficient.real();
  e.omega_hat = refine_peak_frequency(trace, s.peak->refined_omega);
  const HarmonicFit hf = harmonic_fit(trace, e.omega_hat);
  const double sin2 = std::clamp(hf.a1, 0.0, 1.0);
  e.theta_hat = std::asin(std::sqrt(sin2));
  e.h0_discrepancy = s.h0 - std::cos(e.theta_hat) * std::cos(e.theta_hat);

  const double n = static_cast<double>(trace.size());
  const double var = hf.rss / std::max(n - 3.0, 1.0);
  const double amp2 = hf.a1 * hf.a1 + hf.b1 * hf.b1;
  e.sigma_omega = amp2 > 0.0 ? std::sqrt(24.0 * var / (amp2 * n * (n * n - 1.0) * trace.dt * trace.dt)) : INFINITY;
  const double slope = std::abs(std::sin(2.0 * e.theta_hat));
  e.sigma_theta = slope > 1e-12 ? hf.sigma_a1 / slope : std::sqrt(hf.sigma_a1);
  return e;
}

template <ExperimentBackend B>
HamiltonianEstimate identify_omega_theta(const B& device, const ControlSetting& setting, const TimeGrid& grid,
                                         std::uint64_t shots, std::uint64_t seed, const RunOptions& options = {}) {
  HamiltonianEstimate e = estimate_omega_theta(acquire_z_trace(device, setting, grid, shots, seed, options));
  e.setting = describe(setting);
  if (const auto* f = std::get_if<std::vector<double>>(&setting)) e.control = *f;
  return e;
}

/// Equatorial state prepared by rotating s0 = (0,0,1) about the reference
/// axis (phi_ref = 0) by alpha0.
struct PreparedFrame {
  double alpha0 = 0.0;
  double beta = 0.0;
  /// atan2(-sqrt(x), cos theta_ref) with x = -cos(2 theta_ref).
  double beta_closed_form = 0.0;
  BlochVector s1;
  ControlSetting reference;
  double theta_ref = 0.0;
  double omega_ref = 0.0;

  /// Evolution time under the reference control that realizes alpha0.
  double duration() const { return alpha0 / omega_ref; }
  PrepareStep prepare_step() const { return {reference, duration()}; }
};

inline PreparedFrame prepare_equatorial(double omega_ref, double theta_ref, ControlSetting reference = std::string()) {
  if (!(omega_ref > 0.0) || !std::isfinite(omega_ref)) {
    throw ProtocolError(ProtocolErrorCode::kInvalidFrame, "reference rotation frequency must be positive");
  }
  if (!(theta_ref > kPi / 4.0 - 1e-9)) {
    throw ProtocolError(ProtocolErrorCode::kInvalidFrame, "reference declination must exceed pi/4");
  }
  if (theta_ref > kPi / 2.0 + 1e-9) {
    throw ProtocolError(ProtocolErrorCode::kInvalidFrame, "reference declination must not exceed pi/2");
  }
  PreparedFrame f;
  f.theta_ref = theta_ref;
  f.omega_ref = omega_ref;
  f.reference = std::move(reference);
  const double cot = std::cos(theta_ref) / std::sin(theta_ref);
  f.alpha0 = std::acos(std::clamp(-cot * cot, -1.0, 1.0));
  AxisAngles axis;
  axis.omega = 1.0;
  axis.theta = theta_ref;
  axis.phi = 0.0;
  f.s1 = rotate_bloch(axis, f.alpha0, BlochVector(0.0, 0.0, 1.0));
  if (!(std::abs(f.s1.z()) < 1e-6)) {
    throw ProtocolError(ProtocolErrorCode::kInvalidFrame, "prepared state is not on the equator");
  }
  f.beta = std::atan2(f.s1.y(), f.s1.x());
  const double x = -std::cos(2.0 * theta_ref);
  f.beta_closed_form = std::atan2(-kRotationHandedness * std::sqrt(std::max(x, 0.0)), std::cos(theta_ref));
  return f;
}

struct PhiOptions {
  /// |d| above this many standard errors fixes the arccos branch.
  double significance = 3.0;
  /// theta_f closer than this to 0 or pi/2 makes c uninformative.
  double edge = 1e-3;
};

/// phi from a z(t) trace recorded after preparing frame.s1.
///
/// The trace follows z(t) = c (1 - cos w t) + d sin w t with
/// c = sin(theta) cos(theta) cos(phi - beta) and, for the module handedness,
/// d = -sin(theta) sin(phi - beta). c is the constant term of a harmonic
/// least-squares fit at the known w.
inline HamiltonianEstimate estimate_phi(const SampledTrace& trace, const PreparedFrame& frame, double omega_f,
                                        double theta_f, const PhiOptions& options = {}) {
  if (!(omega_f > 0.0)) throw ContractError("target rotation frequency must be positive");
  if (theta_f < options.edge) {
    throw ProtocolError(ProtocolErrorCode::kCoefficientOutOfRange, "axis is parallel to z: phi is not identifiable");
  }
  HamiltonianEstimate e;
  e.omega_hat = omega_f;
  e.theta_hat = theta_f;
  const HarmonicFit hf = harmonic_fit(trace, omega_f);
  const double st = std::sin(theta_f);
  const double ct = std::cos(theta_f);
  const double scale = st * ct;
  e.c_hat = hf.a0;
  e.d_hat = hf.b1;
  e.h0 = hf.a0;
  const double sin_rel = -kRotationHandedness * hf.b1 / st;
  e.phi_first_order = detail::wrap_angle(frame.beta + std::atan2(sin_rel * ct, -hf.a1 / st));

  if (std::abs(theta_f - kPi / 2.0) < options.edge) {
    const double a = std::asin(std::clamp(sin_rel, -1.0, 1.0));
    e.phi_candidates = {detail::wrap_angle(frame.beta + a), detail::wrap_angle(frame.beta + kPi - a)};
    e.phi_hat = e.phi_candidates.front();
    e.phi_ambiguous = true;
    e.phi_from_first_order = true;
    e.sigma_phi = hf.sigma_b1 / (st * std::max(std::cos(a), 1e-12));
    return e;
  }

  const double margin = 3.0 * hf.sigma_a0 + 1e-9;
  if (std::abs(hf.a0) > std::abs(scale) + margin) {
    throw ProtocolError(ProtocolErrorCode::kCoefficientOutOfRange,
                        "constant term exceeds sin(theta)cos(theta) beyond the noise margin");
  }
  const double ac = std::acos(std::clamp(hf.a0 / scale, -1.0, 1.0));
  const bool significant = std::abs(hf.b1) > options.significance * hf.sigma_b1;
  const double sign = (significant && sin_rel < 0.0) ? -1.0 : 1.0;
  e.phi_candidates = {detail::wrap_angle(frame.beta + sign * ac), detail::wrap_angle(frame.beta - sign * ac)};
  e.phi_hat = e.phi_candidates.front();
  e.phi_ambiguous = !significant && ac > 0.0;
  e.sigma_phi = hf.sigma_a0 / (std::abs(scale) * std::max(std::sin(ac), 1e-12));
  return e;
}

template <ExperimentBackend B>
HamiltonianEstimate identify_phi(const B& device, const ControlSetting& setting, const PreparedFrame& frame,
                                 double omega_f, double theta_f, const TimeGrid& grid, std::uint64_t shots,
                                 std::uint64_t seed, const RunOptions& options = {}, const PhiOptions& phi = {}) {
  const SampledTrace z = acquire_z_trace(device, setting, grid, shots, seed, options, frame.prepare_step());
  HamiltonianEstimate e = estimate_phi(z, frame, omega_f, theta_f, phi);
  e.setting = describe(setting);
  if (const auto* f = std::get_if<std::vector<double>>(&setting)) e.control = *f;
  return e;
}

/// One control setting to characterize and the control values it realizes.
struct ControlPoint {
  ControlSetting setting;
  std::vector<double> control;
};

struct AxisTable {
  std::vector<HamiltonianEstimate> estimates;
  /// Index into `estimates` of the phi = 0 reference.
  std::size_t reference = 0;
  PreparedFrame frame;
};

/// Identifies (omega, theta) for every setting, picks as reference the
/// setting whose theta is closest to pi/2 within (pi/4, pi/2], then
/// identifies phi for the others relative to it. Setting i uses seeds
/// derived from (seed, 2i) and (seed, 2i + 1).
template <ExperimentBackend B>
AxisTable identify_axis_table(const B& device, const std::vector<ControlPoint>& points, const TimeGrid& grid,
                              std::uint64_t shots, std::uint64_t seed, const RunOptions& options = {}) {
  if (points.empty()) throw ContractError("no control settings to identify");
  AxisTable out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    HamiltonianEstimate e = identify_omega_theta(device, points[i].setting, grid, shots, derive_seed(seed, 2 * i), options);
    e.control = points[i].control;
    out.estimates.push_back(std::move(e));
  }
  std::optional<std::size_t> ref;
  for (std::size_t i = 0; i < out.estimates.size(); ++i) {
    const auto& e = out.estimates[i];
    if (e.omega_undetermined || !(e.theta_hat > kPi / 4.0)) continue;
    if (!ref || e.theta_hat > out.estimates[*ref].theta_hat) ref = i;
  }
  if (!ref) throw ProtocolError(ProtocolErrorCode::kInvalidFrame, "no setting has theta in (pi/4, pi/2]");
  out.reference = *ref;
  const auto& r = out.estimates[*ref];
  out.frame = prepare_equatorial(r.omega_hat, r.theta_hat, points[*ref].setting);
  out.estimates[*ref].phi_hat = 0.0;
  out.estimates[*ref].phi_candidates = {0.0};
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& e = out.estimates[i];
    if (i == *ref || e.omega_undetermined) continue;
    const HamiltonianEstimate p = identify_phi(device, points[i].setting, out.frame, e.omega_hat, e.theta_hat, grid,
                                               shots, derive_seed(seed, 2 * i + 1), options);
    e.phi_hat = p.phi_hat;
    e.phi_candidates = p.phi_candidates;
    e.phi_ambiguous = p.phi_ambiguous;
    e.phi_from_first_order = p.phi_from_first_order;
    e.phi_first_order = p.phi_first_order;
    e.sigma_phi = p.sigma_phi;
    e.c_hat = p.c_hat;
    e.d_hat = p.d_hat;
  }
  return out;
}

}  // namespace qident
