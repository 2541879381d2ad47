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

#include "qident/core/error.hpp"
#include "qident/device/rng.hpp"
#include "qident/device/simulator.hpp"
#include "qident/protocols/parallel.hpp"
#include "qident/protocols/qubit.hpp"
#include "qident/spectral/lorentzian.hpp"
#include "qident/spectral/spectrum.hpp"

namespace qident {

enum class DecoherenceClass { kPureDephasing, kSymmetricRelaxation, kMixed, kUndetermined };

inline const char* to_string(DecoherenceClass c) {
  switch (c) {
    case DecoherenceClass::kPureDephasing: return "pure_dephasing";
    case DecoherenceClass::kSymmetricRelaxation: return "symmetric_relaxation";
    case DecoherenceClass::kMixed: return "mixed";
    case DecoherenceClass::kUndetermined: return "undetermined";
  }
  return "undetermined";
}

/// Flip fractions q(t) = P(b != a) after dwelling under the z-axis control.
struct FlipData {
  std::vector<double> dwell;
  /// Per initial outcome a = 0, 1; empty when that branch never occurred.
  std::vector<double> q[2];
  std::vector<std::uint64_t> n[2];
};

struct RateFit {
  double gamma = 0.0;
  double sigma = 0.0;
  double chi2 = 0.0;
  std::size_t points = 0;
};

struct DecoherenceReport {
  DecoherenceClass classification = DecoherenceClass::kUndetermined;
  std::optional<double> gamma_hat;
  std::optional<double> omega0_hat;
  std::optional<LorentzianFit> lorentzian;
  std::optional<FlipData> flips;
  std::optional<RateFit> rate[2];
  bool no_population_decay = false;
  /// Fitted width is at the frequency resolution of the grid, so the decay
  /// rate is not resolved.
  bool resolution_limited = false;
  double max_flip_fraction = 0.0;
};

struct DiscriminationOptions {
  double q_threshold = 0.05;
  double rate_significance = 3.0;
  /// Relative slack allowed between the rates seen from the two branches.
  double rate_slack = 0.1;
  /// Reduced chi-square above which q(t) is not a single symmetric decay.
  double max_reduced_chi2 = 4.0;
};

inline const std::vector<double>& default_dwell_times() {
  static const std::vector<double> t{1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
  return t;
}

namespace detail {

inline double relaxation_flip(double gamma, double t) { return 0.5 * (1.0 - std::exp(-2.0 * gamma * t)); }

/// Weighted least-squares rate for q(t) = (1 - exp(-2 G t))/2.
inline RateFit fit_relaxation_rate(const std::vector<double>& t, const std::vector<double>& q,
                                   const std::vector<std::uint64_t>& n) {
  const auto chi2 = [&](double g) {
    double acc = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double m = relaxation_flip(g, t[k]);
      const double var = std::max(m * (1.0 - m), 1.0 / static_cast<double>(n[k])) / static_cast<double>(n[k]);
      acc += (q[k] - m) * (q[k] - m) / var;
    }
    return acc;
  };
  // golden-section search on log(gamma)
  const double tmax = *std::max_element(t.begin(), t.end());
  const double tmin = *std::min_element(t.begin(), t.end());
  double a = std::log(1e-4 / tmax);
  double b = std::log(20.0 / tmin);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = chi2(std::exp(c));
  double fd = chi2(std::exp(d));
  for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - gr * (b - a);
      fc = chi2(std::exp(c));
    } else {
      a = c, c = d, fc = fd;
      d = a + gr * (b - a);
      fd = chi2(std::exp(d));
    }
  }
  RateFit r;
  r.gamma = std::exp(0.5 * (a + b));
  r.chi2 = chi2(r.gamma);
  r.points = t.size();
  double info = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double m = relaxation_flip(r.gamma, t[k]);
    const double dm = t[k] * std::exp(-2.0 * r.gamma * t[k]);
    const double var = std::max(m * (1.0 - m), 1.0 / static_cast<double>(n[k])) / static_cast<double>(n[k]);
    info += dm * dm / var;
  }
  r.sigma = info > 0.0 ? 1.0 / std::sqrt(info) : INFINITY;
  return r;
}

}  // namespace detail

inline DecoherenceReport classify_flips(const FlipData& data, const DiscriminationOptions& options = {}) {
  DecoherenceReport r;
  r.flips = data;
  bool any_flip = false;
  for (int a = 0; a < 2; ++a) {
    for (std::size_t k = 0; k < data.q[a].size(); ++k) {
      r.max_flip_fraction = std::max(r.max_flip_fraction, data.q[a][k]);
      any_flip = any_flip || data.q[a][k] > 0.0;
    }
  }
  if (data.q[0].empty() && data.q[1].empty()) {
    throw ProtocolError(ProtocolErrorCode::kNoConditionedShots, "no dwell experiment produced counts");
  }
  r.no_population_decay = !any_flip;
  if (r.max_flip_fraction <= options.q_threshold) {
    r.classification = DecoherenceClass::kPureDephasing;
    return r;
  }
  std::size_t branches = 0;
  double dof = 0.0;
  double chi2 = 0.0;
  for (int a = 0; a < 2; ++a) {
    if (data.q[a].empty()) continue;
    r.rate[a] = detail::fit_relaxation_rate(data.dwell, data.q[a], data.n[a]);
    chi2 += r.rate[a]->chi2;
    dof += static_cast<double>(r.rate[a]->points) - 1.0;
    ++branches;
  }
  bool consistent = chi2 / std::max(dof, 1.0) <= options.max_reduced_chi2;
  if (branches == 2) {
    const double g0 = r.rate[0]->gamma;
    const double g1 = r.rate[1]->gamma;
    const double tol = options.rate_significance * std::hypot(r.rate[0]->sigma, r.rate[1]->sigma) +
                       options.rate_slack * 0.5 * (g0 + g1);
    consistent = consistent && std::abs(g0 - g1) <= tol;
    const double w0 = 1.0 / (r.rate[0]->sigma * r.rate[0]->sigma);
    const double w1 = 1.0 / (r.rate[1]->sigma * r.rate[1]->sigma);
    r.gamma_hat = (w0 * g0 + w1 * g1) / (w0 + w1);
  } else {
    r.gamma_hat = (r.rate[0] ? r.rate[0] : r.rate[1])->gamma;
  }
  r.classification = consistent ? DecoherenceClass::kSymmetricRelaxation : DecoherenceClass::kMixed;
  return r;
}

/// Dephasing versus relaxation under a control whose axis is the
/// measurement axis. Dwell time i uses derive_seed(seed, i).
template <ExperimentBackend B>
DecoherenceReport discriminate_dephasing_relaxation(const B& device, const ControlSetting& z_control,
                                                    const std::vector<double>& dwell, std::uint64_t shots,
                                                    std::uint64_t seed, const RunOptions& options = {},
                                                    const DiscriminationOptions& disc = {}) {
  if (dwell.empty()) throw ContractError("no dwell times given");
  std::vector<CountsTable> tables(dwell.size());
  parallel_for(dwell.size(), options.threads, [&](std::size_t i) {
    tables[i] = device.run_batch(ShotPlan{z_control, dwell[i], shots, derive_seed(seed, i), std::nullopt});
  });
  FlipData data;
  for (int a = 0; a < 2; ++a) {
    std::vector<double> t;
    for (std::size_t i = 0; i < dwell.size(); ++i) {
      if (tables[i].outcomes() != 2) throw ContractError("dephasing discrimination needs a two-outcome device");
      const std::uint64_t n = tables[i].row_sum(static_cast<std::size_t>(a));
      if (n == 0) continue;
      t.push_back(dwell[i]);
      data.q[a].push_back(static_cast<double>(tables[i].at(a, 1 - a)) / static_cast<double>(n));
      data.n[a].push_back(n);
    }
    if (!t.empty() && t.size() != dwell.size()) {
      data.q[a].clear();
      data.n[a].clear();
    }
  }
  data.dwell = dwell;
  return classify_flips(data, disc);
}

struct DecoherenceFitOptions {
  LorentzianOptions fit;
  /// Widths below this fraction of a bin are reported as resolution limited.
  double resolution_fraction = 0.35;
};

inline DecoherenceReport decoherence_from_trace(const SampledTrace& z, const DecoherenceFitOptions& options = {}) {
  const Spectrum s = dft(z);
  if (!s.peak) throw ProtocolError(ProtocolErrorCode::kOverdamped, "no oscillation peak above the noise floor");
  // A maximum in the first nonzero bin is the tail of the zero-frequency line.
  if (s.peak->index <= s.zero_index() + 1) {
    throw ProtocolError(ProtocolErrorCode::kOverdamped, "spectrum peaks at zero frequency");
  }
  DecoherenceReport r;
  r.lorentzian = fit_lorentzian(s, options.fit);
  r.omega0_hat = r.lorentzian->omega0;
  r.gamma_hat = r.lorentzian->gamma;
  r.resolution_limited = r.lorentzian->gamma < options.resolution_fraction * s.bin_width;
  return r;
}

/// Rotation frequency and envelope decay rate from the Lorentzian line
/// shape of the first-order peak of z(t).
template <ExperimentBackend B>
DecoherenceReport estimate_decoherence(const B& device, const ControlSetting& setting, const TimeGrid& grid,
                                       std::uint64_t shots, std::uint64_t seed, const RunOptions& options = {},
                                       const DecoherenceFitOptions& fit = {}) {
  return decoherence_from_trace(acquire_z_trace(device, setting, grid, shots, seed, options), fit);
}

}  // namespace qident
