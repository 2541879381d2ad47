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

#include "qident/core/error.hpp"
#include "qident/core/types.hpp"
#include "qident/spectral/spectrum.hpp"

namespace qident {

/// Least-squares fit x(t) ~ a0 + a1 cos(w t) + b1 sin(w t) at a fixed w.
struct HarmonicFit {
  double omega = 0.0;
  double a0 = 0.0;
  double a1 = 0.0;
  double b1 = 0.0;
  double rss = 0.0;
  /// Standard errors from the residual variance.
  double sigma_a0 = 0.0;
  double sigma_a1 = 0.0;
  double sigma_b1 = 0.0;
};

inline HarmonicFit harmonic_fit(const SampledTrace& trace, double omega) {
  trace.validate();
  const auto n = static_cast<Eigen::Index>(trace.size());
  RealMatrix x(n, 3);
  RealVector y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = trace.time(static_cast<std::size_t>(k));
    x(k, 0) = 1.0;
    x(k, 1) = std::cos(omega * t);
    x(k, 2) = std::sin(omega * t);
    y(k) = trace.values[static_cast<std::size_t>(k)];
  }
  const Eigen::ColPivHouseholderQR<RealMatrix> qr(x);
  if (qr.rank() < 3) throw ContractError("harmonic design matrix is rank deficient at this frequency");
  const RealVector beta = qr.solve(y);
  HarmonicFit f;
  f.omega = omega;
  f.a0 = beta(0);
  f.a1 = beta(1);
  f.b1 = beta(2);
  f.rss = (x * beta - y).squaredNorm();
  const double var = f.rss / static_cast<double>(std::max<Eigen::Index>(n - 3, 1));
  const RealMatrix cov = var * (x.transpose() * x).inverse();
  f.sigma_a0 = std::sqrt(std::max(cov(0, 0), 0.0));
  f.sigma_a1 = std::sqrt(std::max(cov(1, 1), 0.0));
  f.sigma_b1 = std::sqrt(std::max(cov(2, 2), 0.0));
  return f;
}

/// Frequency minimizing the harmonic-fit residual within one bin of
/// `omega_start`: a 41-point scan, then golden-section search around the
/// best scan point.
inline double refine_peak_frequency(const SampledTrace& trace, double omega_start, double rel_tol = 1e-12) {
  const double bin = trace.bin_width();
  const double lo = std::max(omega_start - bin, 0.125 * bin);
  const double hi = omega_start + bin;
  constexpr int kScan = 41;
  const double h = (hi - lo) / (kScan - 1);
  const auto rss = [&](double w) { return harmonic_fit(trace, w).rss; };
  double best = lo;
  double best_rss = rss(lo);
  for (int i = 1; i < kScan; ++i) {
    const double w = lo + i * h;
    const double r = rss(w);
    if (r < best_rss) {
      best_rss = r;
      best = w;
    }
  }
  return detail::golden_minimum(rss, std::max(best - h, 0.125 * bin), best + h,
                                rel_tol * std::max(1.0, std::abs(omega_start)));
}

}  // namespace qident
