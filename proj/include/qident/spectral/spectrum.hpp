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
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "qident/core/error.hpp"
#include "qident/core/types.hpp"

namespace qident {

/// Uniformly sampled real trace x(t0 + k dt), k = 0..K.
struct SampledTrace {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;
  /// Optional effective shot count behind each value.
  std::vector<std::uint64_t> shots;

  static constexpr std::size_t kMinSamples = 8;

  SampledTrace() = default;
  SampledTrace(double start, double step, std::vector<double> v, std::vector<std::uint64_t> n = {})
      : t0(start), dt(step), values(std::move(v)), shots(std::move(n)) {
    validate();
  }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("trace spacing must be positive");
    if (!std::isfinite(t0)) throw ContractError("trace start must be finite");
    if (values.size() < kMinSamples) throw ContractError("a trace needs at least 8 samples");
    if (!shots.empty() && shots.size() != values.size()) throw ContractError("shot counts do not match the trace");
  }

  std::size_t size() const { return values.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  /// Angular bin spacing 2 pi / (size * dt).
  double bin_width() const { return 2.0 * kPi / (static_cast<double>(size()) * dt); }
};

struct SpectralPeak {
  /// Bin frequency of the largest eligible coefficient (positive side).
  double omega_bin = 0.0;
  std::complex<double> coefficient;
  /// Bin frequency refined on a 4x zero-padded grid.
  double refined_omega = 0.0;
  std::size_t index = 0;
};

/// Two-sided DFT with c(w) = (1/N) sum_k x_k exp(-i w t_k), so that
/// A cos(w0 t) on a commensurate grid gives A/2 at +-w0. Phases refer to
/// absolute time.
struct Spectrum {
  std::vector<double> freqs;
  std::vector<std::complex<double>> coeffs;
  double h0 = 0.0;
  std::optional<SpectralPeak> peak;
  double bin_width = 0.0;
  /// Sampling of the source trace.
  std::size_t samples = 0;
  double t0 = 0.0;

  /// h1: single-sided magnitude of the dominant nonzero-frequency coefficient.
  double h1() const { return peak ? std::abs(peak->coefficient) : 0.0; }
  std::size_t zero_index() const {
    return static_cast<std::size_t>(std::find(freqs.begin(), freqs.end(), 0.0) - freqs.begin());
  }
};

/// Peak-eligibility rule for spectral coefficients.
struct PeakCriteria {
  /// Coefficients below this multiple of the median magnitude are noise.
  double median_factor = 3.0;
  /// Relative floor against rounding-level coefficients of clean traces.
  double relative_floor = 1e-9;
};

namespace detail {

inline std::complex<double> dtft(const SampledTrace& tr, double omega) {
  std::complex<double> acc = 0.0;
  const std::complex<double> step = std::exp(std::complex<double>(0.0, -omega * tr.dt));
  std::complex<double> ph = std::exp(std::complex<double>(0.0, -omega * tr.t0));
  for (double x : tr.values) {
    acc += x * ph;
    ph *= step;
  }
  return acc / static_cast<double>(tr.size());
}

/// Parabolic vertex offset in units of the grid step from three samples.
inline double parabolic_offset(double ym, double y0, double yp) {
  const double den = ym - 2.0 * y0 + yp;
  if (!(den < 0.0)) return 0.0;
  return std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
}

/// Golden-section minimum of a unimodal f on [a, b].
template <class F>
double golden_minimum(F&& f, double a, double b, double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Peak location on a 4x zero-padded grid around `omega_bin`, refined by a
/// parabola through the log-magnitudes of the three nearest padded bins.
inline double refine_peak_location(const SampledTrace& trace, double omega_bin) {
  const double step = trace.bin_width() / 4.0;
  int best = 0;
  double mags[9];
  for (int m = -4; m <= 4; ++m) mags[m + 4] = std::abs(detail::dtft(trace, omega_bin + m * step));
  for (int m = -3; m <= 3; ++m) {
    if (mags[m + 4] > mags[best + 4]) best = m;
  }
  const auto lg = [](double v) { return std::log(std::max(v, 1e-300)); };
  const double off = detail::parabolic_offset(lg(mags[best + 3]), lg(mags[best + 4]), lg(mags[best + 5]));
  return omega_bin + (best + off) * step;
}

inline Spectrum dft(const SampledTrace& trace, const PeakCriteria& criteria = {}) {
  trace.validate();
  const std::size_t n = trace.size();
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> raw;
  fft.fwd(raw, trace.values);

  Spectrum s;
  s.bin_width = trace.bin_width();
  s.samples = n;
  s.t0 = trace.t0;
  const auto lo = -static_cast<std::int64_t>((n - 1) / 2);
  const auto hi = static_cast<std::int64_t>(n / 2);
  s.freqs.reserve(n);
  s.coeffs.reserve(n);
  for (std::int64_t k = lo; k <= hi; ++k) {
    const std::size_t idx = static_cast<std::size_t>((k % static_cast<std::int64_t>(n) + static_cast<std::int64_t>(n)) %
                                                     static_cast<std::int64_t>(n));
    const double w = static_cast<double>(k) * s.bin_width;
    s.freqs.push_back(w);
    s.coeffs.push_back(raw[idx] * std::exp(std::complex<double>(0.0, -w * trace.t0)) / static_cast<double>(n));
  }
  const std::size_t zero = s.zero_index();
  s.h0 = s.coeffs[zero].real();

  std::vector<double> mags;
  double max_mag = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == zero) continue;
    mags.push_back(std::abs(s.coeffs[k]));
    max_mag = std::max(max_mag, mags.back());
  }
  auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
  std::nth_element(mags.begin(), mid, mags.end());
  const double floor = std::max(criteria.median_factor * *mid,
                                criteria.relative_floor * (std::abs(s.h0) + max_mag));

  std::optional<std::size_t> best;
  for (std::size_t k = zero + 1; k < n; ++k) {
    const double m = std::abs(s.coeffs[k]);
    if (m > floor && (!best || m > std::abs(s.coeffs[*best]))) best = k;
  }
  if (best) s.peak = SpectralPeak{s.freqs[*best], s.coeffs[*best], refine_peak_location(trace, s.freqs[*best]), *best};
  return s;
}

}  // namespace qident
