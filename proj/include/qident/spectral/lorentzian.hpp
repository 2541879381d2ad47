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
#include <optional>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "qident/core/error.hpp"
#include "qident/core/types.hpp"
#include "qident/spectral/spectrum.hpp"

namespace qident {

/// amplitude * gamma / ((w - omega0)^2 + gamma^2)
struct LorentzianFit {
  double omega0 = 0.0;
  double gamma = 0.0;
  double amplitude = 0.0;
  /// Oscillation phase at the record start (spectrum fits only).
  double phase = 0.0;
  /// Euclidean norm of the residual vector over the fitted points.
  double residual = 0.0;
  int iterations = 0;
  std::size_t points = 0;

  double operator()(double w) const { return amplitude * gamma / ((w - omega0) * (w - omega0) + gamma * gamma); }
};

/// Raised when the line-shape fit does not converge; carries the best iterate.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, LorentzianFit best) : std::runtime_error(what), best_(best) {}
  const LorentzianFit& best() const noexcept { return best_; }

 private:
  LorentzianFit best_;
};

struct LorentzianOptions {
  double step_tolerance = 1e-10;
  int max_iterations = 200;
};

namespace detail {

struct LorentzianFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = RealVector;
  using ValueType = RealVector;
  using JacobianType = RealMatrix;

  const std::vector<double>& w;
  const std::vector<double>& y;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(w.size()); }

  // p = (amplitude, omega0, log gamma)
  int operator()(const RealVector& p, RealVector& r) const {
    const double g = std::exp(p(2));
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double d = w[k] - p(1);
      r(static_cast<Eigen::Index>(k)) = p(0) * g / (d * d + g * g) - y[k];
    }
    return 0;
  }

  int df(const RealVector& p, RealMatrix& j) const {
    const double g = std::exp(p(2));
    for (std::size_t k = 0; k < w.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const double d = w[k] - p(1);
      const double den = d * d + g * g;
      j(i, 0) = g / den;
      j(i, 1) = p(0) * g * 2.0 * d / (den * den);
      j(i, 2) = p(0) * g * (d * d - g * g) / (den * den);
    }
    return 0;
  }
};

/// Half width at half maximum around index p by linear interpolation
/// between samples; negative when neither side crosses half height.
inline double half_width_at_half_max(const std::vector<double>& w, const std::vector<double>& y, std::size_t p) {
  const double half = 0.5 * y[p];
  double left = -1.0;
  double right = -1.0;
  for (std::size_t k = p; k > 0; --k) {
    if (y[k - 1] <= half) {
      const double f = (y[k] - half) / (y[k] - y[k - 1]);
      left = w[p] - (w[k] - f * (w[k] - w[k - 1]));
      break;
    }
  }
  for (std::size_t k = p; k + 1 < w.size(); ++k) {
    if (y[k + 1] <= half) {
      const double f = (y[k] - half) / (y[k] - y[k + 1]);
      right = (w[k] + f * (w[k + 1] - w[k])) - w[p];
      break;
    }
  }
  if (left > 0.0 && right > 0.0) return 0.5 * (left + right);
  return std::max(left, right);
}

}  // namespace detail

/// Levenberg-Marquardt fit of a Lorentzian to samples (w_k, y_k).
/// Starting values come from the largest sample and its half width.
inline LorentzianFit fit_lorentzian(const std::vector<double>& w, const std::vector<double>& y,
                                    std::optional<double> omega0_guess = std::nullopt,
                                    const LorentzianOptions& options = {}) {
  if (w.size() != y.size()) throw ContractError("frequency and value arrays differ in length");
  if (w.size() < 5) throw ContractError("a Lorentzian fit needs at least 5 points");
  const std::size_t p = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  if (!(y[p] > 0.0)) throw ProtocolError(ProtocolErrorCode::kNoPeak, "no positive peak to fit");
  double hwhm = detail::half_width_at_half_max(w, y, p);
  if (!(hwhm > 0.0)) hwhm = 0.25 * (w.back() - w.front());
  const double step = (w.back() - w.front()) / static_cast<double>(w.size() - 1);
  hwhm = std::max(hwhm, 0.25 * step);

  RealVector x(3);
  x << y[p] * hwhm, omega0_guess.value_or(w[p]), std::log(hwhm);
  detail::LorentzianFunctor f{w, y};
  Eigen::LevenbergMarquardt<detail::LorentzianFunctor> lm(f);
  lm.parameters.xtol = options.step_tolerance;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 10 * options.max_iterations;

  const auto pack = [&](const RealVector& v, int iters) {
    LorentzianFit fit;
    fit.amplitude = v(0);
    fit.omega0 = v(1);
    fit.gamma = std::exp(v(2));
    RealVector r(static_cast<Eigen::Index>(w.size()));
    f(v, r);
    fit.residual = r.norm();
    fit.iterations = iters;
    fit.points = w.size();
    return fit;
  };

  using namespace Eigen::LevenbergMarquardtSpace;
  Status status = lm.minimizeInit(x);
  if (status == ImproperInputParameters) throw ContractError("invalid Lorentzian fit setup");
  int iters = 0;
  do {
    status = lm.minimizeOneStep(x);
    ++iters;
  } while (status == Running && iters < options.max_iterations);

  LorentzianFit fit = pack(x, iters);
  if (status == Running || status == TooManyFunctionEvaluation || !std::isfinite(fit.gamma) ||
      !std::isfinite(fit.omega0)) {
    throw FitError("Lorentzian fit did not converge", fit);
  }
  return fit;
}

namespace detail {

/// (1/N) sum_{k<N} exp(-z k dt): the finite-record line of a damped
/// exponential with complex rate z.
inline std::complex<double> record_line(std::complex<double> z, double dt, std::size_t n) {
  const std::complex<double> zd = z * dt;
  const double nd = static_cast<double>(n);
  if (std::abs(zd) < 1e-9) return 1.0 - 0.5 * zd * (nd - 1.0);
  return (1.0 - std::exp(-zd * nd)) / (nd * (1.0 - std::exp(-zd)));
}

/// Complex spectrum of Re[A exp((i w0 - G)(t - t0))] sampled on the record:
/// B L(G + i(w - w0)) + conj(B) L(G + i(w + w0)), with B = A/2.
struct ComplexLineFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = RealVector;
  using ValueType = RealVector;
  using JacobianType = RealMatrix;

  const std::vector<double>& w;
  const std::vector<std::complex<double>>& y;
  double dt;
  std::size_t n;

  int inputs() const { return 4; }
  int values() const { return static_cast<int>(2 * w.size()); }

  static std::complex<double> model(const RealVector& p, double omega, double dt, std::size_t n) {
    const std::complex<double> b(p(0), p(1));
    return b * record_line({p(3), omega - p(2)}, dt, n) + std::conj(b) * record_line({p(3), omega + p(2)}, dt, n);
  }

  // p = (Re B, Im B, omega0, Gamma)
  int operator()(const RealVector& p, RealVector& r) const {
    for (std::size_t k = 0; k < w.size(); ++k) {
      const std::complex<double> d = model(p, w[k], dt, n) - y[k];
      r(static_cast<Eigen::Index>(2 * k)) = d.real();
      r(static_cast<Eigen::Index>(2 * k + 1)) = d.imag();
    }
    return 0;
  }
};

}  // namespace detail

/// Fits the first-order peak of a spectrum with the line of an exponentially
/// damped oscillation observed over the finite record, fitted to the complex
/// coefficients (real and imaginary parts). For records much longer than
/// 1/Gamma its absorptive part is amplitude * L_{omega0,Gamma}; `phase` is
/// the oscillation phase at t0.
inline LorentzianFit fit_lorentzian(const Spectrum& s, const LorentzianOptions& options = {}) {
  if (!s.peak) throw ProtocolError(ProtocolErrorCode::kNoPeak, "spectrum has no first-order peak");
  if (s.samples < 2) throw ContractError("spectrum does not record its sampling");
  const std::size_t zero = s.zero_index();
  const std::size_t pk = s.peak->index;
  const double dt = 2.0 * kPi / (static_cast<double>(s.samples) * s.bin_width);

  std::vector<double> pw(s.freqs.begin() + static_cast<std::ptrdiff_t>(zero) + 1, s.freqs.end());
  std::vector<double> power;
  for (std::size_t k = zero + 1; k < s.coeffs.size(); ++k) power.push_back(std::norm(s.coeffs[k]));
  const std::size_t p = pk - zero - 1;
  double hwhm = detail::half_width_at_half_max(pw, power, p);
  const double bins = hwhm > 0.0 ? std::ceil(4.0 * hwhm / s.bin_width) : 5.0;
  const auto half = static_cast<std::size_t>(std::max(5.0, bins));
  const std::size_t lo = p >= half ? p - half : 0;
  const std::size_t hi = std::min(pw.size() - 1, p + half);
  if (hi - lo + 1 < 5) throw ProtocolError(ProtocolErrorCode::kNoPeak, "peak window has fewer than 5 points");

  std::vector<double> w;
  std::vector<std::complex<double>> y;
  for (std::size_t k = lo; k <= hi; ++k) {
    w.push_back(pw[k]);
    // undo the absolute-time phase so the line refers to the record start
    y.push_back(s.coeffs[zero + 1 + k] * std::polar(1.0, pw[k] * s.t0));
  }
  hwhm = std::max(hwhm > 0.0 ? hwhm : s.bin_width, 0.25 * s.bin_width);

  RealVector x(4);
  x << 0.0, 0.0, s.peak->refined_omega, hwhm;
  {
    // B enters linearly: least squares for it at the starting (omega0, Gamma).
    Eigen::MatrixXcd a(static_cast<Eigen::Index>(w.size()), 2);
    Eigen::VectorXcd rhs(static_cast<Eigen::Index>(w.size()));
    for (std::size_t k = 0; k < w.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      a(i, 0) = detail::record_line({x(3), w[k] - x(2)}, dt, s.samples);
      a(i, 1) = detail::record_line({x(3), w[k] + x(2)}, dt, s.samples);
      rhs(i) = y[k];
    }
    const Eigen::VectorXcd b = a.colPivHouseholderQr().solve(rhs);
    x(0) = b(0).real();
    x(1) = b(0).imag();
  }

  detail::ComplexLineFunctor f{w, y, dt, s.samples};
  Eigen::NumericalDiff<detail::ComplexLineFunctor> nd(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::ComplexLineFunctor>> lm(nd);
  lm.parameters.xtol = options.step_tolerance;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 10 * options.max_iterations;

  const auto pack = [&](const RealVector& v, int iters) {
    LorentzianFit fit;
    const double record = static_cast<double>(s.samples) * dt;
    fit.amplitude = std::hypot(v(0), v(1)) / record;
    fit.phase = std::atan2(v(1), v(0));
    fit.omega0 = v(2);
    fit.gamma = v(3);
    RealVector r(f.values());
    f(v, r);
    fit.residual = r.norm();
    fit.iterations = iters;
    fit.points = w.size();
    return fit;
  };

  using namespace Eigen::LevenbergMarquardtSpace;
  Status status = lm.minimizeInit(x);
  if (status == ImproperInputParameters) throw ContractError("invalid Lorentzian fit setup");
  int iters = 0;
  do {
    status = lm.minimizeOneStep(x);
    ++iters;
  } while (status == Running && iters < options.max_iterations);

  LorentzianFit fit = pack(x, iters);
  if (status == Running || status == TooManyFunctionEvaluation || !std::isfinite(fit.gamma) ||
      !std::isfinite(fit.omega0)) {
    throw FitError("Lorentzian fit did not converge", fit);
  }
  return fit;
}

}  // namespace qident
