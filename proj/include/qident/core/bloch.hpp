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
#include "qident/core/operators.hpp"
#include "qident/core/types.hpp"

namespace qident {

/// Pauli operators in the measurement basis {|0>, |1>}; sigma_z |0> = |0>.
namespace pauli {
inline Matrix identity() { return Matrix::Identity(2, 2); }
inline Matrix x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
inline Matrix y() {
  Matrix m(2, 2);
  m << Complex(0.0), -kI, kI, Complex(0.0);
  return m;
}
inline Matrix z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
}  // namespace pauli

/// Sense of rotation of the Bloch vector under H = (omega/2) n.sigma:
/// ds/dt = kRotationHandedness * omega * (n x s). Fixed by comparing the
/// Rodrigues rotation against exact propagation of e^{-iHt} (see tests).
inline constexpr double kRotationHandedness = +1.0;

struct BlochVector {
  Vec3 s = Vec3::Zero();

  BlochVector() = default;
  explicit BlochVector(const Vec3& v) : s(v) {
    if (!(s.norm() <= 1.0 + tol::bloch_norm)) throw ContractError("Bloch vector norm exceeds 1");
  }
  BlochVector(double x, double y, double z) : BlochVector(Vec3(x, y, z)) {}

  double x() const { return s.x(); }
  double y() const { return s.y(); }
  double z() const { return s.z(); }
};

/// Qubit Hamiltonian H = (d0 sigma_0 + d.sigma)/2 with
/// d = omega (sin theta cos phi, sin theta sin phi, cos theta).
struct AxisAngles {
  double d0 = 0.0;
  double omega = 0.0;
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // (-pi, pi]
  /// Set when omega vanishes and the axis direction is undefined.
  bool degenerate = false;

  Vec3 cartesian() const {
    return omega * Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
  }
  Vec3 unit_axis() const {
    if (degenerate || omega < tol::degenerate_omega) throw ContractError("rotation axis is undefined for omega = 0");
    return cartesian() / omega;
  }

  static AxisAngles from_cartesian(double d0, const Vec3& d) {
    AxisAngles a;
    a.d0 = d0;
    a.omega = d.norm();
    if (a.omega < tol::degenerate_omega) {
      a.degenerate = true;
      return a;
    }
    a.theta = std::atan2(std::hypot(d.x(), d.y()), d.z());
    a.phi = std::atan2(d.y(), d.x());
    if (a.phi <= -kPi) a.phi += 2.0 * kPi;
    return a;
  }
};

namespace detail {
inline void require_qubit(Eigen::Index dim) {
  if (dim != 2) throw ContractError("operation requires a two-level system");
}
}  // namespace detail

inline BlochVector bloch_from_density(const DensityMatrix& rho) {
  detail::require_qubit(rho.dim());
  const Matrix& m = rho.matrix();
  const Vec3 s((m * pauli::x()).trace().real(), (m * pauli::y()).trace().real(), (m * pauli::z()).trace().real());
  return BlochVector(s);
}

inline DensityMatrix density_from_bloch(const BlochVector& b) {
  if (!(b.s.norm() <= 1.0 + tol::bloch_norm)) throw ContractError("Bloch vector norm exceeds 1");
  const Matrix m = 0.5 * (pauli::identity() + b.x() * pauli::x() + b.y() * pauli::y() + b.z() * pauli::z());
  return DensityMatrix(m);
}

inline AxisAngles axis_angles_from_hamiltonian(const HermitianOperator& h) {
  detail::require_qubit(h.dim());
  const Matrix& m = h.matrix();
  const Vec3 d((m * pauli::x()).trace().real(), (m * pauli::y()).trace().real(), (m * pauli::z()).trace().real());
  return AxisAngles::from_cartesian(m.trace().real(), d);
}

inline HermitianOperator hamiltonian_from_axis_angles(const AxisAngles& a) {
  const Vec3 d = a.degenerate ? Vec3::Zero() : a.cartesian();
  return HermitianOperator(0.5 * (a.d0 * pauli::identity() + d.x() * pauli::x() + d.y() * pauli::y() +
                                  d.z() * pauli::z()));
}

/// Rodrigues rotation of s about the axis direction by `angle`, with the
/// module handedness.
inline BlochVector rotate_bloch(const AxisAngles& axis, double angle, const BlochVector& s) {
  const Vec3 n = axis.unit_axis();
  const double c = std::cos(angle);
  const double sn = kRotationHandedness * std::sin(angle);
  const Vec3 r = s.s * c + n.cross(s.s) * sn + n * n.dot(s.s) * (1.0 - c);
  return BlochVector(r);
}

}  // namespace qident
