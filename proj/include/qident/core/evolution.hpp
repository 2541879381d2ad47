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
#include <optional>

#include <unsupported/Eigen/MatrixFunctions>

#include "qident/core/error.hpp"
#include "qident/core/operators.hpp"
#include "qident/core/types.hpp"

namespace qident {

namespace detail {

inline void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ContractError("evolution time must be finite and non-negative");
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Column-stacking vectorization.
inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix unvec(const Vector& v, Eigen::Index n) { return Eigen::Map<const Matrix>(v.data(), n, n); }

}  // namespace detail

/// Diagonalizes H once and applies e^{-iHt} (.) e^{+iHt} for any t.
class UnitaryPropagator {
 public:
  explicit UnitaryPropagator(const HermitianOperator& h) : es_(h.matrix()) {}

  Eigen::Index dim() const { return es_.eigenvectors().rows(); }
  const RealVector& energies() const { return es_.eigenvalues(); }
  const Matrix& eigenvectors() const { return es_.eigenvectors(); }

  Matrix unitary(double t) const {
    const Vector phases = (-kI * t * es_.eigenvalues().cast<Complex>()).array().exp().matrix();
    return es_.eigenvectors() * phases.asDiagonal() * es_.eigenvectors().adjoint();
  }

  Vector evolve(const Vector& psi, double t) const {
    detail::require_time(t);
    const Vector phases = (-kI * t * es_.eigenvalues().cast<Complex>()).array().exp().matrix();
    return es_.eigenvectors() * (phases.asDiagonal() * (es_.eigenvectors().adjoint() * psi));
  }

  DensityMatrix evolve(const DensityMatrix& rho, double t) const {
    detail::require_time(t);
    if (rho.dim() != dim()) throw ContractError("state and Hamiltonian dimensions differ");
    const Matrix u = unitary(t);
    return DensityMatrix::from_propagated(u * rho.matrix() * u.adjoint());
  }

 private:
  Eigen::SelfAdjointEigenSolver<Matrix> es_;
};

/// e^{-iHt} rho e^{+iHt}.
inline DensityMatrix evolve_unitary(const HermitianOperator& h, const DensityMatrix& rho, double t) {
  if (h.dim() != rho.dim()) throw ContractError("state and Hamiltonian dimensions differ");
  return UnitaryPropagator(h).evolve(rho, t);
}

/// Generator of d vec(rho)/dt for the column-stacked density matrix.
inline Matrix lindblad_superoperator(const HermitianOperator& h, const LindbladDissipator& diss) {
  const Eigen::Index n = h.dim();
  if (!diss.terms().empty() && diss.dim() != n) throw ContractError("dissipator and Hamiltonian dimensions differ");
  const Matrix id = Matrix::Identity(n, n);
  // vec(A X B) = (B^T kron A) vec(X)
  Matrix l = -kI * (detail::kron(id, h.matrix()) - detail::kron(h.matrix().transpose(), id));
  for (std::size_t k = 0; k < diss.terms().size(); ++k) {
    const double rate = diss.terms()[k].rate;
    if (rate == 0.0) continue;
    const Matrix v = diss.effective_operator(k);
    const Matrix vdv = v.adjoint() * v;
    l += rate * (detail::kron(v.conjugate(), v) - 0.5 * detail::kron(id, vdv) - 0.5 * detail::kron(vdv.transpose(), id));
  }
  return l;
}

/// exp(t L)[rho] by scaling-and-squaring exponentiation of the dense
/// N^2 x N^2 generator.
inline DensityMatrix evolve_lindblad(const HermitianOperator& h, const LindbladDissipator& diss,
                                     const DensityMatrix& rho, double t) {
  detail::require_time(t);
  if (h.dim() != rho.dim()) throw ContractError("state and Hamiltonian dimensions differ");
  const Matrix l = lindblad_superoperator(h, diss);
  const Matrix p = (t * l).exp();
  return DensityMatrix::from_propagated(detail::unvec(p * detail::vec(rho.matrix()), rho.dim()));
}

/// Propagator for a fixed generator, reused across many evolution times.
/// Unitary generators use the Hamiltonian eigenbasis. Dissipative ones use
/// an eigendecomposition of the Liouvillian when it is well conditioned and
/// fall back to a fresh matrix exponential otherwise.
class Propagator {
 public:
  Propagator(const HermitianOperator& h, const LindbladDissipator& diss) : dim_(h.dim()) {
    if (diss.empty()) {
      unitary_.emplace(h);
      return;
    }
    generator_ = lindblad_superoperator(h, diss);
    Eigen::ComplexEigenSolver<Matrix> es(generator_);
    if (es.info() == Eigen::Success) {
      const Matrix& v = es.eigenvectors();
      Eigen::PartialPivLU<Matrix> lu(v);
      const Matrix vinv = lu.inverse();
      const double scale = std::max(1.0, generator_.cwiseAbs().maxCoeff());
      const double recon = (v * es.eigenvalues().asDiagonal() * vinv - generator_).cwiseAbs().maxCoeff();
      const double cond = v.cwiseAbs().maxCoeff() * vinv.cwiseAbs().maxCoeff() * static_cast<double>(v.rows());
      if (recon <= 1e-11 * scale && cond < 1e6) {
        modes_ = es.eigenvectors();
        inv_modes_ = vinv;
        rates_ = es.eigenvalues();
      }
    }
  }

  Eigen::Index dim() const { return dim_; }
  bool is_unitary() const { return unitary_.has_value(); }

  DensityMatrix evolve(const DensityMatrix& rho, double t) const {
    detail::require_time(t);
    if (rho.dim() != dim_) throw ContractError("state and generator dimensions differ");
    if (unitary_) return unitary_->evolve(rho, t);
    const Vector v = detail::vec(rho.matrix());
    Vector out;
    if (rates_.size() > 0) {
      const Vector growth = (t * rates_).array().exp().matrix();
      out = modes_ * (growth.asDiagonal() * (inv_modes_ * v));
    } else {
      out = (t * generator_).exp() * v;
    }
    return DensityMatrix::from_propagated(detail::unvec(out, dim_));
  }

 private:
  Eigen::Index dim_;
  std::optional<UnitaryPropagator> unitary_;
  Matrix generator_;
  Matrix modes_;
  Matrix inv_modes_;
  Vector rates_;
};

}  // namespace qident
