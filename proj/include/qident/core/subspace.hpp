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
#include <span>
#include <vector>

#include "qident/core/error.hpp"
#include "qident/core/evolution.hpp"
#include "qident/core/operators.hpp"

namespace qident {

namespace detail {
inline Vector basis_vector(Eigen::Index n, Eigen::Index k) {
  if (k < 0 || k >= n) throw ContractError("initial basis index out of range");
  Vector v = Vector::Zero(n);
  v(k) = 1.0;
  return v;
}
}  // namespace detail

/// Exact leakage curve 1 - Tr[P rho(t)] for rho(0) = |psi0><psi0|.
inline std::vector<double> subspace_leak_curve(const HermitianOperator& h, const HermitianOperator& projector,
                                               Eigen::Index psi0, std::span<const double> times) {
  if (projector.dim() != h.dim()) throw ContractError("projector and Hamiltonian dimensions differ");
  if (!projector.is_projector()) throw ContractError("subspace operator is not a projector");
  const UnitaryPropagator prop(h);
  const Vector start = detail::basis_vector(h.dim(), psi0);
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    const Vector psi = prop.evolve(start, t);
    const double inside = psi.dot(projector.matrix() * psi).real();
    out.push_back(std::clamp(1.0 - inside, 0.0, 1.0));
  }
  return out;
}

inline double subspace_leak_probability(const HermitianOperator& h, const HermitianOperator& projector,
                                        Eigen::Index psi0, double t) {
  const double times[] = {t};
  return subspace_leak_curve(h, projector, psi0, times).front();
}

struct SubspaceFit {
  /// Orthonormal columns; two unless the trajectory is degenerate.
  Matrix basis;
  bool degenerate = false;
  RealVector singular_values;
};

/// Best rank-2 approximation of the trajectory e^{-iHt_k}|psi0>: its two
/// leading left singular vectors, obtained from the N x N Gram matrix.
inline SubspaceFit best_fit_2d_subspace(const HermitianOperator& h, Eigen::Index psi0,
                                        std::span<const double> times) {
  if (times.size() < 2) throw ContractError("at least two time points are required");
  const Eigen::Index n = h.dim();
  const UnitaryPropagator prop(h);
  const Vector start = detail::basis_vector(n, psi0);
  Matrix gram = Matrix::Zero(n, n);
  for (double t : times) {
    const Vector psi = prop.evolve(start, t);
    gram.noalias() += psi * psi.adjoint();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  SubspaceFit fit;
  const RealVector ev = es.eigenvalues().reverse().cwiseMax(0.0);
  fit.singular_values = ev.cwiseSqrt();
  const Matrix vecs = es.eigenvectors().rowwise().reverse();
  if (n < 2 || ev(1) <= 1e-20 * std::max(ev(0), 1e-300)) {
    fit.degenerate = true;
    fit.basis = vecs.leftCols(1);
  } else {
    fit.basis = vecs.leftCols(2);
  }
  return fit;
}

/// Time-averaged weight of the trajectory inside span(basis) (orthonormal
/// columns).
inline double mean_subspace_confinement(const HermitianOperator& h, Eigen::Index psi0, std::span<const double> times,
                                        const Matrix& basis) {
  if (times.empty()) throw ContractError("empty time grid");
  if (basis.rows() != h.dim()) throw ContractError("basis and Hamiltonian dimensions differ");
  const UnitaryPropagator prop(h);
  const Vector start = detail::basis_vector(h.dim(), psi0);
  double acc = 0.0;
  for (double t : times) acc += (basis.adjoint() * prop.evolve(start, t)).squaredNorm();
  return acc / static_cast<double>(times.size());
}

/// Principal angles between the column spans of two orthonormal bases.
inline RealVector principal_angles(const Matrix& a, const Matrix& b) {
  Eigen::JacobiSVD<Matrix> svd(a.adjoint() * b);
  RealVector s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::acos(std::clamp(s(i), -1.0, 1.0));
  return s;
}

}  // namespace qident
