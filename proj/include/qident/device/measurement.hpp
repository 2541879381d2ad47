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
#include <cstddef>
#include <vector>

#include "qident/core/error.hpp"
#include "qident/core/operators.hpp"
#include "qident/core/types.hpp"
#include "qident/device/rng.hpp"

namespace qident {

/// Spectral data of a measured observable: distinct eigenvalues (descending)
/// and the orthogonal projectors onto their eigenspaces.
class MeasurementBasis {
 public:
  MeasurementBasis() = default;

  explicit MeasurementBasis(const HermitianOperator& observable) {
    const Eigen::Index n = observable.dim();
    Eigen::SelfAdjointEigenSolver<Matrix> es(observable.matrix());
    const RealVector ev = es.eigenvalues();
    const Matrix& vecs = es.eigenvectors();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    // Eigen returns ascending eigenvalues; walk backwards to group them.
    Eigen::Index k = n - 1;
    while (k >= 0) {
      Eigen::Index j = k;
      while (j - 1 >= 0 && std::abs(ev(j - 1) - ev(k)) <= tol::degenerate_eigenvalue * scale) --j;
      const Matrix v = vecs.middleCols(j, k - j + 1);
      values_.push_back(ev.segment(j, k - j + 1).mean());
      projectors_.push_back(v * v.adjoint());
      complement_.push_back(false);
      k = j - 1;
    }
    Matrix recon = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < values_.size(); ++i) recon += values_[i] * projectors_[i];
    if ((recon - observable.matrix()).cwiseAbs().maxCoeff() > tol::spectral_reconstruction * scale) {
      throw ContractError("observable eigendecomposition does not reproduce the operator");
    }
  }

  std::size_t size() const { return values_.size(); }
  Eigen::Index dim() const { return projectors_.empty() ? 0 : projectors_.front().rows(); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Matrix>& projectors() const { return projectors_; }
  bool is_complement(std::size_t k) const { return complement_.at(k); }

  /// Index of the lumped complement outcome, or size() when there is none.
  std::size_t complement_index() const {
    auto it = std::find(complement_.begin(), complement_.end(), true);
    return static_cast<std::size_t>(it - complement_.begin());
  }

  /// Measurement that resolves the observable inside range(P) and lumps
  /// everything outside into one extra outcome with projector I - P.
  /// P must commute with every eigenprojector of the observable.
  MeasurementBasis restricted_to_subspace(const HermitianOperator& p) const {
    if (p.dim() != dim()) throw ContractError("projector and observable dimensions differ");
    if (!p.is_projector()) throw ContractError("subspace operator is not a projector");
    const Matrix& pm = p.matrix();
    MeasurementBasis out;
    for (std::size_t k = 0; k < size(); ++k) {
      const Matrix& q = projectors_[k];
      if ((q * pm - pm * q).cwiseAbs().maxCoeff() > tol::projector) {
        throw ContractError("subspace projector is not aligned with the observable eigenbasis");
      }
      const Matrix inside = q * pm;
      if (inside.trace().real() < 0.5) continue;
      out.values_.push_back(values_[k]);
      out.projectors_.push_back(inside);
      out.complement_.push_back(false);
    }
    if (out.values_.empty()) throw ContractError("subspace contains no observable eigenstate");
    const Matrix rest = Matrix::Identity(dim(), dim()) - pm;
    if (rest.trace().real() >= 0.5) {
      out.values_.push_back(std::nan(""));
      out.projectors_.push_back(rest);
      out.complement_.push_back(true);
    }
    return out;
  }

 private:
  std::vector<double> values_;
  std::vector<Matrix> projectors_;
  std::vector<bool> complement_;
};

/// Born probabilities Tr(Pi_n rho), clipped at zero.
inline RealVector outcome_probabilities(const DensityMatrix& rho, const MeasurementBasis& basis) {
  if (rho.dim() != basis.dim()) throw ContractError("state and observable dimensions differ");
  RealVector p(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    p(static_cast<Eigen::Index>(k)) = std::max(0.0, (basis.projectors()[k] * rho.matrix()).trace().real());
  }
  return p;
}

namespace detail {
/// Inverse-CDF draw from unnormalized weights; never lands on a zero weight.
inline std::size_t draw_index(const RealVector& w, double total, double u) {
  const double target = u * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (w(k) <= 0.0) continue;
    last = static_cast<std::size_t>(k);
    acc += w(k);
    if (target < acc) return last;
  }
  return last;
}
}  // namespace detail

struct MeasurementOutcome {
  double value = 0.0;
  std::size_t index = 0;
  DensityMatrix post_state;
};

/// Projective measurement with collapse onto the outcome eigenspace.
inline MeasurementOutcome sample_measurement(const DensityMatrix& rho, const MeasurementBasis& basis,
                                             CounterRng& rng) {
  const RealVector p = outcome_probabilities(rho, basis);
  const double total = p.sum();
  if (!(total > 1e-300)) throw ContractError("all outcome probabilities vanish; state is invalid");
  const std::size_t k = detail::draw_index(p, total, rng.uniform());
  const Matrix& proj = basis.projectors()[k];
  const Matrix post = proj * rho.matrix() * proj / p(static_cast<Eigen::Index>(k));
  return {basis.values()[k], k, DensityMatrix::from_propagated(post)};
}

}  // namespace qident
