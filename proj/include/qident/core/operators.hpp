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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qident/core/error.hpp"
#include "qident/core/types.hpp"

namespace qident {

namespace detail {

inline std::string index_pair(Eigen::Index i, Eigen::Index j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ContractError(std::string(what) + " must be a non-empty square matrix");
  }
}

/// Locates the entry pair with the largest Hermiticity defect.
inline std::pair<Eigen::Index, Eigen::Index> worst_conjugate_pair(const Matrix& m, double& defect) {
  defect = 0.0;
  std::pair<Eigen::Index, Eigen::Index> worst{0, 0};
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      const double d = std::abs(m(i, j) - std::conj(m(j, i)));
      if (d > defect) {
        defect = d;
        worst = {i, j};
      }
    }
  }
  return worst;
}

}  // namespace detail

/// Hermitian N x N operator (Hamiltonians, observables, projectors).
/// Hermiticity is checked at construction and the stored matrix is
/// exactly symmetrized afterwards.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  explicit HermitianOperator(Matrix m) : m_(std::move(m)) {
    detail::require_square(m_, "Hermitian operator");
    double defect = 0.0;
    const auto [i, j] = detail::worst_conjugate_pair(m_, defect);
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if (!(defect <= tol::hermitian * scale)) {
      throw ContractError("operator is not Hermitian: entries " + detail::index_pair(i, j) + " and " +
                          detail::index_pair(j, i) + " are not complex conjugates");
    }
    m_ = (0.5 * (m_ + m_.adjoint())).eval();
  }

  static HermitianOperator zero(Eigen::Index n) { return HermitianOperator(Matrix::Zero(n, n)); }
  static HermitianOperator identity(Eigen::Index n) { return HermitianOperator(Matrix::Identity(n, n)); }

  /// Projector onto the span of the given computational basis states.
  static HermitianOperator basis_projector(Eigen::Index n, const std::vector<Eigen::Index>& indices) {
    Matrix p = Matrix::Zero(n, n);
    for (auto k : indices) {
      if (k < 0 || k >= n) throw ContractError("basis index out of range");
      p(k, k) = 1.0;
    }
    return HermitianOperator(std::move(p));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

  bool is_projector(double tolerance = tol::projector) const {
    return (m_ * m_ - m_).cwiseAbs().maxCoeff() <= tolerance;
  }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw ContractError("dimension mismatch in operator sum");
    return HermitianOperator(a.m_ + b.m_);
  }
  friend HermitianOperator operator*(double s, const HermitianOperator& a) { return HermitianOperator(s * a.m_); }

 private:
  Matrix m_;
};

/// Positive, unit-trace state.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {
    detail::require_square(m_, "density matrix");
    double defect = 0.0;
    detail::worst_conjugate_pair(m_, defect);
    if (!(defect <= tol::hermitian)) throw ContractError("density matrix is not Hermitian");
    m_ = (0.5 * (m_ + m_.adjoint())).eval();
    const double tr = m_.trace().real();
    if (!(std::abs(tr - 1.0) <= tol::trace)) {
      throw ContractError("density matrix trace " + std::to_string(tr) + " differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::positivity) {
      throw ContractError("density matrix has a negative eigenvalue");
    }
  }

  /// Wraps the output of a trace-preserving propagation. Symmetrizes but
  /// skips the eigenvalue check, which dominates cost in shot loops.
  static DensityMatrix from_propagated(const Matrix& m) {
    DensityMatrix out;
    out.m_ = 0.5 * (m + m.adjoint());
    return out;
  }

  static DensityMatrix pure(const Vector& psi) {
    const double n = psi.norm();
    if (!(n > 0.0)) throw ContractError("zero state vector");
    const Vector u = psi / n;
    return from_propagated(u * u.adjoint());
  }

  static DensityMatrix basis_state(Eigen::Index n, Eigen::Index k) {
    if (k < 0 || k >= n) throw ContractError("basis index out of range");
    Matrix m = Matrix::Zero(n, n);
    m(k, k) = 1.0;
    return from_propagated(m);
  }

  static DensityMatrix maximally_mixed(Eigen::Index n) {
    if (n <= 0) throw ContractError("dimension must be positive");
    return from_propagated(Matrix::Identity(n, n) / static_cast<double>(n));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double trace() const { return m_.trace().real(); }
  double purity() const { return (m_ * m_).trace().real(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  Matrix m_;
};

/// One term rate * D[V] of a Lindblad dissipator.
struct DissipatorTerm {
  double rate = 0.0;
  Matrix op;
};

/// Markovian dissipator sum_k rate_k D[V_k], with D[A]B = A B A^+ - {A^+A, B}/2.
/// An optional basis unitary U replaces every V_k by U V_k U^+.
class LindbladDissipator {
 public:
  LindbladDissipator() = default;

  LindbladDissipator(Eigen::Index dim, std::vector<DissipatorTerm> terms,
                     std::optional<Matrix> basis_unitary = std::nullopt)
      : dim_(dim), terms_(std::move(terms)), basis_(std::move(basis_unitary)) {
    if (dim_ <= 0) throw ContractError("dissipator dimension must be positive");
    if (static_cast<Eigen::Index>(terms_.size()) > dim_ * dim_ - 1) {
      throw ContractError("at most N^2-1 dissipator terms are allowed");
    }
    for (const auto& t : terms_) {
      if (!(t.rate >= 0.0) || !std::isfinite(t.rate)) throw ContractError("dissipation rates must be non-negative");
      if (t.op.rows() != dim_ || t.op.cols() != dim_) throw ContractError("dissipator operator dimension mismatch");
    }
    if (basis_) {
      if (basis_->rows() != dim_ || basis_->cols() != dim_) throw ContractError("basis unitary dimension mismatch");
      const Matrix defect = (*basis_) * basis_->adjoint() - Matrix::Identity(dim_, dim_);
      if (defect.cwiseAbs().maxCoeff() > 1e-10) throw ContractError("basis change is not unitary");
    }
  }

  /// sigma_- = (sigma_x + i sigma_y)/2 = |0><1|.
  static Matrix sigma_minus() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
  }
  /// sigma_+ = (sigma_x - i sigma_y)/2 = |1><0|.
  static Matrix sigma_plus() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
  }
  static Matrix half_sigma_z() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 0.5;
    m(1, 1) = -0.5;
    return m;
  }

  /// Qubit dissipator from the elementary relaxation operators:
  /// gamma_minus D[sigma_-] + gamma_plus D[sigma_+] + gamma_dephasing D[sigma_z/2].
  static LindbladDissipator qubit(double gamma_plus, double gamma_minus, double gamma_dephasing,
                                  std::optional<Matrix> basis_unitary = std::nullopt) {
    std::vector<DissipatorTerm> terms;
    if (gamma_minus > 0.0) terms.push_back({gamma_minus, sigma_minus()});
    if (gamma_plus > 0.0) terms.push_back({gamma_plus, sigma_plus()});
    if (gamma_dephasing > 0.0) terms.push_back({gamma_dephasing, half_sigma_z()});
    for (double g : {gamma_plus, gamma_minus, gamma_dephasing}) {
      if (!(g >= 0.0)) throw ContractError("dissipation rates must be non-negative");
    }
    return LindbladDissipator(2, std::move(terms), std::move(basis_unitary));
  }

  static LindbladDissipator pure_dephasing(double gamma, std::optional<Matrix> basis_unitary = std::nullopt) {
    return qubit(0.0, 0.0, gamma, std::move(basis_unitary));
  }
  static LindbladDissipator symmetric_relaxation(double gamma) { return qubit(gamma, gamma, 0.0); }

  Eigen::Index dim() const { return dim_; }
  bool empty() const {
    return std::none_of(terms_.begin(), terms_.end(), [](const DissipatorTerm& t) { return t.rate > 0.0; });
  }
  const std::vector<DissipatorTerm>& terms() const { return terms_; }
  const std::optional<Matrix>& basis_unitary() const { return basis_; }

  /// Jump operator k with the basis change applied.
  Matrix effective_operator(std::size_t k) const {
    const Matrix& v = terms_.at(k).op;
    return basis_ ? Matrix((*basis_) * v * basis_->adjoint()) : v;
  }

 private:
  Eigen::Index dim_ = 0;
  std::vector<DissipatorTerm> terms_;
  std::optional<Matrix> basis_;
};

/// A control setting names a table entry or gives a control vector for the
/// linear form H_0 + sum_m f_m H_m.
using ControlSetting = std::variant<std::string, std::vector<double>>;

inline std::string describe(const ControlSetting& s) {
  if (const auto* label = std::get_if<std::string>(&s)) return *label;
  std::string out = "[";
  const auto& f = std::get<std::vector<double>>(s);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(f[i]);
  }
  return out + "]";
}

struct LinearControlForm {
  HermitianOperator h0;
  std::vector<HermitianOperator> controls;
};

struct ControlTableEntry {
  HermitianOperator hamiltonian;
  /// Control values this entry was realized at; empty when unknown.
  std::vector<double> control;
};

using ControlTable = std::map<std::string, ControlTableEntry>;

/// Family of Hamiltonians indexed by piecewise-constant control settings.
class ControlledHamiltonian {
 public:
  ControlledHamiltonian() = default;

  explicit ControlledHamiltonian(LinearControlForm form) : form_(std::move(form)) {
    const auto& lin = std::get<LinearControlForm>(form_);
    dim_ = lin.h0.dim();
    for (const auto& h : lin.controls) {
      if (h.dim() != dim_) throw ContractError("control Hamiltonians must share the drift dimension");
    }
  }

  explicit ControlledHamiltonian(ControlTable table) : form_(std::move(table)) {
    const auto& t = std::get<ControlTable>(form_);
    if (t.empty()) throw ContractError("control table is empty");
    dim_ = t.begin()->second.hamiltonian.dim();
    for (const auto& [label, entry] : t) {
      if (entry.hamiltonian.dim() != dim_) throw ContractError("table entry '" + label + "' has the wrong dimension");
    }
  }

  /// Single fixed Hamiltonian, stored as a one-entry table.
  static ControlledHamiltonian fixed(const std::string& label, HermitianOperator h) {
    ControlTable t;
    t.emplace(label, ControlTableEntry{std::move(h), {}});
    return ControlledHamiltonian(std::move(t));
  }

  Eigen::Index dim() const { return dim_; }
  bool is_linear() const { return std::holds_alternative<LinearControlForm>(form_); }
  const ControlTable* table() const { return std::get_if<ControlTable>(&form_); }
  const LinearControlForm* linear() const { return std::get_if<LinearControlForm>(&form_); }

  bool resolves(const ControlSetting& s) const {
    if (const auto* label = std::get_if<std::string>(&s)) {
      const auto* t = table();
      return t && t->count(*label) > 0;
    }
    const auto* lin = linear();
    return lin && std::get<std::vector<double>>(s).size() == lin->controls.size();
  }

  HermitianOperator at(const ControlSetting& s) const {
    if (const auto* label = std::get_if<std::string>(&s)) {
      const auto* t = table();
      if (!t) throw ContractError("control label '" + *label + "' used with a linear control form");
      auto it = t->find(*label);
      if (it == t->end()) throw ContractError("unknown control label '" + *label + "'");
      return it->second.hamiltonian;
    }
    const auto& f = std::get<std::vector<double>>(s);
    const auto* lin = linear();
    if (!lin) throw ContractError("control vector used with a table-form Hamiltonian");
    if (f.size() != lin->controls.size()) throw ContractError("control vector has the wrong length");
    Matrix h = lin->h0.matrix();
    for (std::size_t m = 0; m < f.size(); ++m) h += f[m] * lin->controls[m].matrix();
    return HermitianOperator(std::move(h));
  }

  /// Control vector associated with a setting (the vector itself, or the
  /// value recorded in the table).
  std::vector<double> control_values(const ControlSetting& s) const {
    if (const auto* f = std::get_if<std::vector<double>>(&s)) return *f;
    const auto* t = table();
    if (!t) return {};
    auto it = t->find(std::get<std::string>(s));
    return it == t->end() ? std::vector<double>{} : it->second.control;
  }

 private:
  std::variant<LinearControlForm, ControlTable> form_;
  Eigen::Index dim_ = 0;
};

}  // namespace qident
