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

#include <numeric>
#include <random>

#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qident/qident.hpp"

using namespace qident;

namespace {

std::vector<double> grid(double dt, int k) {
  std::vector<double> t(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) t[static_cast<std::size_t>(i)] = i * dt;
  return t;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

/// The plane printed alongside the test Hamiltonian, orthonormalized.
Matrix printed_plane() {
  Eigen::MatrixXd v(10, 2);
  v.col(0) << 1, -0.0001, 0.0004, 0.0034, -0.0012, -0.0002, -0.0005, -0.0004, 0.0003, -0.0005;
  v.col(1) << 0, 1, 0.0174, 0.0238, -0.0131, -0.0051, -0.0032, -0.0020, -0.0022, -0.0013;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  return Matrix(qr.householderQ() * Eigen::MatrixXd::Identity(10, 2)).cast<Complex>();
}

}  // namespace

TEST_CASE("leakage vanishes for an invariant subspace", "[core]") {
  Matrix h = Matrix::Zero(4, 4);
  h.topLeftCorner(2, 2) = pauli::x();
  h.bottomRightCorner(2, 2) = 3.0 * pauli::z() + pauli::x();
  const auto p = HermitianOperator::basis_projector(4, {0, 1});
  for (double v : subspace_leak_curve(HermitianOperator(h), p, 0, grid(0.1, 100))) CHECK(v < 1e-14);
  REQUIRE_THROWS_AS(subspace_leak_probability(HermitianOperator(h), HermitianOperator(2.0 * p.matrix()), 0, 1.0),
                    ContractError);
}

TEST_CASE("average leakage of the 10-level test Hamiltonian", "[core]") {
  const HermitianOperator h(oracle::h_test());
  const auto p = HermitianOperator::basis_projector(10, {0, 1});
  const auto t = grid(0.01, 10000);
  const auto curve = subspace_leak_curve(h, p, 0, t);
  CHECK(mean(curve) == Catch::Approx(0.0011).margin(0.0002));

  const auto pops = oracle::populations_from_zero(oracle::h_test(), {0.5, 13.0, 77.7});
  const std::vector<double> probe{0.5, 13.0, 77.7};
  for (std::size_t i = 0; i < probe.size(); ++i) {
    CHECK(std::abs(subspace_leak_probability(h, p, 0, probe[i]) - (1.0 - pops[i][0] - pops[i][1])) < 1e-12);
  }
}

TEST_CASE("weak coupling leaks at second order", "[core]") {
  const double eps = 0.01;
  Matrix h(3, 3);
  h << 1, 1, eps, 1, 1, 0, eps, 0, 2;
  const HermitianOperator hop(h);
  const auto p = HermitianOperator::basis_projector(3, {0, 1});
  Vector psi0 = Vector::Zero(3);
  psi0(0) = 1.0;
  for (double t : {0.02, 0.05, 0.1}) {
    const double leak = subspace_leak_probability(hop, p, 0, t);
    const Vector psi = oracle::schrodinger_rk4(h, psi0, t, 1e-4);
    CHECK(std::abs(leak - std::norm(psi(2))) < 1e-12);
    // |<2|psi(t)>|^2 ~ (eps t)^2 for small t
    CHECK(leak / (eps * eps * t * t) == Catch::Approx(1.0).margin(0.02));
  }
}

TEST_CASE("best-fit plane of an embedded two-level system", "[core]") {
  Matrix h = Matrix::Identity(10, 10) * 5.0;
  h.topLeftCorner(2, 2) = pauli::x() + 0.3 * pauli::z();
  const auto fit = best_fit_2d_subspace(HermitianOperator(h), 0, grid(0.05, 400));
  REQUIRE_FALSE(fit.degenerate);
  CHECK((fit.basis.bottomRows(8)).norm() < 1e-10);
  const Matrix e01 = Matrix::Identity(10, 2);
  CHECK(principal_angles(fit.basis, e01).maxCoeff() < 1e-6);

  const auto flat = best_fit_2d_subspace(HermitianOperator(Matrix(Matrix::Identity(3, 3))), 1, grid(0.1, 20));
  CHECK(flat.degenerate);
  CHECK(flat.basis.cols() == 1);
}

TEST_CASE("best-fit plane of the 10-level test Hamiltonian", "[core]") {
  const HermitianOperator h(oracle::h_test());
  const auto t = grid(0.01, 10000);
  const auto fit = best_fit_2d_subspace(h, 0, t);
  REQUIRE_FALSE(fit.degenerate);
  const double s2 = mean_subspace_confinement(h, 0, t, fit.basis);
  const double s1 = mean_subspace_confinement(h, 0, t, Matrix::Identity(10, 2));
  CHECK(s2 == Catch::Approx(0.9994).margin(0.0002));
  CHECK(s1 == Catch::Approx(0.9989).margin(0.0002));
  CHECK(s2 >= s1);

  // The printed plane agrees in its leading direction; its second vector is
  // off by about 0.024 rad, and it confines the trajectory less than the
  // computed best fit does.
  const Matrix printed = printed_plane();
  const RealVector angles = principal_angles(fit.basis, printed);
  CHECK(angles.minCoeff() < 0.01);
  CHECK(angles.maxCoeff() == Catch::Approx(0.0239).margin(0.002));
  CHECK(mean_subspace_confinement(h, 0, t, printed) < s2);
}
