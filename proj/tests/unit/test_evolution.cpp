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

#include <random>

#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qident/qident.hpp"

using namespace qident;

namespace {

struct RandomOpenSystem {
  HermitianOperator h;
  LindbladDissipator diss;
  std::vector<oracle::Jump> jumps;
};

RandomOpenSystem random_open_system(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> rate(0.0, 0.5);
  std::vector<DissipatorTerm> terms;
  std::vector<oracle::Jump> jumps;
  for (int k = 0; k < 2; ++k) {
    const Matrix v = oracle::random_operator(rng, n) * 0.7;
    const double g = rate(rng);
    terms.push_back({g, v});
    jumps.push_back({g, v});
  }
  return {HermitianOperator(oracle::random_hermitian(rng, n)), LindbladDissipator(n, terms), jumps};
}

}  // namespace

TEST_CASE("evolve_unitary: zero time and stationary eigenstates", "[core]") {
  std::mt19937_64 rng(7);
  const HermitianOperator h(oracle::random_hermitian(rng, 3));
  const DensityMatrix rho(oracle::random_density(rng, 3));
  CHECK((evolve_unitary(h, rho, 0.0).matrix() - rho.matrix()).norm() < 1e-14);

  const HermitianOperator z(pauli::z());
  const auto zero = DensityMatrix::basis_state(2, 0);
  for (double t : {0.3, 1.0, 17.5}) CHECK((evolve_unitary(z, zero, t).matrix() - zero.matrix()).norm() < 1e-14);

  REQUIRE_THROWS_AS(evolve_unitary(z, DensityMatrix::maximally_mixed(3), 1.0), ContractError);
  REQUIRE_THROWS_AS(evolve_unitary(z, zero, -1.0), ContractError);
}

TEST_CASE("evolve_unitary on the 10-level test Hamiltonian matches RK4", "[core]") {
  const Matrix h = oracle::h_test();
  const auto rho = evolve_unitary(HermitianOperator(h), DensityMatrix::basis_state(10, 0), 1.0);
  Vector psi0 = Vector::Zero(10);
  psi0(0) = 1.0;
  const Vector psi = oracle::schrodinger_rk4(h, psi0, 1.0, 1e-4);
  const Matrix expected = psi * psi.adjoint();
  CHECK((rho.matrix() - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("evolve_lindblad reduces to unitary evolution for an empty dissipator", "[core]") {
  std::mt19937_64 rng(11);
  const HermitianOperator h(oracle::random_hermitian(rng, 3));
  const DensityMatrix rho(oracle::random_density(rng, 3));
  const auto a = evolve_lindblad(h, LindbladDissipator(), rho, 2.3);
  const auto b = evolve_unitary(h, rho, 2.3);
  CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pure dephasing decays coherences at rate gamma/2", "[core]") {
  const double gamma = 0.4;
  Matrix m(2, 2);
  m << 0.6, Complex(0.2, 0.1), Complex(0.2, -0.1), 0.4;
  const DensityMatrix rho(m);
  const auto diss = LindbladDissipator::pure_dephasing(gamma);
  for (double t : {0.5, 2.0, 7.0}) {
    const auto out = evolve_lindblad(HermitianOperator::zero(2), diss, rho, t);
    CHECK(std::abs(out.matrix()(0, 1) - m(0, 1) * std::exp(-gamma * t / 2.0)) < 1e-12);
    CHECK(std::abs(out.matrix()(0, 0) - 0.6) < 1e-12);
    CHECK(std::abs(out.matrix()(1, 1) - 0.4) < 1e-12);
  }
}

TEST_CASE("symmetric relaxation drives z to zero as exp(-2 Gamma t)", "[core]") {
  const double g = 0.15;
  const auto diss = LindbladDissipator::symmetric_relaxation(g);
  const auto rho = density_from_bloch(BlochVector(0.2, -0.1, 0.9));
  for (double t : {0.0, 1.0, 4.0, 20.0}) {
    const double z = bloch_from_density(evolve_lindblad(HermitianOperator::zero(2), diss, rho, t)).z();
    CHECK(std::abs(z - 0.9 * std::exp(-2.0 * g * t)) < 1e-12);
  }
}

TEST_CASE("Lindblad propagation matches adaptive ODE integration", "[core]") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> time(0.1, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 2 + trial % 2;
    const auto sys = random_open_system(rng, n);
    const DensityMatrix rho(oracle::random_density(rng, n));
    const double t = time(rng);
    const auto out = evolve_lindblad(sys.h, sys.diss, rho, t);
    const Matrix ref = oracle::master_equation_dopri5(sys.h.matrix(), sys.jumps, rho.matrix(), t);
    CHECK((out.matrix() - ref).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("evolution invariants on random instances", "[core]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> time(0.0, 5.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 2 + trial % 3;
    const auto sys = random_open_system(rng, n);
    const DensityMatrix rho(oracle::random_density(rng, n));
    const double t1 = time(rng);
    const double t2 = time(rng);

    const auto u = evolve_unitary(sys.h, rho, t1);
    CHECK(std::abs(u.trace() - 1.0) < 1e-9);
    CHECK(std::abs(u.purity() - rho.purity()) < 1e-9);
    const auto u12 = evolve_unitary(sys.h, evolve_unitary(sys.h, rho, t1), t2);
    CHECK((u12.matrix() - evolve_unitary(sys.h, rho, t1 + t2).matrix()).cwiseAbs().maxCoeff() < 1e-9);

    const auto l = evolve_lindblad(sys.h, sys.diss, rho, t1);
    CHECK(std::abs(l.trace() - 1.0) < 1e-9);
    CHECK(l.min_eigenvalue() >= -1e-8);
    const auto l12 = evolve_lindblad(sys.h, sys.diss, evolve_lindblad(sys.h, sys.diss, rho, t1), t2);
    CHECK((l12.matrix() - evolve_lindblad(sys.h, sys.diss, rho, t1 + t2).matrix()).cwiseAbs().maxCoeff() < 1e-9);

    const Propagator prop(sys.h, sys.diss);
    CHECK((prop.evolve(rho, t1).matrix() - l.matrix()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("qubit z(t) from |0> follows cos^2 + sin^2 cos(omega t)", "[core]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> om(0.1, 5.0);
  std::uniform_real_distribution<double> ang(0.0, kPi);
  std::uniform_real_distribution<double> time(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    AxisAngles a;
    a.omega = om(rng);
    a.theta = ang(rng);
    a.phi = 2.0 * ang(rng) - kPi;
    const double t = time(rng);
    const auto rho = evolve_unitary(hamiltonian_from_axis_angles(a), DensityMatrix::basis_state(2, 0), t);
    CHECK(std::abs(bloch_from_density(rho).z() - oracle::z_axis_start(a.omega, a.theta, t)) < 1e-10);
  }
}
