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

#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qident/qident.hpp"

using namespace qident;

namespace {

std::vector<std::uint64_t> tally(const DensityMatrix& rho, const MeasurementBasis& basis, std::uint64_t draws,
                                 std::uint64_t seed) {
  std::vector<std::uint64_t> counts(basis.size(), 0);
  for (std::uint64_t i = 0; i < draws; ++i) {
    CounterRng rng(derive_seed(seed, i));
    ++counts[sample_measurement(rho, basis, rng).index];
  }
  return counts;
}

}  // namespace

TEST_CASE("eigenstate measurement is certain and leaves the state unchanged", "[device]") {
  const MeasurementBasis basis{HermitianOperator(pauli::z())};
  REQUIRE(basis.size() == 2);
  CHECK(basis.values() == std::vector<double>{1.0, -1.0});
  CounterRng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto out = sample_measurement(DensityMatrix::basis_state(2, 0), basis, rng);
    CHECK(out.index == 0);
    CHECK(out.value == 1.0);
    CHECK((out.post_state.matrix() - DensityMatrix::basis_state(2, 0).matrix()).norm() < 1e-15);
  }
}

TEST_CASE("Born-rule frequencies of superposed and mixed states", "[device]") {
  const MeasurementBasis basis{HermitianOperator(pauli::z())};
  const std::uint64_t n = 100000;

  const auto plus = density_from_bloch(BlochVector(1, 0, 0));
  const auto c = tally(plus, basis, n, 42);
  CHECK(oracle::binomial_consistent(static_cast<double>(c[0]) / n, 0.5, n));
  CHECK(oracle::chi_square_pvalue(c, {0.5, 0.5}) > 1e-3);

  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 0.2;
  m(1, 1) = 0.8;
  const auto d = tally(DensityMatrix(m), basis, n, 43);
  CHECK(oracle::binomial_consistent(static_cast<double>(d[0]) / n, 0.2, n));
  CHECK(oracle::binomial_consistent(static_cast<double>(d[1]) / n, 0.8, n));
}

TEST_CASE("post-measurement state is the normalized projection", "[device]") {
  const MeasurementBasis basis{HermitianOperator(pauli::z())};
  const auto rho = density_from_bloch(BlochVector(0.3, 0.4, 0.5));
  CounterRng rng(9);
  for (int i = 0; i < 20; ++i) {
    const auto out = sample_measurement(rho, basis, rng);
    const Matrix& p = basis.projectors()[out.index];
    const Matrix expect = p * rho.matrix() * p / (p * rho.matrix()).trace().real();
    CHECK((out.post_state.matrix() - expect).norm() < 1e-14);
  }
}

TEST_CASE("degenerate eigenvalues share one outcome", "[device]") {
  Matrix a = Matrix::Zero(3, 3);
  a.diagonal() << 1.0, -1.0, -1.0;
  const MeasurementBasis basis{HermitianOperator(a)};
  REQUIRE(basis.size() == 2);
  CHECK(basis.values()[0] == Catch::Approx(1.0));
  CHECK(basis.projectors()[1].trace().real() == Catch::Approx(2.0));

  // Collapse keeps coherence inside the degenerate eigenspace.
  Vector psi(3);
  psi << 0.0, 1.0, Complex(0.0, 1.0);
  psi.normalize();
  CounterRng rng(5);
  const auto out = sample_measurement(DensityMatrix::pure(psi), basis, rng);
  CHECK(out.index == 1);
  CHECK(out.post_state.purity() == Catch::Approx(1.0));
}

TEST_CASE("subspace-restricted measurement lumps the complement", "[device]") {
  Matrix a = -Matrix::Identity(4, 4);
  a(0, 0) = 1.0;
  const MeasurementBasis basis{HermitianOperator(a)};
  const auto r = basis.restricted_to_subspace(HermitianOperator::basis_projector(4, {0, 1}));
  REQUIRE(r.size() == 3);
  CHECK(r.values()[0] == 1.0);
  CHECK(r.values()[1] == -1.0);
  CHECK(std::isnan(r.values()[2]));
  CHECK(r.complement_index() == 2);
  CHECK(r.projectors()[2].trace().real() == Catch::Approx(2.0));
  CHECK(basis.complement_index() == basis.size());

  REQUIRE_THROWS_AS(MeasurementBasis(HermitianOperator(pauli::x())).restricted_to_subspace(
                        HermitianOperator::basis_projector(2, {0})),
                    ContractError);
}

TEST_CASE("counter-based substreams are reproducible and distinct", "[device]") {
  CounterRng a(derive_seed(7, 3));
  CounterRng b(derive_seed(7, 3));
  CounterRng c(derive_seed(7, 4));
  for (int i = 0; i < 10; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u != c.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}
