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

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qident/qident.hpp"

using namespace qident;

namespace {

double angle_error(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * kPi)); }

}  // namespace

TEST_CASE("omega and theta of an equatorial axis", "[protocols]") {
  const auto dev = fixture::qubit_device(fixture::axis(1.0, kPi / 2.0));
  const TimeGrid g{0.0, 0.01, 2000};
  const auto exact = estimate_omega_theta(fixture::exact_z_trace(dev, std::string("f"), g));
  CHECK(std::abs(exact.omega_hat - 1.0) < 1e-8);
  CHECK(std::abs(exact.theta_hat - kPi / 2.0) < 1e-6);

  const auto e = identify_omega_theta(dev, std::string("f"), g, 1000, 5);
  const double bin = 2.0 * kPi / (static_cast<double>(g.size()) * g.dt);
  CHECK(std::abs(e.omega_hat - 1.0) < 0.5 * bin);
  CHECK(std::abs(e.theta_hat - kPi / 2.0) < 0.05);
  CHECK(e.setting == "f");
  CHECK_FALSE(e.phi_hat);
}

TEST_CASE("axis along the measurement axis leaves omega undetermined", "[protocols]") {
  const auto dev = fixture::qubit_device(fixture::axis(1.5, 0.0));
  const auto e = identify_omega_theta(dev, std::string("f"), TimeGrid{0.0, 0.01, 500}, 100, 9);
  CHECK(e.omega_undetermined);
  CHECK(e.theta_hat == 0.0);
}

TEST_CASE("omega and theta of the reference qubit device", "[protocols]") {
  const auto dev = fixture::qubit_device(fixture::axis(2.0086, 1.4780));
  const auto e = identify_omega_theta(dev, std::string("f"), TimeGrid{0.0, 0.01, 2000}, 100, 41);
  CHECK(std::abs(e.omega_hat - 2.0086) < 0.02 * 2.0086);
  CHECK(std::abs(e.theta_hat - 1.4780) < 0.02 * 1.4780);
  CHECK(e.sigma_omega > 0.0);
  CHECK(e.sigma_theta > 0.0);
}

TEST_CASE("theta estimates stay in [0, pi/2]", "[protocols]") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto dev = fixture::qubit_device(fixture::axis(0.5 + 3.0 * u(rng), kPi * u(rng), kPi * u(rng)));
    const auto e = identify_omega_theta(dev, std::string("f"), TimeGrid{0.0, 0.02, 400}, 20, trial);
    CHECK(e.theta_hat >= 0.0);
    CHECK(e.theta_hat <= kPi / 2.0);
  }
}

TEST_CASE("equatorial preparation examples", "[protocols]") {
  const auto half = prepare_equatorial(1.0, kPi / 2.0);
  CHECK(half.alpha0 == Catch::Approx(kPi / 2.0).epsilon(1e-12));
  CHECK(std::abs(std::abs(half.beta) - kPi / 2.0) < 1e-12);

  const auto quarter = prepare_equatorial(1.0, kPi / 4.0);
  CHECK(quarter.alpha0 == Catch::Approx(kPi).epsilon(1e-12));
  CHECK((quarter.s1.s - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK(std::abs(quarter.beta) < 1e-12);

  const auto f = prepare_equatorial(2.0, 3.0 * kPi / 8.0);
  CHECK(f.alpha0 == Catch::Approx(1.7432).margin(1e-4));
  CHECK(f.s1.x() == Catch::Approx(0.41421).margin(1e-5));
  CHECK(f.s1.y() == Catch::Approx(-0.91018).margin(1e-5));
  CHECK(std::abs(f.s1.z()) < 1e-12);
  CHECK(f.beta == Catch::Approx(-1.1437).margin(1e-4));
  CHECK(f.beta == Catch::Approx(f.beta_closed_form).margin(1e-12));
  CHECK(f.duration() == Catch::Approx(f.alpha0 / 2.0));

  // Independent integration of the precession for the same angle.
  const Eigen::Vector3d n(std::sin(3.0 * kPi / 8.0), 0.0, std::cos(3.0 * kPi / 8.0));
  CHECK((oracle::precess(n, 1.0, Eigen::Vector3d(0, 0, 1), f.alpha0) - f.s1.s).norm() < 1e-9);
}

TEST_CASE("equatorial preparation rejects shallow reference axes", "[protocols]") {
  for (double theta : {0.3, kPi / 4.0 - 1e-6, 1.7}) {
    try {
      prepare_equatorial(1.0, theta);
      FAIL("expected an invalid-frame error");
    } catch (const ProtocolError& e) {
      CHECK(e.code() == ProtocolErrorCode::kInvalidFrame);
    }
  }
  REQUIRE_THROWS_AS(prepare_equatorial(0.0, 1.0), ProtocolError);
}

TEST_CASE("prepared states land on the equator", "[protocols]") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> theta(kPi / 4.0, kPi / 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double th = trial == 0 ? kPi / 2.0 : theta(rng);
    const auto f = prepare_equatorial(1.0, th);
    CHECK(std::abs(f.s1.z()) < 1e-6);
    CHECK(std::abs(f.s1.s.norm() - 1.0) < 1e-9);
    CHECK(angle_error(f.beta, f.beta_closed_form) < 1e-9);
  }
}

TEST_CASE("phi equal to beta has no sine term", "[protocols]") {
  const auto frame = prepare_equatorial(1.0, 1.2, std::string("ref"));
  const double theta_f = 0.6;
  const auto dev = fixture::qubit_device({{"ref", fixture::axis(1.0, 1.2)}, {"tgt", fixture::axis(1.5, theta_f, frame.beta)}});
  const auto tr = fixture::exact_z_trace(dev, std::string("tgt"), TimeGrid{0.0, 0.01, 2000}, frame.prepare_step());
  const auto e = estimate_phi(tr, frame, 1.5, theta_f);
  CHECK(std::abs(e.d_hat) < 1e-9);
  CHECK(e.c_hat == Catch::Approx(std::sin(theta_f) * std::cos(theta_f)).margin(1e-9));
  REQUIRE(e.phi_hat);
  CHECK(angle_error(*e.phi_hat, frame.beta) < 1e-4);
}

TEST_CASE("phi of the two-setting example", "[protocols]") {
  const auto dev = fixture::qubit_device({{"ref", fixture::axis(1.0, kPi / 4.0)}, {"tgt", fixture::axis(1.2, kPi / 6.0, kPi / 4.0)}});
  const auto frame = prepare_equatorial(1.0, kPi / 4.0, std::string("ref"));
  const TimeGrid g{0.0, 0.01, 2000};
  const auto e = identify_phi(dev, std::string("tgt"), frame, 1.2, kPi / 6.0, g, 100, 42);
  REQUIRE(e.phi_hat);
  CHECK(std::abs(*e.phi_hat - kPi / 4.0) < 0.02 * kPi);
  CHECK_FALSE(e.phi_ambiguous);
  REQUIRE(e.sigma_phi);
  CHECK(*e.sigma_phi > 0.0);

  const auto exact = estimate_phi(fixture::exact_z_trace(dev, std::string("tgt"), g, frame.prepare_step()), frame, 1.2,
                                  kPi / 6.0);
  CHECK(std::abs(*exact.phi_hat - kPi / 4.0) < 1e-6);
  REQUIRE(exact.phi_first_order);
  CHECK(std::abs(*exact.phi_first_order - kPi / 4.0) < 1e-6);
}

TEST_CASE("phi from noiseless traces for random azimuths", "[protocols]") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double theta_ref = kPi / 4.0 + 0.05 + (kPi / 4.0 - 0.05) * u(rng);
    const double phi = kPi * (0.02 + 0.96 * u(rng));
    const double theta_f = 0.1 + (kPi / 2.0 - 0.2) * u(rng);
    const double omega_f = 0.5 + 2.0 * u(rng);
    const auto dev =
        fixture::qubit_device({{"ref", fixture::axis(1.1, theta_ref)}, {"tgt", fixture::axis(omega_f, theta_f, phi)}});
    const auto frame = prepare_equatorial(1.1, theta_ref, std::string("ref"));
    const auto tr = fixture::exact_z_trace(dev, std::string("tgt"), TimeGrid{0.0, 0.01, 2000}, frame.prepare_step());
    const auto e = estimate_phi(tr, frame, omega_f, theta_f);
    REQUIRE(e.phi_hat);
    CHECK(angle_error(*e.phi_hat, phi) < 1e-6);
    CHECK_FALSE(e.phi_ambiguous);
  }
}

TEST_CASE("phi at the edges of the theta range", "[protocols]") {
  const auto frame = prepare_equatorial(1.0, 1.3, std::string("ref"));
  const auto dev = fixture::qubit_device({{"ref", fixture::axis(1.0, 1.3)}, {"tgt", fixture::axis(1.4, kPi / 2.0, 0.4)}});
  const auto tr = fixture::exact_z_trace(dev, std::string("tgt"), TimeGrid{0.0, 0.01, 2000}, frame.prepare_step());
  const auto e = estimate_phi(tr, frame, 1.4, kPi / 2.0);
  CHECK(e.phi_ambiguous);
  CHECK(e.phi_from_first_order);
  REQUIRE(e.phi_candidates.size() == 2);
  const bool hit = angle_error(e.phi_candidates[0], 0.4) < 1e-6 || angle_error(e.phi_candidates[1], 0.4) < 1e-6;
  CHECK(hit);
  REQUIRE_THROWS_AS(estimate_phi(tr, frame, 1.4, 1e-4), ProtocolError);
}

TEST_CASE("noiseless identification closes the loop", "[protocols]") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const TimeGrid g{0.0, 0.01, 2000};
  for (int trial = 0; trial < 20; ++trial) {
    const auto ref = fixture::axis(0.8 + u(rng), kPi / 4.0 + 0.05 + (kPi / 4.0 - 0.1) * u(rng));
    const auto tgt = fixture::axis(0.5 + 2.5 * u(rng), 0.1 + (kPi / 2.0 - 0.2) * u(rng), kPi * (2.0 * u(rng) - 1.0));
    const auto dev = fixture::qubit_device({{"ref", ref}, {"tgt", tgt}});
    const auto er = estimate_omega_theta(fixture::exact_z_trace(dev, std::string("ref"), g));
    const auto et = estimate_omega_theta(fixture::exact_z_trace(dev, std::string("tgt"), g));
    CHECK(std::abs(er.omega_hat - ref.omega) < 1e-6);
    CHECK(std::abs(er.theta_hat - ref.theta) < 1e-6);
    CHECK(std::abs(et.omega_hat - tgt.omega) < 1e-6);
    CHECK(std::abs(et.theta_hat - tgt.theta) < 1e-6);
    const auto frame = prepare_equatorial(er.omega_hat, er.theta_hat, std::string("ref"));
    const auto tr = fixture::exact_z_trace(dev, std::string("tgt"), g, frame.prepare_step());
    const auto ep = estimate_phi(tr, frame, et.omega_hat, et.theta_hat);
    CHECK(angle_error(*ep.phi_hat, tgt.phi) < 1e-6);
    HamiltonianEstimate full = et;
    full.phi_hat = ep.phi_hat;
    CHECK((full.cartesian() - tgt.cartesian()).norm() < 1e-5);
  }
}

TEST_CASE("estimators improve with more shots and finer grids", "[protocols]") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::uint64_t shots[3] = {30, 300, 3000};
  const TimeGrid grids[3] = {{0.0, 0.02, 1000}, {0.0, 0.01, 2000}, {0.0, 0.005, 4000}};
  double err_omega[3] = {0, 0, 0};
  double err_theta[3] = {0, 0, 0};
  double err_phi[3] = {0, 0, 0};
  for (int trial = 0; trial < 4; ++trial) {
    const auto ref = fixture::axis(1.0, kPi / 3.0);
    const auto tgt = fixture::axis(1.0 + 2.0 * u(rng), 0.3 + 0.9 * u(rng), kPi * (0.1 + 0.8 * u(rng)));
    const auto dev = fixture::qubit_device({{"ref", ref}, {"tgt", tgt}});
    const auto frame = prepare_equatorial(1.0, kPi / 3.0, std::string("ref"));
    for (int level = 0; level < 3; ++level) {
      const auto e = identify_omega_theta(dev, std::string("tgt"), grids[level], shots[level], 100u + trial);
      err_omega[level] += std::abs(e.omega_hat - tgt.omega);
      err_theta[level] += std::abs(e.theta_hat - tgt.theta);
      const auto p = identify_phi(dev, std::string("tgt"), frame, tgt.omega, tgt.theta, grids[level], shots[level],
                                  200u + trial);
      err_phi[level] += angle_error(*p.phi_hat, tgt.phi);
    }
  }
  for (int level = 1; level < 3; ++level) {
    CHECK(err_omega[level] < err_omega[level - 1]);
    CHECK(err_theta[level] < err_theta[level - 1]);
    CHECK(err_phi[level] < err_phi[level - 1]);
  }
}

TEST_CASE("axis table picks a reference and identifies phi for the rest", "[protocols]") {
  const auto dev = fixture::qubit_device({{"a", fixture::axis(1.0, 1.3)},
                                          {"b", fixture::axis(1.5, 0.7, 0.9)},
                                          {"c", fixture::axis(2.0, 0.0)}});
  const std::vector<ControlPoint> points{{std::string("a"), {0.0}}, {std::string("b"), {1.0}}, {std::string("c"), {2.0}}};
  const AxisTable t = identify_axis_table(dev, points, TimeGrid{0.0, 0.01, 2000}, 400, 3);
  CHECK(t.reference == 0);
  CHECK(*t.estimates[0].phi_hat == 0.0);
  REQUIRE(t.estimates[1].phi_hat);
  CHECK(angle_error(*t.estimates[1].phi_hat, 0.9) < 0.1);
  CHECK(t.estimates[2].omega_undetermined);
  CHECK_FALSE(t.estimates[2].phi_hat);
  CHECK(t.estimates[1].control == std::vector<double>{1.0});
}
