/* Copyright 2026 The QCLand Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <doctest.h>

#include "oracles.hpp"
#include "qcl/errors.hpp"

using namespace qcl;
using namespace qcl::testing;

namespace {

ControlField random_five_level_field(std::uint64_t seed, const TimeGrid& grid = {}) {
  Rng rng(seed);
  return synthesize_field(random_parametrization(rng), grid);
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
  const Eigen::MatrixXcd delta =
      u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return delta.norm();
}

}  // namespace

TEST_CASE("time grid defaults to 1001 samples over T = 10") {
  TimeGrid grid;
  CHECK(grid.samples() == 1001);
  CHECK(grid.dt() == doctest::Approx(0.01));
  CHECK(grid.time_at(grid.intervals) == doctest::Approx(10.0));
}

TEST_CASE("constant-field two-level propagation matches the Rabi formula") {
  const SystemSpec system = rabi_system();
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const double amplitude = rng.uniform(0.05, 1.5);
    const double total_time = rng.uniform(1.0, 12.0);
    const TimeGrid grid{total_time, 1000};
    const double p = transition_probability(system, constant_field(grid, amplitude),
                                            TransitionSpec{1, 2});
    CHECK(std::abs(p - rabi_probability(amplitude, total_time)) <= 1e-10);
  }
}

TEST_CASE("pi/2 pulse transfers all population") {
  const SystemSpec system = rabi_system();
  const TimeGrid grid{3.0, 1000};
  const double amplitude = M_PI / 2.0 / grid.total_time;
  const double p =
      transition_probability(system, constant_field(grid, amplitude), TransitionSpec{1, 2});
  CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero field leaves basis states stationary") {
  const SystemSpec system = five_level_system(DipoleScenario::kStandard, 3);
  const ControlField zero{TimeGrid{}, Eigen::VectorXd::Zero(TimeGrid{}.samples())};
  CHECK(transition_probability(system, zero, TransitionSpec{1, 5}) == 0.0);

  // Identity evolution on the initial state up to phase.
  const PropagationResult result = propagate(system, zero);
  for (int j = 0; j < system.dim(); ++j)
    CHECK(std::norm(result.final_propagator(j, j)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("every cumulative propagator is unitary") {
  const SystemSpec system = five_level_system(DipoleScenario::kStandard, 3);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const PropagationResult result =
        propagate(system, random_five_level_field(seed), true);
    REQUIRE(result.history.size() == static_cast<std::size_t>(TimeGrid{}.samples()));
    double worst = 0.0;
    for (const auto& u : result.history) worst = std::max(worst, unitarity_defect(u));
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  // Random fields and random dipole sign patterns; sampled nodes keep the
  // suite fast while the acceptance run covers every node.
  int cases = 0;
  for (std::uint64_t sign_seed : {3ULL, 17ULL, 23ULL, 40ULL}) {
    const SystemSpec system = five_level_system(DipoleScenario::kStandard, sign_seed);
    for (std::uint64_t field_seed = 1; field_seed <= 5; ++field_seed) {
      const ControlField field = random_five_level_field(field_seed * 7 + sign_seed);
      const double mismatch =
          fd_gradient_mismatch(system, field, TransitionSpec{1, 5}, 83);
      CAPTURE(sign_seed);
      CAPTURE(field_seed);
      CHECK(mismatch <= 1e-4);
      ++cases;
    }
  }
  CHECK(cases == 20);
}

TEST_CASE("gradient vanishes at the landscape extrema") {
  SUBCASE("bottom: zero field on the five-level system") {
    const SystemSpec system = five_level_system(DipoleScenario::kStandard, 3);
    const ControlField zero{TimeGrid{}, Eigen::VectorXd::Zero(TimeGrid{}.samples())};
    const Eigen::VectorXd g = gradient(system, zero, TransitionSpec{1, 5});
    CHECK(g.cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("top: optimal pi/2 pulse on the two-level system") {
    const SystemSpec system = rabi_system();
    const TimeGrid grid{4.0, 1000};
    const ControlField pulse = constant_field(grid, M_PI / 2.0 / grid.total_time);
    const Evaluation ev = evaluate(system, pulse, TransitionSpec{1, 2});
    CHECK(ev.probability == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev.gradient.cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("field synthesis") {
  const TimeGrid grid;

  SUBCASE("unit peak normalization holds exactly for random parameters") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const ControlField field = random_five_level_field(seed);
      CHECK(field.amplitudes.cwiseAbs().maxCoeff() == 1.0);
    }
  }

  SUBCASE("single active component reduces to a normalized enveloped sine") {
    FieldParametrization params;
    params.amplitudes[0] = 1.0;
    const ControlField field = synthesize_field(params, grid);
    // Reconstruct the expected shape independently.
    Eigen::VectorXd expected(grid.samples());
    for (int j = 0; j < grid.samples(); ++j) {
      const double t = grid.time_at(j);
      expected(j) = std::exp(-0.3 * (t - 5.0) * (t - 5.0)) * std::sin(t);
    }
    expected /= expected.cwiseAbs().maxCoeff();
    CHECK((field.amplitudes - expected).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("shifting every phase by pi negates the field") {
    Rng rng(5);
    FieldParametrization params = random_parametrization(rng);
    FieldParametrization shifted = params;
    for (double& phi : shifted.phases) phi += M_PI;
    const ControlField a = synthesize_field(params, grid);
    const ControlField b = synthesize_field(shifted, grid);
    CHECK((a.amplitudes + b.amplitudes).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("all-zero amplitudes are degenerate") {
    FieldParametrization params;
    CHECK_THROWS_AS(synthesize_field(params, grid), DegenerateFieldError);
  }

  SUBCASE("synthesis is deterministic") {
    Rng rng_a(9);
    Rng rng_b(9);
    const ControlField a = synthesize_field(random_parametrization(rng_a), grid);
    const ControlField b = synthesize_field(random_parametrization(rng_b), grid);
    CHECK(a.amplitudes == b.amplitudes);
  }
}

TEST_CASE("dipole scenarios") {
  SUBCASE("standard magnitudes fall off as 0.5^(|j-k|-1)") {
    const Eigen::MatrixXd mu = random_dipole(DipoleScenario::kStandard, 12);
    CHECK(std::abs(mu(0, 4)) == doctest::Approx(0.125));
    CHECK(std::abs(mu(0, 1)) == doctest::Approx(1.0));
    CHECK(std::abs(mu(1, 3)) == doctest::Approx(0.5));
  }
  SUBCASE("restricted couples nearest neighbors only") {
    const Eigen::MatrixXd mu = random_dipole(DipoleScenario::kRestricted, 12);
    CHECK(mu(0, 2) == 0.0);
    CHECK(mu(0, 3) == 0.0);
    CHECK(std::abs(mu(2, 3)) == doctest::Approx(1.0));
  }
  SUBCASE("free couples everything at unit strength") {
    const Eigen::MatrixXd mu = random_dipole(DipoleScenario::kFree, 12);
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k)
        CHECK(std::abs(mu(j, k)) == doctest::Approx(j == k ? 0.0 : 1.0));
  }
  SUBCASE("always symmetric with zero diagonal, fixed by the seed") {
    for (auto scenario :
         {DipoleScenario::kStandard, DipoleScenario::kFree, DipoleScenario::kRestricted}) {
      const Eigen::MatrixXd mu = random_dipole(scenario, 77);
      CHECK(mu == mu.transpose().eval());
      CHECK(mu.diagonal().cwiseAbs().maxCoeff() == 0.0);
      CHECK(mu == random_dipole(scenario, 77));
    }
  }
}

TEST_CASE("population dynamics") {
  const SystemSpec system = five_level_system(DipoleScenario::kStandard, 3);
  const TimeGrid grid;

  SUBCASE("zero field keeps the initial state occupied") {
    const ControlField zero{grid, Eigen::VectorXd::Zero(grid.samples())};
    const Eigen::MatrixXd pop = population_dynamics(system, zero, 2);
    CHECK(pop.col(1).minCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("rows sum to one and start at the indicator") {
    const ControlField field = random_five_level_field(21);
    const Eigen::MatrixXd pop = population_dynamics(system, field, 1);
    CHECK(pop(0, 0) == 1.0);
    for (int k = 0; k < pop.rows(); ++k)
      CHECK(std::abs(pop.row(k).sum() - 1.0) <= 1e-10);
  }

  SUBCASE("final row matches the transition probability") {
    const ControlField field = random_five_level_field(22);
    const Eigen::MatrixXd pop = population_dynamics(system, field, 1);
    const double p = transition_probability(system, field, TransitionSpec{1, 5});
    CHECK(pop(pop.rows() - 1, 4) == doctest::Approx(p).epsilon(1e-14));
  }
}

TEST_CASE("input validation") {
  const SystemSpec system = five_level_system(DipoleScenario::kStandard, 3);
  const TimeGrid grid;

  SUBCASE("non-finite field") {
    ControlField bad{grid, Eigen::VectorXd::Zero(grid.samples())};
    bad.amplitudes(17) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(transition_probability(system, bad, TransitionSpec{1, 5}),
                    NonFiniteFieldError);
  }

  SUBCASE("field length mismatch") {
    ControlField bad{grid, Eigen::VectorXd::Zero(17)};
    CHECK_THROWS_AS(propagate(system, bad), GridMismatchError);
  }

  SUBCASE("transitions must connect distinct states in range") {
    CHECK_THROWS_AS((TransitionSpec{1, 1}).validate(5), InvalidSpecError);
    CHECK_THROWS_AS((TransitionSpec{0, 5}).validate(5), InvalidSpecError);
    CHECK_THROWS_AS((TransitionSpec{1, 6}).validate(5), InvalidSpecError);
  }

  SUBCASE("dipole must be symmetric with zero diagonal") {
    SystemSpec bad = system;
    bad.dipole(0, 0) = 0.5;
    CHECK_THROWS_AS(bad.validate(), InvalidSpecError);
    SystemSpec asym = system;
    asym.dipole(0, 1) += 0.25;
    CHECK_THROWS_AS(asym.validate(), InvalidSpecError);
  }
}
