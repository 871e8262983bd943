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
#include "qcl/flow.hpp"
#include "qcl/metrics.hpp"

using namespace qcl;
using namespace qcl::testing;

namespace {

// Coarse grid keeps the suite quick; the acceptance run exercises the full
// 1,001-point grid.
const TimeGrid kFastGrid{10.0, 150};

FlowConfig fast_flow() {
  FlowConfig config;
  config.max_dp = 2e-2;
  return config;
}

ControlField random_field(std::uint64_t seed, const TimeGrid& grid = kFastGrid) {
  Rng rng(seed);
  return synthesize_field(random_parametrization(rng), grid);
}

const SystemSpec kSystem = five_level_system(DipoleScenario::kStandard, 3);
const TransitionSpec kTrans{1, 5};

}  // namespace

TEST_CASE("normalize_to_start pins trial fields to the common start") {
  const FlowConfig config = fast_flow();

  SUBCASE("fields already inside the window are returned unchanged") {
    const ControlField normalized =
        normalize_to_start(kSystem, kTrans, random_field(4), config);
    const ControlField again = normalize_to_start(kSystem, kTrans, normalized, config);
    CHECK(again.amplitudes == normalized.amplitudes);
  }

  SUBCASE("random trials land within the endpoint window from both sides") {
    int descended = 0;
    int ascended = 0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const ControlField trial = random_field(seed);
      const double p_raw = transition_probability(kSystem, trial, kTrans);
      const ControlField normalized = normalize_to_start(kSystem, kTrans, trial, config);
      const double p = transition_probability(kSystem, normalized, kTrans);
      CHECK(std::abs(p - config.p_start) <= config.endpoint_tol);
      (p_raw > config.p_start ? descended : ascended)++;
    }
    CHECK(descended + ascended == 8);
  }

  SUBCASE("the zero field stalls at the bottom critical point") {
    const ControlField zero{kFastGrid, Eigen::VectorXd::Zero(kFastGrid.samples())};
    CHECK_THROWS_AS(normalize_to_start(kSystem, kTrans, zero, config), FlowStallError);
  }
}

TEST_CASE("climb reaches the top monotonically with pinned endpoints") {
  const FlowConfig config = fast_flow();
  const ControlField start =
      normalize_to_start(kSystem, kTrans, random_field(7), config);
  const TrajectoryRecord traj = climb(kSystem, kTrans, start, config);

  CHECK(traj.converged);
  CHECK(traj.kind == FlowKind::kGradientClimb);
  CHECK(std::abs(traj.snapshots.front().probability - config.p_start) <=
        config.endpoint_tol);
  CHECK(std::abs(traj.snapshots.back().probability - config.p_end) <= config.endpoint_tol);
  CHECK(traj.s_max > 0.0);
  CHECK(traj.snapshots.back().s == traj.s_max);

  double worst_drop = 0.0;
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    CHECK(traj.snapshots[k + 1].s > traj.snapshots[k].s);
    worst_drop = std::min(worst_drop, traj.snapshots[k + 1].probability -
                                          traj.snapshots[k].probability);
  }
  CHECK(worst_drop >= -1e-10);
}

TEST_CASE("climb rejects a start away from the common start value") {
  const FlowConfig config = fast_flow();
  CHECK_THROWS_AS(climb(kSystem, kTrans, random_field(9), config), InvalidSpecError);
}

TEST_CASE("a converged top field yields a zero-length trajectory") {
  const FlowConfig config = fast_flow();
  const ControlField start =
      normalize_to_start(kSystem, kTrans, random_field(12), config);
  const TrajectoryRecord first = climb(kSystem, kTrans, start, config);
  const TrajectoryRecord again =
      climb(kSystem, kTrans, first.snapshots.back().field, config);
  CHECK(again.converged);
  CHECK(again.s_max == 0.0);
  CHECK(again.steps == 0);
  CHECK(again.snapshots.size() == 1);
}

TEST_CASE("step budget exhaustion is reported") {
  FlowConfig config = fast_flow();
  config.max_steps = 3;
  const ControlField start =
      normalize_to_start(kSystem, kTrans, random_field(7), fast_flow());
  CHECK_THROWS_AS(climb(kSystem, kTrans, start, config), StepBudgetError);
}

TEST_CASE("identical seeds and configs reproduce the climb bit for bit") {
  const FlowConfig config = fast_flow();
  const ControlField start =
      normalize_to_start(kSystem, kTrans, random_field(5), config);
  const TrajectoryRecord a = climb(kSystem, kTrans, start, config);
  const TrajectoryRecord b = climb(kSystem, kTrans, start, config);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    CHECK(a.snapshots[k].s == b.snapshots[k].s);
    CHECK(a.snapshots[k].probability == b.snapshots[k].probability);
    CHECK(a.snapshots[k].field.amplitudes == b.snapshots[k].field.amplitudes);
  }
}

TEST_CASE("integration refinement leaves R stable at production settings") {
  // Both claims hold at the default step cap on the production grid:
  // halving the cap moves R by < 1e-3, and doubling the grid resolution
  // (midpoint interval sampling) moves it even less.
  Rng rng(31);
  const FieldParametrization params = random_parametrization(rng);

  auto r_at = [&](int intervals, double cap) {
    const TimeGrid grid{10.0, intervals};
    FlowConfig config;
    config.max_dp = cap;
    const ControlField trial = synthesize_field(params, grid);
    const ControlField start = normalize_to_start(kSystem, kTrans, trial, config);
    return compute_r(climb(kSystem, kTrans, start, config)).r;
  };
  const double base = r_at(1000, 5e-3);
  CHECK(std::abs(base - r_at(1000, 2.5e-3)) < 1e-3);
  CHECK(std::abs(base - r_at(2000, 5e-3)) < 1e-3);
}

TEST_CASE("snapshot stride thins the record but keeps both endpoints") {
  FlowConfig config = fast_flow();
  const ControlField start =
      normalize_to_start(kSystem, kTrans, random_field(7), config);
  const TrajectoryRecord dense = climb(kSystem, kTrans, start, config);
  config.snapshot_stride = 5;
  const TrajectoryRecord thin = climb(kSystem, kTrans, start, config);
  CHECK(thin.snapshots.size() < dense.snapshots.size());
  CHECK(thin.snapshots.front().s == dense.snapshots.front().s);
  CHECK(thin.snapshots.back().s == dense.snapshots.back().s);
  CHECK(thin.snapshots.back().probability == dense.snapshots.back().probability);
}

TEST_CASE("synthetic straight flow") {
  const ControlField e0 = random_field(14);
  ControlField de = random_field(15);
  de.amplitudes *= 0.5;

  SUBCASE("the cumulative speed integral is normalized to the endpoints") {
    Eigen::VectorXd alpha(5);
    alpha << 0.2, 1.0, 3.0, 1.0, 0.2;
    const TrajectoryRecord traj =
        straight_flow_synthetic(kSystem, kTrans, e0, de, alpha, 2.0);
    CHECK(traj.kind == FlowKind::kSynthetic);
    CHECK(traj.snapshots.size() == 5);
    CHECK(traj.s_max == 2.0);
    // Gamma(s_max) = 1: the last snapshot is exactly e0 + de.
    const Eigen::VectorXd expected = e0.amplitudes + de.amplitudes;
    CHECK((traj.snapshots.back().field.amplitudes - expected).cwiseAbs().maxCoeff() <=
          1e-14);
  }

  SUBCASE("the endpoint distance ignores the speed profile") {
    Eigen::VectorXd constant = Eigen::VectorXd::Ones(9);
    Eigen::VectorXd bell(9);
    for (int k = 0; k < 9; ++k) bell(k) = std::exp(-0.5 * (k - 4.0) * (k - 4.0));
    const double d_el_constant =
        compute_r(straight_flow_synthetic(kSystem, kTrans, e0, de, constant)).d_el;
    const double d_el_bell =
        compute_r(straight_flow_synthetic(kSystem, kTrans, e0, de, bell)).d_el;
    CHECK(d_el_constant == doctest::Approx(d_el_bell).epsilon(1e-14));
  }

  SUBCASE("degenerate speeds are rejected") {
    CHECK_THROWS_AS(
        straight_flow_synthetic(kSystem, kTrans, e0, de, Eigen::VectorXd::Zero(4)),
        DegenerateFieldError);
    Eigen::VectorXd negative = Eigen::VectorXd::Ones(4);
    negative(2) = -0.1;
    CHECK_THROWS_AS(straight_flow_synthetic(kSystem, kTrans, e0, de, negative),
                    InvalidSpecError);
    CHECK_THROWS_AS(straight_flow_synthetic(kSystem, kTrans, e0, de,
                                            Eigen::VectorXd::Ones(1)),
                    InvalidSpecError);
  }
}
