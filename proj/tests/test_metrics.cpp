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
#include "qcl/metrics.hpp"

using namespace qcl;
using namespace qcl::testing;

namespace {

const TimeGrid kFastGrid{10.0, 150};
const SystemSpec kSystem = five_level_system(DipoleScenario::kStandard, 3);
const TransitionSpec kTrans{1, 5};

FlowConfig fast_flow() {
  FlowConfig config;
  config.max_dp = 2e-2;
  return config;
}

ControlField random_field(std::uint64_t seed, const TimeGrid& grid = kFastGrid) {
  Rng rng(seed);
  return synthesize_field(random_parametrization(rng), grid);
}

TrajectoryRecord fast_climb(std::uint64_t seed) {
  const FlowConfig config = fast_flow();
  const ControlField start =
      normalize_to_start(kSystem, kTrans, random_field(seed), config);
  return climb(kSystem, kTrans, start, config);
}

TrajectoryRecord make_polyline(const std::vector<Eigen::VectorXd>& points) {
  TrajectoryRecord traj;
  traj.kind = FlowKind::kSynthetic;
  for (std::size_t k = 0; k < points.size(); ++k)
    traj.snapshots.push_back(
        FlowSnapshot{static_cast<double>(k), ControlField{kFastGrid, points[k]}, 0.0, 0.0});
  traj.s_max = static_cast<double>(points.size() - 1);
  traj.converged = true;
  return traj;
}

}  // namespace

TEST_CASE("compute_r basics") {
  const Eigen::VectorXd base = random_field(1).amplitudes;
  const Eigen::VectorXd shift = random_field(2).amplitudes;

  SUBCASE("a two-snapshot trajectory is its own chord") {
    const TrajectoryRecord segment = make_polyline({base, base + shift});
    const RMetrics m = compute_r(segment);
    CHECK(m.r == 1.0);
    CHECK(m.d_pl == m.d_el);
  }

  SUBCASE("a bent path is strictly longer than its chord") {
    Eigen::VectorXd detour = base + shift;
    detour(40) += 0.7;
    const TrajectoryRecord bent = make_polyline({base, detour, base + 2.0 * shift});
    const RMetrics m = compute_r(bent);
    CHECK(m.r > 1.0);
    CHECK(m.d_pl > m.d_el);
  }

  SUBCASE("out-and-back trajectories have no defined ratio") {
    const TrajectoryRecord loop = make_polyline({base, base + shift, base});
    CHECK_THROWS_AS(compute_r(loop), DegenerateTrajectoryError);
  }

  SUBCASE("fewer than two snapshots is degenerate") {
    const TrajectoryRecord lone = make_polyline({base});
    CHECK_THROWS_AS(compute_r(lone), DegenerateTrajectoryError);
  }

  SUBCASE("dropping snapshots never lengthens the polyline") {
    const TrajectoryRecord traj = fast_climb(3);
    TrajectoryRecord thin = traj;
    thin.snapshots.clear();
    for (std::size_t k = 0; k < traj.snapshots.size(); k += 2)
      thin.snapshots.push_back(traj.snapshots[k]);
    if (thin.snapshots.back().s != traj.snapshots.back().s)
      thin.snapshots.push_back(traj.snapshots.back());
    const RMetrics dense = compute_r(traj);
    const RMetrics sparse = compute_r(thin);
    CHECK(sparse.d_pl <= dense.d_pl + 1e-12);
    CHECK(sparse.d_el == dense.d_el);
  }
}

TEST_CASE("gradient climbs respect the dipole-strength path-length bound") {
  const TrajectoryRecord traj = fast_climb(5);
  const RMetrics m = compute_r(traj, kSystem);
  CHECK(m.r >= 1.0 - 1e-9);
  CHECK(m.bound_applicable);
  CHECK(m.bound_satisfied);
  CHECK(m.d_pl <= m.bound);
  CHECK(m.slack > 0.0);

  SUBCASE("zero-length trajectories satisfy the bound vacuously") {
    TrajectoryRecord lone;
    lone.kind = FlowKind::kGradientClimb;
    lone.snapshots.push_back(traj.snapshots.back());
    lone.s_max = 0.0;
    const BoundCheck bc = check_pl_bound(lone, kSystem);
    CHECK(bc.d_pl == 0.0);
    CHECK(bc.bound == 0.0);
    CHECK(bc.satisfied);
  }

  SUBCASE("the bound is not asserted for synthetic flows") {
    Eigen::VectorXd alpha = Eigen::VectorXd::Ones(4) * 50.0;  // speeds beyond any gradient
    const TrajectoryRecord synth = straight_flow_synthetic(
        kSystem, kTrans, random_field(6), random_field(7), alpha, 1e-3);
    const BoundCheck bc = check_pl_bound(synth, kSystem);
    CHECK(!bc.applicable);
    CHECK(bc.satisfied);
  }
}

TEST_CASE("synthetic straight flows measure R = 1 and rank one") {
  for (std::uint64_t seed = 40; seed < 44; ++seed) {
    Rng rng(seed);
    const ControlField e0 = random_field(seed);
    ControlField de = random_field(seed + 100);
    de.amplitudes *= rng.uniform(0.2, 2.0);
    Eigen::VectorXd alpha(12);
    for (int k = 0; k < alpha.size(); ++k) alpha(k) = rng.uniform(0.0, 1.0);
    alpha(3) = 0.0;  // zero speed samples are allowed
    const TrajectoryRecord traj =
        straight_flow_synthetic(kSystem, kTrans, e0, de, alpha);

    const RMetrics m = compute_r(traj);
    CHECK(m.r >= 1.0 - 1e-12);
    CHECK(m.r - 1.0 <= 1e-6);

    const SeparabilityReport report = separability_index(traj, kSystem, kTrans);
    CHECK(report.index <= 1e-8);
    CHECK(report.min_cosine >= 1.0 - 1e-9);
    // Recovered speeds are nonnegative after the global sign fix.
    CHECK(report.alpha.minCoeff() >= -1e-12);
  }
}

TEST_CASE("rank_one_index is 1 for balanced rank-two data and 0 for rank one") {
  Eigen::MatrixXd two = Eigen::MatrixXd::Zero(2, 8);
  two(0, 0) = 1.0;  // orthonormal rows
  two(1, 3) = 1.0;
  CHECK(rank_one_index(two) == doctest::Approx(1.0));

  Eigen::MatrixXd one(3, 8);
  Eigen::VectorXd direction = Eigen::VectorXd::LinSpaced(8, -1.0, 2.5);
  for (int k = 0; k < 3; ++k) one.row(k) = (k + 1.0) * direction.transpose();
  CHECK(rank_one_index(one) <= 1e-14);
}

TEST_CASE("separability of a gradient climb recomputes the flow directions") {
  const TrajectoryRecord traj = fast_climb(9);
  const SeparabilityReport report = separability_index(traj, kSystem, kTrans);
  CHECK(report.gradients.rows() == static_cast<Eigen::Index>(traj.snapshots.size()));
  CHECK(report.index > 0.0);
  CHECK(report.index < 1.0);
  CHECK(report.beta.size() == kFastGrid.samples());
  // The first row is the gradient at the recorded start field.
  const Eigen::VectorXd g0 = gradient(kSystem, traj.snapshots.front().field, kTrans);
  CHECK((report.gradients.row(0).transpose() - g0).cwiseAbs().maxCoeff() == 0.0);

  TrajectoryRecord short_record = traj;
  short_record.snapshots.resize(2);
  CHECK_THROWS_AS(separability_index(short_record, kSystem, kTrans),
                  DegenerateTrajectoryError);
}

TEST_CASE("pairwise distances form a metric on sampled fields") {
  std::vector<ControlField> fields;
  for (std::uint64_t seed = 60; seed < 70; ++seed) fields.push_back(random_field(seed));
  const Eigen::MatrixXd d = pairwise_distances(fields);

  CHECK(d.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.rows(); ++j)
      for (int k = 0; k < d.rows(); ++k)
        CHECK(d(i, j) <= d(i, k) + d(k, j) + 1e-12);

  SUBCASE("grids must agree") {
    std::vector<ControlField> mixed{fields[0], random_field(3, TimeGrid{10.0, 75})};
    CHECK_THROWS_AS(pairwise_distances(mixed), GridMismatchError);
  }
}

TEST_CASE("straight shot finds the first local maximum") {
  SUBCASE("the two-level landscape is a perfect straight shot") {
    // With H0 = 0 the gradient stays collinear for all u, so marching from
    // a weak constant pulse must crest at full transfer.
    const SystemSpec system = rabi_system();
    const TimeGrid grid{4.0, 400};
    const ControlField start = constant_field(grid, 0.05);
    const StraightShotResult shot = straight_shot(system, TransitionSpec{1, 2}, start);
    CHECK(shot.u_star > 0.0);
    CHECK(shot.p_star >= 0.999);
    CHECK(shot.p_star >= shot.p_values.front());
  }

  SUBCASE("five-level starts reach a maximum inside the budget") {
    const FlowConfig config = fast_flow();
    const ControlField start =
        normalize_to_start(kSystem, kTrans, random_field(11), config);
    const StraightShotResult shot = straight_shot(kSystem, kTrans, start);
    CHECK(shot.u_star > 0.0);
    CHECK(shot.p_star > shot.p_values.front());
    CHECK(shot.p_star <= 1.0);
  }

  SUBCASE("a critical point has no direction to march") {
    const SystemSpec system = rabi_system();
    const TimeGrid grid{4.0, 400};
    const ControlField top = constant_field(grid, M_PI / 2.0 / grid.total_time);
    CHECK_THROWS_AS(straight_shot(system, TransitionSpec{1, 2}, top), ZeroGradientError);
  }
}
