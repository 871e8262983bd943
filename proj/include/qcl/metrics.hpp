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
#ifndef QCL_METRICS_HPP
#define QCL_METRICS_HPP

#include <limits>
#include <vector>

#include "qcl/flow.hpp"

namespace qcl {

/// Path-straightness measurements of one trajectory, all in the
/// (1/T)-weighted field norm. d_pl is the polyline length over the
/// recorded snapshots, d_el the endpoint distance, r their ratio.
struct RMetrics {
  double d_pl = 0.0;
  double d_el = 0.0;
  double r = 1.0;
  double s_max = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
  double slack = std::numeric_limits<double>::quiet_NaN();
  bool bound_applicable = false;
  bool bound_satisfied = false;
};

/// Ratio of trajectory path length to endpoint distance. Requires at least
/// two snapshots; coincident endpoints (d_el < 1e-12) are an error.
RMetrics compute_r(const TrajectoryRecord& traj);

/// compute_r plus the dipole-strength bound diagnostics of check_pl_bound.
RMetrics compute_r(const TrajectoryRecord& traj, const SystemSpec& system);

/// Verifies d_pl <= (2/hbar) s_max ||mu|| with the spectral norm of the
/// dipole. Applies to gradient flows only; synthetic trajectories are
/// reported not-applicable.
struct BoundCheck {
  double d_pl;
  double bound;
  double slack;
  bool applicable;
  bool satisfied;
};
BoundCheck check_pl_bound(const TrajectoryRecord& traj, const SystemSpec& system);

/// Symmetric matrix of pairwise field distances in the weighted norm.
Eigen::MatrixXd pairwise_distances(const std::vector<ControlField>& fields);

/// Rectangular distance matrix between two field sets on a common grid.
Eigen::MatrixXd cross_distances(const std::vector<ControlField>& a,
                                const std::vector<ControlField>& b);

/// Rank-one diagnosis of the flow direction along a trajectory. Rows of
/// `gradients` are the recomputed gradient at each snapshot for gradient
/// climbs, and the exact flow directions (snapshot differences over ds)
/// for synthetic runs. index = sigma_2 / sigma_1 of that matrix; beta is
/// the leading right singular vector and alpha the snapshot projections
/// onto it, sign-fixed so their sum is nonnegative.
struct SeparabilityReport {
  Eigen::MatrixXd gradients;
  double index = 0.0;
  double min_cosine = 1.0;
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;
};

/// sigma_2 / sigma_1 of a row matrix; 0 iff the matrix is rank one.
double rank_one_index(const Eigen::MatrixXd& rows);
SeparabilityReport separability_index(const TrajectoryRecord& traj,
                                      const SystemSpec& system,
                                      const TransitionSpec& trans);

/// March E(u,t) = E(0,t) + u g(0,t) along the start gradient and find the
/// first strict local maximum of P(u). The u step is sized so one step
/// moves the field by step_fraction * ||E(0)||_T; the march aborts if the
/// field travels travel_budget times that scale without a maximum.
struct StraightShotPolicy {
  double step_fraction = 1.0 / 200.0;
  double travel_budget = 60.0;
};

struct StraightShotResult {
  std::vector<double> u_grid;
  std::vector<double> p_values;
  double u_star = 0.0;  // parabolic refinement of the bracket
  double p_star = 0.0;
};
StraightShotResult straight_shot(const SystemSpec& system, const TransitionSpec& trans,
                                 const ControlField& start,
                                 const StraightShotPolicy& policy = {});

/// Mean, variance (population), and extrema of a sample.
struct SampleStats {
  double mean = 0.0;
  double variance = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};
SampleStats sample_stats(const std::vector<double>& values);

}  // namespace qcl

#endif  // QCL_METRICS_HPP
