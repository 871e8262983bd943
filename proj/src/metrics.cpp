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
#include "qcl/metrics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "qcl/errors.hpp"

namespace qcl {

namespace {

constexpr double kDegenerateEndpoints = 1e-12;

double spectral_norm_symmetric(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

RMetrics compute_r(const TrajectoryRecord& traj) {
  if (traj.snapshots.size() < 2)
    throw DegenerateTrajectoryError("path ratio needs at least two snapshots");
  const TimeGrid& grid = traj.snapshots.front().field.grid;
  RMetrics out;
  out.s_max = traj.s_max;
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k)
    out.d_pl += time_weighted_norm(
        grid, traj.snapshots[k + 1].field.amplitudes - traj.snapshots[k].field.amplitudes);
  out.d_el = time_weighted_norm(
      grid, traj.snapshots.back().field.amplitudes - traj.snapshots.front().field.amplitudes);
  if (out.d_el < kDegenerateEndpoints)
    throw DegenerateTrajectoryError("trajectory endpoints coincide; R undefined");
  out.r = out.d_pl / out.d_el;
  return out;
}

RMetrics compute_r(const TrajectoryRecord& traj, const SystemSpec& system) {
  RMetrics out = compute_r(traj);
  const BoundCheck bc = check_pl_bound(traj, system);
  out.bound = bc.bound;
  out.slack = bc.slack;
  out.bound_applicable = bc.applicable;
  out.bound_satisfied = bc.satisfied;
  return out;
}

BoundCheck check_pl_bound(const TrajectoryRecord& traj, const SystemSpec& system) {
  BoundCheck bc{};
  bc.applicable = traj.kind == FlowKind::kGradientClimb;
  bc.d_pl = 0.0;
  const TimeGrid& grid =
      traj.snapshots.empty() ? TimeGrid{} : traj.snapshots.front().field.grid;
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k)
    bc.d_pl += time_weighted_norm(
        grid, traj.snapshots[k + 1].field.amplitudes - traj.snapshots[k].field.amplitudes);
  bc.bound = (2.0 / SystemSpec::hbar) * traj.s_max * spectral_norm_symmetric(system.dipole);
  bc.slack = bc.bound - bc.d_pl;
  bc.satisfied = !bc.applicable || bc.d_pl <= bc.bound * (1.0 + 1e-12) + 1e-15;
  return bc;
}

Eigen::MatrixXd pairwise_distances(const std::vector<ControlField>& fields) {
  if (fields.size() < 2)
    throw InvalidSpecError("pairwise distances need at least two fields");
  const TimeGrid& grid = fields.front().grid;
  for (const auto& f : fields)
    if (!(f.grid == grid))
      throw GridMismatchError("fields live on different time grids");
  const int n = static_cast<int>(fields.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = time_weighted_norm(grid, fields[i].amplitudes - fields[j].amplitudes);
      d(j, i) = d(i, j);
    }
  return d;
}

Eigen::MatrixXd cross_distances(const std::vector<ControlField>& a,
                                const std::vector<ControlField>& b) {
  if (a.empty() || b.empty())
    throw InvalidSpecError("cross distances need nonempty field sets");
  const TimeGrid& grid = a.front().grid;
  for (const auto& f : a)
    if (!(f.grid == grid)) throw GridMismatchError("fields live on different time grids");
  for (const auto& f : b)
    if (!(f.grid == grid)) throw GridMismatchError("fields live on different time grids");
  Eigen::MatrixXd d(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      d(i, j) = time_weighted_norm(grid, a[i].amplitudes - b[j].amplitudes);
  return d;
}

double rank_one_index(const Eigen::MatrixXd& rows) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(rows);
  const auto& sv = svd.singularValues();
  if (sv.size() < 2 || !(sv(0) > 0.0)) return 0.0;
  return sv(1) / sv(0);
}

SeparabilityReport separability_index(const TrajectoryRecord& traj,
                                      const SystemSpec& system,
                                      const TransitionSpec& trans) {
  if (traj.snapshots.size() < 3)
    throw DegenerateTrajectoryError("separability needs at least three snapshots");
  const int samples = static_cast<int>(traj.snapshots.front().field.amplitudes.size());
  SeparabilityReport report;

  if (traj.kind == FlowKind::kGradientClimb) {
    report.gradients.resize(traj.snapshots.size(), samples);
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k)
      report.gradients.row(k) =
          gradient(system, traj.snapshots[k].field, trans).transpose();
  } else {
    // The synthetic flow's direction field is exact: finite differences of
    // the recorded snapshots over ds.
    report.gradients.resize(traj.snapshots.size() - 1, samples);
    for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
      const double ds = traj.snapshots[k + 1].s - traj.snapshots[k].s;
      report.gradients.row(k) = ((traj.snapshots[k + 1].field.amplitudes -
                                  traj.snapshots[k].field.amplitudes) /
                                 ds)
                                    .transpose();
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(report.gradients, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  report.index = sv.size() > 1 && sv(0) > 0.0 ? sv(1) / sv(0) : 0.0;
  report.beta = svd.matrixV().col(0);
  report.alpha = report.gradients * report.beta;
  if (report.alpha.sum() < 0.0) {
    report.alpha = -report.alpha;
    report.beta = -report.beta;
  }

  // Worst-case alignment between any two flow directions.
  Eigen::MatrixXd unit = report.gradients;
  for (int k = 0; k < unit.rows(); ++k) {
    const double norm = unit.row(k).norm();
    if (norm > 0.0) unit.row(k) /= norm;
  }
  const Eigen::MatrixXd cosines = unit * unit.transpose();
  report.min_cosine = 1.0;
  for (int i = 0; i < cosines.rows(); ++i)
    for (int j = i + 1; j < cosines.cols(); ++j)
      report.min_cosine = std::min(report.min_cosine, cosines(i, j));
  return report;
}

StraightShotResult straight_shot(const SystemSpec& system, const TransitionSpec& trans,
                                 const ControlField& start,
                                 const StraightShotPolicy& policy) {
  const Eigen::VectorXd dir = gradient(system, start, trans);
  const double dir_norm = time_weighted_norm(start.grid, dir);
  if (dir_norm < 1e-10)
    throw ZeroGradientError("start gradient vanishes; no direction to march");
  const double scale =
      std::max(time_weighted_norm(start.grid, start.amplitudes), 1e-6);
  const double du = policy.step_fraction * scale / dir_norm;
  const long max_samples =
      static_cast<long>(policy.travel_budget / policy.step_fraction) + 2;

  StraightShotResult result;
  result.u_grid.reserve(256);
  result.p_values.reserve(256);
  ControlField probe = start;
  for (long k = 0;; ++k) {
    probe.amplitudes = start.amplitudes + (k * du) * dir;
    result.u_grid.push_back(k * du);
    result.p_values.push_back(transition_probability(system, probe, trans));
    const std::size_t m = result.p_values.size();
    if (m >= 3) {
      const double p0 = result.p_values[m - 3];
      const double p1 = result.p_values[m - 2];
      const double p2 = result.p_values[m - 1];
      if (p1 > p0 && p1 > p2) {
        // Parabolic refinement through the bracket.
        const double denom = p0 - 2.0 * p1 + p2;
        const double shift = denom != 0.0 ? 0.5 * du * (p0 - p2) / denom : 0.0;
        result.u_star = result.u_grid[m - 2] + shift;
        probe.amplitudes = start.amplitudes + result.u_star * dir;
        result.p_star =
            std::max(p1, transition_probability(system, probe, trans));
        return result;
      }
    }
    if (k >= max_samples)
      throw NoMaximumError("no local maximum of P within the straight-shot budget");
  }
}

SampleStats sample_stats(const std::vector<double>& values) {
  SampleStats st;
  st.count = values.size();
  if (values.empty()) return st;
  st.min = values.front();
  st.max = values.front();
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    st.min = std::min(st.min, v);
    st.max = std::max(st.max, v);
  }
  st.mean = sum / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - st.mean) * (v - st.mean);
  st.variance = ss / values.size();
  return st;
}

}  // namespace qcl
