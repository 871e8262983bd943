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
#include "qcl/flow.hpp"

#include <cmath>
#include <sstream>

#include "qcl/errors.hpp"

namespace qcl {

namespace {

constexpr double kMonotoneSlack = 1e-12;
constexpr int kGrowthStreak = 3;
constexpr double kGrowthFactor = 1.25;
constexpr int kMaxBisections = 200;

struct FlowState {
  ControlField field;
  double p;
  Eigen::VectorXd grad;
  double grad_norm;
};

FlowState make_state(const SystemSpec& system, const TransitionSpec& trans,
                     ControlField field) {
  Evaluation ev = evaluate(system, field, trans);
  double gn = time_weighted_norm(field.grid, ev.gradient);
  return FlowState{std::move(field), ev.probability, std::move(ev.gradient), gn};
}

// Bisect the step fraction lambda in (0, h] along direction sense*g until
// P lands inside [target - tol, target + tol]. The full step at lambda = h
// is known to reach or cross the target.
double bisect_step(const SystemSpec& system, const TransitionSpec& trans,
                   const FlowState& from, double sense, double h, double target,
                   double tol) {
  double lo = 0.0;
  double hi = h;
  double lambda = h;
  for (int iter = 0; iter < kMaxBisections; ++iter) {
    ControlField trial = from.field;
    trial.amplitudes += (sense * lambda) * from.grad;
    const double p = transition_probability(system, trial, trans);
    if (std::abs(p - target) <= tol) return lambda;
    const bool past = sense > 0 ? (p > target) : (p < target);
    if (past)
      hi = lambda;
    else
      lo = lambda;
    lambda = 0.5 * (lo + hi);
  }
  throw Error("bisection-failure", "endpoint bisection did not reach the tolerance window");
}

// Core adaptive integrator. sense = +1 climbs toward `target`, -1 descends.
// `record`, when nonnull, receives every accepted state (stride applied by
// the caller via the record callback).
template <class Recorder>
FlowState integrate_flow(const SystemSpec& system, const TransitionSpec& trans,
                         FlowState state, double sense, double target,
                         const FlowConfig& config, long& steps, long& rejections,
                         double& s, Recorder&& record) {
  auto remaining = [&](double p) { return sense * (target - p); };

  // dP/ds = sum_j w_j g_j^2 = T ||g||_T^2, which sizes the first trial step.
  double h = config.initial_step > 0.0
                 ? config.initial_step
                 : 0.5 * config.max_dp /
                       std::max(state.field.grid.total_time *
                                    time_weighted_norm_sq(state.field.grid, state.grad),
                                1e-30);
  int streak = 0;
  while (remaining(state.p) > config.endpoint_tol) {
    if (state.grad_norm < config.grad_floor) {
      std::ostringstream msg;
      msg << "gradient norm " << state.grad_norm << " below stall floor at P = "
          << state.p;
      throw FlowStallError(msg.str(), state.p);
    }
    if (steps >= config.max_steps)
      throw StepBudgetError("flow step budget exhausted", state.p);

    // One pass evaluates the trial's P and gradient together; the gradient
    // is reused as the next step direction once the trial is accepted.
    ControlField trial_field = state.field;
    trial_field.amplitudes += (sense * h) * state.grad;
    FlowState trial = make_state(system, trans, std::move(trial_field));
    const double dp = sense * (trial.p - state.p);
    if (dp < -kMonotoneSlack || dp > config.max_dp) {
      h *= 0.5;
      streak = 0;
      ++rejections;
      continue;
    }
    const bool reached =
        remaining(trial.p) <= 0.0 || std::abs(trial.p - target) <= config.endpoint_tol;
    if (reached && std::abs(trial.p - target) > config.endpoint_tol) {
      // Crossed the target: shorten the final step into the window.
      h = bisect_step(system, trans, state, sense, h, target, config.endpoint_tol);
      trial_field = state.field;
      trial_field.amplitudes += (sense * h) * state.grad;
      trial = make_state(system, trans, std::move(trial_field));
    }
    s += h;
    ++steps;
    state = std::move(trial);
    record(s, state);
    if (reached || std::abs(state.p - target) <= config.endpoint_tol) break;
    if (++streak >= kGrowthStreak) {
      h *= kGrowthFactor;
      streak = 0;
    }
  }
  return state;
}

}  // namespace

void FlowConfig::validate() const {
  if (!(p_start > 0.0) || !(p_end < 1.0) || !(p_start < p_end))
    throw InvalidSpecError("flow targets require 0 < P_start < P_end < 1");
  if (!(endpoint_tol > 0.0) || !(endpoint_tol < p_end - p_start))
    throw InvalidSpecError("endpoint tolerance must be positive and smaller than the climb span");
  if (!(max_dp > 0.0) || !(grad_floor > 0.0) || max_steps < 1 || snapshot_stride < 1)
    throw InvalidSpecError("flow config requires positive step controls");
}

ControlField normalize_to_start(const SystemSpec& system, const TransitionSpec& trans,
                                const ControlField& trial, const FlowConfig& config) {
  config.validate();
  FlowState state = make_state(system, trans, trial);
  if (std::abs(state.p - config.p_start) <= config.endpoint_tol) return trial;
  const double sense = state.p > config.p_start ? -1.0 : 1.0;
  long steps = 0;
  long rejections = 0;
  double s = 0.0;
  state = integrate_flow(system, trans, std::move(state), sense, config.p_start, config,
                         steps, rejections, s, [](double, const FlowState&) {});
  return state.field;
}

TrajectoryRecord climb(const SystemSpec& system, const TransitionSpec& trans,
                       const ControlField& start, const FlowConfig& config,
                       const Provenance& provenance) {
  config.validate();
  TrajectoryRecord record;
  record.kind = FlowKind::kGradientClimb;
  record.transition = trans;
  record.provenance = provenance;

  FlowState state = make_state(system, trans, start);
  record.snapshots.push_back(
      FlowSnapshot{0.0, state.field, state.p, state.grad_norm});
  if (state.p >= config.p_end - config.endpoint_tol) {
    record.converged = true;
    return record;  // already at the top: zero-length trajectory
  }
  if (std::abs(state.p - config.p_start) > config.endpoint_tol)
    throw InvalidSpecError("climb start is not normalized to P_start");

  double s = 0.0;
  long accepted = 0;
  state = integrate_flow(
      system, trans, std::move(state), +1.0, config.p_end, config, record.steps,
      record.rejections, s, [&](double s_now, const FlowState& st) {
        ++accepted;
        if (accepted % config.snapshot_stride == 0)
          record.snapshots.push_back(
              FlowSnapshot{s_now, st.field, st.p, st.grad_norm});
      });
  if (record.snapshots.back().s != s)
    record.snapshots.push_back(FlowSnapshot{s, state.field, state.p, state.grad_norm});
  record.s_max = s;
  record.converged = std::abs(state.p - config.p_end) <= config.endpoint_tol;
  return record;
}

TrajectoryRecord straight_flow_synthetic(const SystemSpec& system,
                                         const TransitionSpec& trans,
                                         const ControlField& e0, const ControlField& de,
                                         const Eigen::VectorXd& alpha, double s_max) {
  e0.validate();
  de.validate();
  if (!(e0.grid == de.grid))
    throw GridMismatchError("start field and displacement live on different grids");
  if (alpha.size() < 2)
    throw InvalidSpecError("synthetic flow needs at least two speed samples");
  if ((alpha.array() < 0.0).any())
    throw InvalidSpecError("synthetic flow speed must be nonnegative");
  if (!(s_max > 0.0)) throw InvalidSpecError("synthetic flow needs s_max > 0");

  const int k_count = static_cast<int>(alpha.size());
  const double ds = s_max / (k_count - 1);
  Eigen::VectorXd cumulative(k_count);
  cumulative(0) = 0.0;
  for (int k = 1; k < k_count; ++k)
    cumulative(k) = cumulative(k - 1) + 0.5 * ds * (alpha(k - 1) + alpha(k));
  const double total = cumulative(k_count - 1);
  if (!(total > 0.0))
    throw DegenerateFieldError("synthetic flow speed integrates to zero");

  TrajectoryRecord record;
  record.kind = FlowKind::kSynthetic;
  record.transition = trans;
  record.s_max = s_max;
  record.converged = true;
  record.steps = k_count - 1;
  const double de_norm = time_weighted_norm(de.grid, de.amplitudes);
  for (int k = 0; k < k_count; ++k) {
    ControlField field = e0;
    field.amplitudes += (cumulative(k) / total) * de.amplitudes;
    const double p = transition_probability(system, field, trans);
    const double speed = (alpha(k) / total) * de_norm;  // ||dE/ds||_T
    record.snapshots.push_back(FlowSnapshot{k * ds, std::move(field), p, speed});
  }
  return record;
}

}  // namespace qcl
