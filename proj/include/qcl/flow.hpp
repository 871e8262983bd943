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
#ifndef QCL_FLOW_HPP
#define QCL_FLOW_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qcl/dynamics.hpp"

namespace qcl {

/// Controls for the gradient-flow integrator. The flow parameter s advances
/// with an adaptive explicit step: a step is accepted only when the
/// observable change is monotone (decrease <= 1e-12) and bounded by
/// `max_dp`; the step halves on rejection and grows by 1.25 after three
/// consecutive acceptances. The final step is bisected so the endpoint
/// lands within `endpoint_tol` of the target.
struct FlowConfig {
  double p_start = 0.01;
  double p_end = 0.99;
  double endpoint_tol = 1e-6;   // tau: endpoint window half-width
  double grad_floor = 1e-10;    // stall detection on ||g||_T
  double initial_step = 0.0;    // s-step h0; <= 0 selects max_dp / (2 ||g||_T^2)
  double max_dp = 5e-3;         // largest accepted observable change per step
  long max_steps = 200000;
  int snapshot_stride = 1;      // record every k-th accepted step

  void validate() const;
};

enum class FlowKind { kGradientClimb, kSynthetic };

/// One recorded point along a control-space trajectory.
struct FlowSnapshot {
  double s;
  ControlField field;
  double probability;
  double grad_norm;  // ||g||_T at this field (flow speed for synthetic runs)
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string label;
};

/// Ordered snapshots of one flow through control space. Snapshots always
/// include the first and the last accepted state.
struct TrajectoryRecord {
  FlowKind kind = FlowKind::kGradientClimb;
  std::vector<FlowSnapshot> snapshots;
  double s_max = 0.0;
  bool converged = false;
  long steps = 0;       // accepted steps
  long rejections = 0;  // halved trial steps
  TransitionSpec transition;
  Provenance provenance;
};

/// Move a trial field onto the common start of the landscape: descend along
/// -g when P > P_start, ascend along +g when below, and bisect the final
/// step into [P_start - tol, P_start + tol]. A field already inside the
/// window is returned unchanged. Throws FlowStallError when the gradient
/// vanishes first (critical-point start such as E = 0).
ControlField normalize_to_start(const SystemSpec& system, const TransitionSpec& trans,
                                const ControlField& trial, const FlowConfig& config);

/// Gradient flow dE/ds = g from a start normalized to P_start up to P_end.
/// The accepted-step observable sequence is monotone nondecreasing within
/// 1e-12 and the endpoint lands within `endpoint_tol` of P_end. A start
/// already at P_end yields a zero-length converged record.
TrajectoryRecord climb(const SystemSpec& system, const TransitionSpec& trans,
                       const ControlField& start, const FlowConfig& config,
                       const Provenance& provenance = {});

/// Straight reference trajectory E(s,t) = E0(t) + Gamma(s) dE(t), where
/// Gamma is the normalized cumulative integral of the nonnegative speed
/// samples alpha over [0, s_max] (Gamma(s_max) = 1). Observable values are
/// evaluated along the way but do not steer the flow; this is the exact
/// R = 1 reference for the metrics module.
TrajectoryRecord straight_flow_synthetic(const SystemSpec& system,
                                         const TransitionSpec& trans,
                                         const ControlField& e0, const ControlField& de,
                                         const Eigen::VectorXd& alpha,
                                         double s_max = 1.0);

}  // namespace qcl

#endif  // QCL_FLOW_HPP
