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
#ifndef QCL_PSO_HPP
#define QCL_PSO_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "qcl/flow.hpp"
#include "qcl/metrics.hpp"

namespace qcl {

enum class ObjectiveSense { kMinimize, kMaximize };

/// Particle swarm over the 40-dimensional initial-field parameter space
/// (20 amplitudes in [0,1], then 20 phases in [0, 2 pi]). The objective of
/// a position is the path ratio R of a full normalize-and-climb evaluation
/// started from the synthesized field.
struct PsoConfig {
  int swarm_size = 50;
  int generations = 50;
  double cognitive = 0.5;  // C1
  double social = 1.5;     // C2
  ObjectiveSense sense = ObjectiveSense::kMinimize;
  // The printed velocity rule attracts the cognitive term toward
  // (swarm best - personal best); the conventional PSO form
  // (personal best - position) is available for comparison.
  bool conventional_cognitive = false;
  std::uint64_t seed = 1;
  int threads = 1;
  TimeGrid grid{};

  void validate() const;
};

/// Inertia schedule C0(g) = 0.9 - (g - 1) / 150.
double pso_inertia(int generation);

struct Particle {
  Eigen::VectorXd position;
  Eigen::VectorXd velocity;
  Eigen::VectorXd best_position;
  double best_objective;     // sense-respecting personal best
  double current_objective;  // evaluated R of the current position
};

/// Outcome of one normalize-and-climb evaluation.
struct ParticleEvaluation {
  double r = 0.0;
  double d_pl = 0.0;
  double d_el = 0.0;
  double s_max = 0.0;
  long steps = 0;
  bool ok = false;
  std::string failure;
};

struct EvaluationLogRow {
  int generation;
  int particle;
  double r;             // +-inf for failed evaluations, per sense
  double best_so_far;   // running best including this row
};

struct GenerationSummary {
  int generation;
  double best_r;        // best over the generation's evaluations
  double best_so_far;   // running best across generations
  double diversity;     // mean pairwise distance between positions
};

struct SwarmResult {
  Eigen::VectorXd best_position;
  double best_r;
  TrajectoryRecord best_trajectory;  // re-evaluated climb of the best position
  std::vector<EvaluationLogRow> log;
  std::vector<GenerationSummary> generations;
  long failures = 0;
};

/// Bounds of the parameter space, [lo, hi] per dimension.
void pso_bounds(Eigen::VectorXd& lo, Eigen::VectorXd& hi);

FieldParametrization position_to_parametrization(const Eigen::VectorXd& position);
Eigen::VectorXd parametrization_to_position(const FieldParametrization& params);

/// Synthesize, normalize to P_start, climb to P_end, and measure R.
/// Failures (degenerate field, stall) are reported in the outcome rather
/// than thrown; the caller scores them as the worst objective.
ParticleEvaluation evaluate_particle(const SystemSpec& system, const TransitionSpec& trans,
                                     const Eigen::VectorXd& position,
                                     const FlowConfig& flow_config,
                                     const TimeGrid& grid = {});

/// One velocity update: v' = C0(g) v + C1 S1 (swarm_best - personal_best)
///                          + C2 S2 (swarm_best - position),
/// with S1, S2 fresh 0/1 draws per dimension (S1 before S2, dimension
/// order). `conventional_cognitive` replaces the C1 term's difference with
/// (personal_best - position).
Eigen::VectorXd velocity_update(const Particle& particle,
                                const Eigen::VectorXd& swarm_best, int generation,
                                const PsoConfig& config, Rng& rng);

/// Full swarm run. Positions start uniform within bounds with zero
/// velocities; each generation evaluates all particles, updates bests,
/// then moves (positions clamped to bounds). The best-so-far objective is
/// monotone across generations. Reproducible bit-for-bit from the seed.
SwarmResult run_swarm(const SystemSpec& system, const TransitionSpec& trans,
                      const PsoConfig& config, const FlowConfig& flow_config,
                      const std::function<void(const GenerationSummary&)>& on_generation = {});

}  // namespace qcl

#endif  // QCL_PSO_HPP
