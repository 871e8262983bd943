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
#include "qcl/pso.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "qcl/errors.hpp"

namespace qcl {

namespace {

constexpr int kDims = 2 * FieldParametrization::components;

double worst_objective(ObjectiveSense sense) {
  return sense == ObjectiveSense::kMinimize ? std::numeric_limits<double>::infinity()
                                            : -std::numeric_limits<double>::infinity();
}

bool better(double a, double b, ObjectiveSense sense) {
  return sense == ObjectiveSense::kMinimize ? a < b : a > b;
}

double mean_pairwise_distance(const std::vector<Particle>& particles) {
  if (particles.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < particles.size(); ++i)
    for (std::size_t j = i + 1; j < particles.size(); ++j) {
      sum += (particles[i].position - particles[j].position).norm();
      ++pairs;
    }
  return sum / static_cast<double>(pairs);
}

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

void PsoConfig::validate() const {
  if (swarm_size < 1) throw InvalidSpecError("swarm needs at least one particle");
  if (generations < 1) throw InvalidSpecError("swarm needs at least one generation");
  if (pso_inertia(generations) <= 0.0)
    throw InvalidSpecError("inertia schedule must stay positive through the last generation");
  if (threads < 1) throw InvalidSpecError("thread count must be positive");
}

double pso_inertia(int generation) { return 0.9 - (generation - 1) / 150.0; }

void pso_bounds(Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
  lo = Eigen::VectorXd::Zero(kDims);
  hi = Eigen::VectorXd::Zero(kDims);
  for (int d = 0; d < FieldParametrization::components; ++d) {
    hi(d) = 1.0;
    hi(FieldParametrization::components + d) = 2.0 * M_PI;
  }
}

FieldParametrization position_to_parametrization(const Eigen::VectorXd& position) {
  if (position.size() != kDims)
    throw InvalidSpecError("particle position must have 40 dimensions");
  FieldParametrization params;
  for (int d = 0; d < FieldParametrization::components; ++d) {
    params.amplitudes[d] = position(d);
    params.phases[d] = position(FieldParametrization::components + d);
  }
  return params;
}

Eigen::VectorXd parametrization_to_position(const FieldParametrization& params) {
  Eigen::VectorXd position(kDims);
  for (int d = 0; d < FieldParametrization::components; ++d) {
    position(d) = params.amplitudes[d];
    position(FieldParametrization::components + d) = params.phases[d];
  }
  return position;
}

ParticleEvaluation evaluate_particle(const SystemSpec& system, const TransitionSpec& trans,
                                     const Eigen::VectorXd& position,
                                     const FlowConfig& flow_config, const TimeGrid& grid) {
  ParticleEvaluation outcome;
  try {
    const ControlField trial = synthesize_field(position_to_parametrization(position), grid);
    const ControlField start = normalize_to_start(system, trans, trial, flow_config);
    const TrajectoryRecord traj = climb(system, trans, start, flow_config);
    const RMetrics metrics = compute_r(traj);
    outcome.r = metrics.r;
    outcome.d_pl = metrics.d_pl;
    outcome.d_el = metrics.d_el;
    outcome.s_max = traj.s_max;
    outcome.steps = traj.steps;
    outcome.ok = true;
  } catch (const Error& e) {
    outcome.ok = false;
    outcome.failure = e.code();
  }
  return outcome;
}

Eigen::VectorXd velocity_update(const Particle& particle,
                                const Eigen::VectorXd& swarm_best, int generation,
                                const PsoConfig& config, Rng& rng) {
  const double c0 = pso_inertia(generation);
  Eigen::VectorXd v(kDims);
  for (int d = 0; d < kDims; ++d) {
    const double s1 = static_cast<double>(rng.coin());
    const double s2 = static_cast<double>(rng.coin());
    const double cognitive_pull =
        config.conventional_cognitive
            ? particle.best_position(d) - particle.position(d)
            : swarm_best(d) - particle.best_position(d);
    v(d) = c0 * particle.velocity(d) + config.cognitive * s1 * cognitive_pull +
           config.social * s2 * (swarm_best(d) - particle.position(d));
  }
  return v;
}

SwarmResult run_swarm(const SystemSpec& system, const TransitionSpec& trans,
                      const PsoConfig& config, const FlowConfig& flow_config,
                      const std::function<void(const GenerationSummary&)>& on_generation) {
  config.validate();
  flow_config.validate();

  Eigen::VectorXd lo, hi;
  pso_bounds(lo, hi);

  std::vector<Particle> particles(config.swarm_size);
  for (int k = 0; k < config.swarm_size; ++k) {
    Rng rng(derive_seed(config.seed, stream_tag("pso-init"), k));
    Particle& p = particles[k];
    p.position.resize(kDims);
    for (int d = 0; d < kDims; ++d) p.position(d) = rng.uniform(lo(d), hi(d));
    p.velocity = Eigen::VectorXd::Zero(kDims);
    p.best_position = p.position;
    p.best_objective = worst_objective(config.sense);
    p.current_objective = worst_objective(config.sense);
  }

  SwarmResult result;
  result.best_r = worst_objective(config.sense);
  result.best_position = particles.front().position;
  bool any_success = false;

  std::vector<ParticleEvaluation> outcomes(config.swarm_size);
  for (int g = 1; g <= config.generations; ++g) {
    parallel_for(config.swarm_size, config.threads, [&](int k) {
      outcomes[k] = evaluate_particle(system, trans, particles[k].position, flow_config,
                                      config.grid);
    });

    int gen_failures = 0;
    double gen_best = worst_objective(config.sense);
    for (int k = 0; k < config.swarm_size; ++k) {
      const double score =
          outcomes[k].ok ? outcomes[k].r : worst_objective(config.sense);
      if (!outcomes[k].ok) ++gen_failures;
      particles[k].current_objective = score;
      if (outcomes[k].ok && better(score, particles[k].best_objective, config.sense)) {
        particles[k].best_objective = score;
        particles[k].best_position = particles[k].position;
      }
      if (outcomes[k].ok && better(score, result.best_r, config.sense)) {
        result.best_r = score;
        result.best_position = particles[k].position;
        any_success = true;
      }
      if (outcomes[k].ok && better(score, gen_best, config.sense)) gen_best = score;
      result.log.push_back(EvaluationLogRow{g, k, score, result.best_r});
    }
    result.failures += gen_failures;
    if (gen_failures == config.swarm_size)
      throw Error("swarm-collapse", "every particle evaluation failed in one generation");

    GenerationSummary summary{g, gen_best, result.best_r,
                              mean_pairwise_distance(particles)};
    result.generations.push_back(summary);
    if (on_generation) on_generation(summary);

    if (g == config.generations) break;
    for (int k = 0; k < config.swarm_size; ++k) {
      Rng rng(derive_seed(config.seed, stream_tag("pso-velocity"),
                          static_cast<std::uint64_t>(g) * config.swarm_size + k));
      Particle& p = particles[k];
      // Particles without a personal best yet steer toward the swarm best.
      if (!std::isfinite(p.best_objective)) p.best_position = p.position;
      p.velocity = velocity_update(p, result.best_position, g, config, rng);
      p.position += p.velocity;
      p.position = p.position.cwiseMax(lo).cwiseMin(hi);
    }
  }

  if (!any_success)
    throw Error("swarm-collapse", "no particle evaluation succeeded");

  // Re-evaluate the winner to expose its full trajectory for analysis.
  const ControlField best_trial =
      synthesize_field(position_to_parametrization(result.best_position), config.grid);
  const ControlField best_start =
      normalize_to_start(system, trans, best_trial, flow_config);
  result.best_trajectory =
      climb(system, trans, best_start, flow_config,
            Provenance{config.seed, "pso-best"});
  return result;
}

}  // namespace qcl
