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
#ifndef QCL_DYNAMICS_HPP
#define QCL_DYNAMICS_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qcl/rng.hpp"

namespace qcl {

/// Uniform time grid on [0, T] with `intervals` equal steps, i.e.
/// intervals + 1 sample points t_j = j * T / intervals.
struct TimeGrid {
  double total_time = 10.0;
  int intervals = 1000;

  double dt() const { return total_time / intervals; }
  int samples() const { return intervals + 1; }
  double time_at(int j) const { return total_time * j / intervals; }
  bool operator==(const TimeGrid& o) const {
    return total_time == o.total_time && intervals == o.intervals;
  }
  void validate() const;
};

/// Closed N-level system in the dipole approximation: H(t) = H0 - mu E(t),
/// with diagonal field-free Hamiltonian H0 and real symmetric dipole matrix
/// mu with zero diagonal. hbar = 1 throughout (dimensionless units).
struct SystemSpec {
  Eigen::VectorXd h0;      // diagonal of H0
  Eigen::MatrixXd dipole;  // mu, symmetric, zero diagonal

  static constexpr double hbar = 1.0;
  int dim() const { return static_cast<int>(h0.size()); }
  void validate() const;
};

/// One point in control space: field amplitudes sampled on a time grid.
struct ControlField {
  TimeGrid grid;
  Eigen::VectorXd amplitudes;  // grid.samples() values

  void validate() const;
};

/// A state-to-state transition |i> -> |f|, 1-based state indices.
struct TransitionSpec {
  int initial = 1;
  int final_state = 5;

  void validate(int dim) const;
};

/// 20-component sine-series parametrization of a trial field under a
/// Gaussian envelope. Frequencies are fixed at omega_n = n; the phases are
/// per component (phi_n). After synthesis the field is scaled so that
/// max_j |E(t_j)| = 1 exactly.
struct FieldParametrization {
  static constexpr int components = 20;
  static constexpr double envelope_width = 0.3;

  std::array<double, components> amplitudes{};  // a_n in [0, 1]
  std::array<double, components> phases{};      // phi_n in [0, 2 pi]

  void validate() const;
};

/// Result of propagating the Schroedinger equation across the full grid.
/// `history`, when kept, holds the cumulative propagators U(t_j, 0) for
/// every grid point (samples() entries, history[0] = identity).
struct PropagationResult {
  Eigen::MatrixXcd final_propagator;
  std::vector<Eigen::MatrixXcd> history;

  double probability(const TransitionSpec& trans) const;
};

enum class DipoleScenario { kStandard, kFree, kRestricted };

/// Time-ordered propagation with the field treated as piecewise constant
/// per interval at the midpoint value (E_j + E_{j+1})/2. Each step is the
/// exact exponential of the step Hamiltonian via Hermitian
/// eigendecomposition, so every propagator is unitary to round-off.
PropagationResult propagate(const SystemSpec& system, const ControlField& field,
                            bool keep_history = false);

/// P_{i->f} = |<f|U(T,0)|i>|^2. Overshoot beyond [0,1] larger than 1e-12
/// signals a broken propagator and throws; smaller overshoot is clamped.
double transition_probability(const SystemSpec& system, const ControlField& field,
                              const TransitionSpec& trans);

/// Gradient of P_{i->f} with respect to the field sample at every grid
/// point, scaled as the functional-derivative density: g_j ~ dP/dE(t_j).
/// Computed as the exact derivative of the discretized propagation
/// (Frechet derivative of each step exponential, chain rule through the
/// midpoint sampling), divided by the trapezoid quadrature weight of node
/// j. Agrees with dP/dE(t) of the continuous dynamics to O(dt^2) and with
/// a central finite difference of the implementation to round-off.
Eigen::VectorXd gradient(const SystemSpec& system, const ControlField& field,
                         const TransitionSpec& trans);

/// Probability and gradient from one propagation pass.
struct Evaluation {
  double probability;
  Eigen::VectorXd gradient;
};
Evaluation evaluate(const SystemSpec& system, const ControlField& field,
                    const TransitionSpec& trans);

/// E(t_j) = (1/F) exp[-0.3 (t_j - T/2)^2] sum_n a_n sin(n t_j + phi_n),
/// F chosen so max_j |E(t_j)| = 1 exactly. Throws DegenerateFieldError when
/// the unnormalized field is identically zero.
ControlField synthesize_field(const FieldParametrization& params, const TimeGrid& grid);

/// Draw a_n ~ U[0,1] and phi_n ~ U[0,2 pi] (amplitudes first, then phases).
FieldParametrization random_parametrization(Rng& rng);

/// Five-level dipole matrices: |mu_jk| = 0.5^(|j-k|-1) (standard), all-one
/// magnitudes (free), or tridiagonal ones (restricted). Signs are drawn
/// once from the seed on the upper triangle and mirrored.
Eigen::MatrixXd random_dipole(DipoleScenario scenario, std::uint64_t sign_seed);

/// H0 = diag(-10, -7, -3, 2, 8).
Eigen::VectorXd five_level_energies();

/// The five-level benchmark system with the given dipole scenario.
SystemSpec five_level_system(DipoleScenario scenario, std::uint64_t sign_seed);

/// Populations P_{i->j}(t_k) for all j, one row per grid point. Row 0 is
/// the indicator of the initial state; every row sums to 1 within 1e-10.
Eigen::MatrixXd population_dynamics(const SystemSpec& system, const ControlField& field,
                                    int initial_state);

/// (1/T)-weighted time norm: ||x||_T = sqrt((1/T) sum_j x_j^2 dt).
double time_weighted_norm(const TimeGrid& grid, const Eigen::VectorXd& values);

/// Squared version of time_weighted_norm.
double time_weighted_norm_sq(const TimeGrid& grid, const Eigen::VectorXd& values);

const char* to_string(DipoleScenario s);
DipoleScenario dipole_scenario_from_string(const std::string& name);

}  // namespace qcl

#endif  // QCL_DYNAMICS_HPP
