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
#include "qcl/dynamics.hpp"

#include <cmath>
#include <complex>

#include "qcl/errors.hpp"

namespace qcl {

namespace {

using std::complex;
constexpr complex<double> kI(0.0, 1.0);

// sin(x)/x with the small-argument series; |x| stays O(dt * spectral gap).
double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

// Propagation kernel, templated on the compile-time dimension so the
// five-level benchmark runs on fixed-size matrices. NS = Eigen::Dynamic
// is the fallback for arbitrary N.
template <int NS>
struct Kernel {
  using Mat = Eigen::Matrix<double, NS, NS>;
  using Vec = Eigen::Matrix<double, NS, 1>;
  using CMat = Eigen::Matrix<complex<double>, NS, NS>;
  using CVec = Eigen::Matrix<complex<double>, NS, 1>;

  Vec h0;
  Mat mu;
  int n;

  Kernel(const SystemSpec& system)
      : h0(system.h0), mu(system.dipole), n(system.dim()) {}

  Mat step_hamiltonian(double e_mid) const {
    Mat h = (-e_mid) * mu;
    h.diagonal() += h0;
    return h;
  }

  // Applies exp(-i H dt) to psi given the eigendecomposition of H.
  void push(const Mat& evec, const Vec& eval, double dt, CVec& psi) const {
    CVec w = evec.transpose() * psi;
    for (int a = 0; a < n; ++a) w(a) *= std::exp(-kI * eval(a) * dt);
    psi = evec * w;
  }

  double probability_only(const ControlField& field, int i0, int f0) const {
    const double dt = field.grid.dt();
    const int m = field.grid.intervals;
    Eigen::SelfAdjointEigenSolver<Mat> es;
    CVec psi = CVec::Zero(n);
    psi(i0) = 1.0;
    for (int k = 0; k < m; ++k) {
      const double e_mid = 0.5 * (field.amplitudes(k) + field.amplitudes(k + 1));
      es.compute(step_hamiltonian(e_mid));
      push(es.eigenvectors(), es.eigenvalues(), dt, psi);
    }
    return std::norm(psi(f0));
  }

  // Forward pass storing per-interval eigensystems and states, then a
  // backward adjoint pass. A_k = dP/d(midpoint value of interval k) via the
  // exact Frechet derivative of the step exponential:
  //   dU_k/de = V [ (i dt W) .* Phi ] V^T,  W = V^T mu V,
  //   Phi_ab = exp(-i (l_a + l_b) dt / 2) sinc((l_a - l_b) dt / 2).
  // Node gradients are the adjacent-interval densities averaged (single
  // adjacent interval at the grid ends), matching the chain rule through
  // the midpoint sampling and the trapezoid weight of each node.
  double gradient_pass(const ControlField& field, int i0, int f0,
                       Eigen::VectorXd& grad) const {
    const double dt = field.grid.dt();
    const int m = field.grid.intervals;
    Eigen::SelfAdjointEigenSolver<Mat> es;

    std::vector<Mat> evecs(m);
    std::vector<Vec> evals(m);
    std::vector<CVec> psis(m + 1);
    psis[0] = CVec::Zero(n);
    psis[0](i0) = 1.0;
    for (int k = 0; k < m; ++k) {
      const double e_mid = 0.5 * (field.amplitudes(k) + field.amplitudes(k + 1));
      es.compute(step_hamiltonian(e_mid));
      evecs[k] = es.eigenvectors();
      evals[k] = es.eigenvalues();
      psis[k + 1] = psis[k];
      push(evecs[k], evals[k], dt, psis[k + 1]);
    }
    const complex<double> c = psis[m](f0);
    const double p = std::norm(c);

    // a_k = U^T(T, t_{k+1}) |f>; each step propagator is complex symmetric
    // (V real, diagonal phase), so the row adjoint propagates with U itself.
    // Phi factors through half-step phases q_a = exp(-i l_a dt / 2):
    // Phi_ab = q_a q_b sinc((l_a - l_b) dt / 2).
    Eigen::VectorXd interval_density(m);
    CVec a = CVec::Zero(n);
    a(f0) = 1.0;
    Mat w_mat(n, n);
    CVec q(n);
    for (int k = m - 1; k >= 0; --k) {
      const Mat& v = evecs[k];
      const Vec& lam = evals[k];
      CVec va = v.transpose() * a;
      CVec vp = v.transpose() * psis[k];
      w_mat.noalias() = v.transpose() * mu * v;
      for (int ia = 0; ia < n; ++ia) q(ia) = std::exp(-kI * (0.5 * dt * lam(ia)));
      const CVec u = va.cwiseProduct(q);
      const CVec w = vp.cwiseProduct(q);
      complex<double> val(0.0, 0.0);
      for (int ia = 0; ia < n; ++ia) {
        complex<double> row(0.0, 0.0);
        for (int ib = 0; ib < n; ++ib)
          row += w_mat(ia, ib) * sinc(0.5 * dt * (lam(ia) - lam(ib))) * w(ib);
        val += u(ia) * row;
      }
      val *= kI * dt;
      interval_density(k) = 2.0 * std::real(std::conj(c) * val) / dt;
      for (int ia = 0; ia < n; ++ia) va(ia) *= q(ia) * q(ia);
      a = v * va;
    }

    grad.resize(m + 1);
    grad(0) = interval_density(0);
    grad(m) = interval_density(m - 1);
    for (int j = 1; j < m; ++j)
      grad(j) = 0.5 * (interval_density(j - 1) + interval_density(j));
    return p;
  }

  void unitaries(const ControlField& field, bool keep_history,
                 PropagationResult& out) const {
    const double dt = field.grid.dt();
    const int m = field.grid.intervals;
    Eigen::SelfAdjointEigenSolver<Mat> es;
    CMat u = CMat::Identity(n, n);
    if (keep_history) {
      out.history.clear();
      out.history.reserve(m + 1);
      out.history.push_back(u);
    }
    for (int k = 0; k < m; ++k) {
      const double e_mid = 0.5 * (field.amplitudes(k) + field.amplitudes(k + 1));
      es.compute(step_hamiltonian(e_mid));
      const Mat& v = es.eigenvectors();
      const Vec& lam = es.eigenvalues();
      CMat w = v.transpose() * u;
      for (int a = 0; a < n; ++a) w.row(a) *= std::exp(-kI * lam(a) * dt);
      u.noalias() = v * w;
      if (keep_history) out.history.push_back(u);
    }
    out.final_propagator = u;
  }

  Eigen::MatrixXd populations(const ControlField& field, int i0) const {
    const double dt = field.grid.dt();
    const int m = field.grid.intervals;
    Eigen::SelfAdjointEigenSolver<Mat> es;
    Eigen::MatrixXd pop(m + 1, n);
    CVec psi = CVec::Zero(n);
    psi(i0) = 1.0;
    for (int j = 0; j < n; ++j) pop(0, j) = std::norm(psi(j));
    for (int k = 0; k < m; ++k) {
      const double e_mid = 0.5 * (field.amplitudes(k) + field.amplitudes(k + 1));
      es.compute(step_hamiltonian(e_mid));
      push(es.eigenvectors(), es.eigenvalues(), dt, psi);
      for (int j = 0; j < n; ++j) pop(k + 1, j) = std::norm(psi(j));
    }
    return pop;
  }
};

template <class F>
auto dispatch(int n, F&& f) {
  switch (n) {
    case 2:
      return f(std::integral_constant<int, 2>{});
    case 5:
      return f(std::integral_constant<int, 5>{});
    default:
      return f(std::integral_constant<int, Eigen::Dynamic>{});
  }
}

void check_inputs(const SystemSpec& system, const ControlField& field) {
  system.validate();
  field.validate();
}

void check_transition(const SystemSpec& system, const TransitionSpec& trans) {
  trans.validate(system.dim());
}

}  // namespace

void TimeGrid::validate() const {
  if (!(total_time > 0.0) || intervals < 1)
    throw InvalidSpecError("time grid requires T > 0 and at least one interval");
}

void SystemSpec::validate() const {
  const int n = dim();
  if (n < 2) throw InvalidSpecError("system dimension must be at least 2");
  if (dipole.rows() != n || dipole.cols() != n)
    throw InvalidSpecError("dipole matrix shape does not match H0 dimension");
  if (!h0.allFinite() || !dipole.allFinite())
    throw InvalidSpecError("system matrices must be finite");
  for (int j = 0; j < n; ++j)
    if (dipole(j, j) != 0.0)
      throw InvalidSpecError("dipole diagonal must be zero");
  if (!dipole.isApprox(dipole.transpose(), 0.0))
    throw InvalidSpecError("dipole matrix must be symmetric");
}

void ControlField::validate() const {
  grid.validate();
  if (amplitudes.size() != grid.samples())
    throw GridMismatchError("field length does not match grid sample count");
  if (!amplitudes.allFinite())
    throw NonFiniteFieldError("field contains non-finite amplitudes");
}

void TransitionSpec::validate(int dim) const {
  if (initial < 1 || initial > dim || final_state < 1 || final_state > dim)
    throw InvalidSpecError("transition state indices must lie in [1, N]");
  if (initial == final_state)
    throw InvalidSpecError("transition requires distinct initial and final states");
}

void FieldParametrization::validate() const {
  for (double a : amplitudes)
    if (!(a >= 0.0) || !(a <= 1.0) || !std::isfinite(a))
      throw InvalidSpecError("field amplitudes a_n must lie in [0, 1]");
  for (double p : phases)
    if (!std::isfinite(p))
      throw InvalidSpecError("field phases must be finite");
}

double PropagationResult::probability(const TransitionSpec& trans) const {
  const int i0 = trans.initial - 1;
  const int f0 = trans.final_state - 1;
  double p = std::norm(final_propagator(f0, i0));
  if (p > 1.0) {
    if (p - 1.0 > 1e-12)
      throw ProbabilityOvershootError("transition probability exceeds 1 beyond tolerance");
    p = 1.0;
  }
  return p;
}

PropagationResult propagate(const SystemSpec& system, const ControlField& field,
                            bool keep_history) {
  check_inputs(system, field);
  PropagationResult out;
  dispatch(system.dim(), [&](auto ns) {
    Kernel<decltype(ns)::value> kernel(system);
    kernel.unitaries(field, keep_history, out);
    return 0;
  });
  return out;
}

double transition_probability(const SystemSpec& system, const ControlField& field,
                              const TransitionSpec& trans) {
  check_inputs(system, field);
  check_transition(system, trans);
  double p = dispatch(system.dim(), [&](auto ns) {
    Kernel<decltype(ns)::value> kernel(system);
    return kernel.probability_only(field, trans.initial - 1, trans.final_state - 1);
  });
  if (p > 1.0) {
    if (p - 1.0 > 1e-12)
      throw ProbabilityOvershootError("transition probability exceeds 1 beyond tolerance");
    p = 1.0;
  }
  return p;
}

Eigen::VectorXd gradient(const SystemSpec& system, const ControlField& field,
                         const TransitionSpec& trans) {
  return evaluate(system, field, trans).gradient;
}

Evaluation evaluate(const SystemSpec& system, const ControlField& field,
                    const TransitionSpec& trans) {
  check_inputs(system, field);
  check_transition(system, trans);
  Evaluation ev;
  ev.probability = dispatch(system.dim(), [&](auto ns) {
    Kernel<decltype(ns)::value> kernel(system);
    return kernel.gradient_pass(field, trans.initial - 1, trans.final_state - 1,
                                ev.gradient);
  });
  if (ev.probability > 1.0) {
    if (ev.probability - 1.0 > 1e-12)
      throw ProbabilityOvershootError("transition probability exceeds 1 beyond tolerance");
    ev.probability = 1.0;
  }
  return ev;
}

ControlField synthesize_field(const FieldParametrization& params, const TimeGrid& grid) {
  grid.validate();
  params.validate();
  const int samples = grid.samples();
  const double half_t = 0.5 * grid.total_time;
  ControlField field{grid, Eigen::VectorXd(samples)};
  for (int j = 0; j < samples; ++j) {
    const double t = grid.time_at(j);
    double series = 0.0;
    for (int nn = 1; nn <= FieldParametrization::components; ++nn)
      series += params.amplitudes[nn - 1] * std::sin(nn * t + params.phases[nn - 1]);
    const double envelope =
        std::exp(-FieldParametrization::envelope_width * (t - half_t) * (t - half_t));
    field.amplitudes(j) = envelope * series;
  }
  const double peak = field.amplitudes.cwiseAbs().maxCoeff();
  if (peak <= 0.0)
    throw DegenerateFieldError("all field components vanish; normalization undefined");
  field.amplitudes /= peak;
  return field;
}

FieldParametrization random_parametrization(Rng& rng) {
  FieldParametrization params;
  for (int nn = 0; nn < FieldParametrization::components; ++nn)
    params.amplitudes[nn] = rng.uniform();
  for (int nn = 0; nn < FieldParametrization::components; ++nn)
    params.phases[nn] = rng.uniform(0.0, 2.0 * M_PI);
  return params;
}

Eigen::MatrixXd random_dipole(DipoleScenario scenario, std::uint64_t sign_seed) {
  const int n = 5;
  Eigen::MatrixXd magnitude = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      switch (scenario) {
        case DipoleScenario::kStandard:
          magnitude(j, k) = std::pow(0.5, std::abs(j - k) - 1);
          break;
        case DipoleScenario::kFree:
          magnitude(j, k) = 1.0;
          break;
        case DipoleScenario::kRestricted:
          magnitude(j, k) = (std::abs(j - k) == 1) ? 1.0 : 0.0;
          break;
      }
    }
  }
  Rng rng(derive_seed(sign_seed, stream_tag("dipole-signs")));
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const double sign = rng.coin() ? 1.0 : -1.0;
      mu(j, k) = sign * magnitude(j, k);
      mu(k, j) = mu(j, k);
    }
  }
  return mu;
}

Eigen::VectorXd five_level_energies() {
  Eigen::VectorXd h0(5);
  h0 << -10.0, -7.0, -3.0, 2.0, 8.0;
  return h0;
}

SystemSpec five_level_system(DipoleScenario scenario, std::uint64_t sign_seed) {
  return SystemSpec{five_level_energies(), random_dipole(scenario, sign_seed)};
}

Eigen::MatrixXd population_dynamics(const SystemSpec& system, const ControlField& field,
                                    int initial_state) {
  check_inputs(system, field);
  if (initial_state < 1 || initial_state > system.dim())
    throw InvalidSpecError("initial state index out of range");
  return dispatch(system.dim(), [&](auto ns) -> Eigen::MatrixXd {
    Kernel<decltype(ns)::value> kernel(system);
    return kernel.populations(field, initial_state - 1);
  });
}

double time_weighted_norm_sq(const TimeGrid& grid, const Eigen::VectorXd& values) {
  return values.squaredNorm() * grid.dt() / grid.total_time;
}

double time_weighted_norm(const TimeGrid& grid, const Eigen::VectorXd& values) {
  return std::sqrt(time_weighted_norm_sq(grid, values));
}

const char* to_string(DipoleScenario s) {
  switch (s) {
    case DipoleScenario::kStandard:
      return "standard";
    case DipoleScenario::kFree:
      return "free";
    case DipoleScenario::kRestricted:
      return "restricted";
  }
  return "standard";
}

DipoleScenario dipole_scenario_from_string(const std::string& name) {
  if (name == "standard") return DipoleScenario::kStandard;
  if (name == "free") return DipoleScenario::kFree;
  if (name == "restricted") return DipoleScenario::kRestricted;
  throw InvalidSpecError("unknown dipole scenario: " + name);
}

}  // namespace qcl
