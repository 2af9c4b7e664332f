#include "saddle/dynamics.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "saddle/core.hpp"

namespace saddle {

void SaddleConfig::validate() const {
  if (k < 1) throw input_error("config: saddle index k must be >= 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw input_error("config: beta must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw input_error("config: gamma must be positive");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw input_error("config: tau must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw input_error("config: T must be non-negative");
  if (!(l0 >= 0.0) || !std::isfinite(l0)) throw input_error("config: l0 must be non-negative");
}

long SaddleConfig::step_count() const {
  const long k_steps = std::lround(T / tau);
  if (k_steps < 0 || std::abs(static_cast<double>(k_steps) * tau - T) >
                         1e-9 * std::max(1.0, std::abs(T))) {
    throw input_error("config: T must be an integer multiple of tau");
  }
  return k_steps;
}

double SaddleConfig::l0_effective() const { return l0 > 0.0 ? l0 : std::sqrt(tau); }

double saddle_residual(const Problem& problem, const SaddleState& state) {
  return eval_force(problem, state.x).norm();
}

SaddleState make_initial_state(const Problem& problem, const SaddleConfig& config,
                               const InitialCondition& ic) {
  const int n = problem.dimension;
  if (ic.x0.size() != n) {
    throw input_error("initial condition: x0 has dimension " + std::to_string(ic.x0.size()) +
                      ", problem \"" + problem.name + "\" has N=" + std::to_string(n));
  }
  if (config.k > n) {
    throw input_error("config: saddle index k=" + std::to_string(config.k) +
                      " exceeds problem dimension N=" + std::to_string(n));
  }
  if (ic.frame0.size() != static_cast<std::size_t>(config.k)) {
    throw input_error("initial condition: frame has " + std::to_string(ic.frame0.size()) +
                      " directions, config asks for k=" + std::to_string(config.k));
  }
  for (const Vec& v : ic.frame0.vectors) {
    if (v.size() != n) throw input_error("initial condition: frame vector of wrong dimension");
  }
  const double defect = ic.frame0.max_defect();
  if (defect > 1e-12) {
    throw input_error("initial condition: frame is not orthonormal (defect " +
                      std::to_string(defect) + "); orthonormalize it first");
  }

  double l0 = config.l0_effective();
  if (ic.l0 > 0.0) {
    if (config.l0 > 0.0 && ic.l0 != config.l0) {
      throw input_error("initial condition: l0 conflicts with the run configuration's l0");
    }
    if (config.l0 == 0.0) l0 = ic.l0;
  }

  SaddleState state;
  state.n = 0;
  state.t = 0.0;
  state.x = ic.x0;
  state.frame = ic.frame0;
  state.l.value = l0;
  state.l.initial = l0;
  return state;
}

namespace {

// Shared tail of both step flavors: diagnose the raw frame, orthonormalize,
// advance time, and re-evaluate the dimer length on the analytic decay curve.
std::pair<SaddleState, StepDiagnostics> finish_step(const Problem& problem,
                                                    const SaddleConfig& config,
                                                    const SaddleState& state, Vec x_next,
                                                    RawFrame raw) {
  StepDiagnostics diag;
  for (std::size_t i = 0; i < raw.vectors.size(); ++i) {
    diag.max_norm_defect =
        std::max(diag.max_norm_defect, std::abs(raw.vectors[i].squaredNorm() - 1.0));
    for (std::size_t m = 0; m < i; ++m) {
      diag.max_cross = std::max(diag.max_cross, std::abs(raw.vectors[m].dot(raw.vectors[i])));
    }
  }

  GramSchmidtResult gs = gram_schmidt(raw);
  for (double c : gs.correction_norms) diag.max_gs_correction = std::max(diag.max_gs_correction, c);

  SaddleState next;
  next.n = state.n + 1;
  next.t = static_cast<double>(next.n) * config.tau;
  next.x = std::move(x_next);
  next.frame = std::move(gs.frame);
  next.l.initial = state.l.initial;
  next.l.value = dimer_length_at(next.t, state.l.initial);

  diag.residual = eval_force(problem, next.x).norm();
  return {std::move(next), diag};
}

}  // namespace

std::pair<SaddleState, StepDiagnostics> step_gradient(const Problem& problem,
                                                      const SaddleConfig& config,
                                                      const SaddleState& state) {
  const Vec f = eval_force(problem, state.x);
  Vec x_next = state.x + config.tau * config.beta * householder_apply(state.frame, f);

  RawFrame raw;
  raw.vectors.reserve(state.frame.size());
  for (std::size_t i = 0; i < state.frame.size(); ++i) {
    const Vec h = dimer_hessian_apply(problem, state.x, state.frame.vectors[i], state.l.value);
    raw.vectors.push_back(state.frame.vectors[i] +
                          config.tau * config.gamma * stable_projector_apply(state.frame, i, h));
  }
  return finish_step(problem, config, state, std::move(x_next), std::move(raw));
}

std::pair<SaddleState, StepDiagnostics> step_nongradient(const Problem& problem,
                                                         const SaddleConfig& config,
                                                         const SaddleState& state) {
  const Vec f = eval_force(problem, state.x);
  Vec x_next = state.x + config.tau * config.beta * householder_apply(state.frame, f);

  // Each dimer value is computed once and shared across the coupled updates.
  std::vector<Vec> h_list;
  h_list.reserve(state.frame.size());
  for (const Vec& v : state.frame.vectors) {
    h_list.push_back(dimer_hessian_apply(problem, state.x, v, state.l.value));
  }

  RawFrame raw;
  raw.vectors.reserve(state.frame.size());
  for (std::size_t i = 0; i < state.frame.size(); ++i) {
    raw.vectors.push_back(
        state.frame.vectors[i] +
        config.tau * config.gamma *
            symmetrized_projector_apply(state.frame, i, std::span<const Vec>(h_list)));
  }
  return finish_step(problem, config, state, std::move(x_next), std::move(raw));
}

Trajectory integrate(const Problem& problem, const SaddleConfig& config,
                     const InitialCondition& ic) {
  config.validate();
  if (config.mode != problem.kind) {
    throw input_error(std::string("config: scheme mode \"") + to_string(config.mode) +
                      "\" does not match problem \"" + problem.name + "\" (" +
                      to_string(problem.kind) + ")");
  }
  const long k_steps = config.step_count();

  Trajectory traj;
  traj.config = config;
  traj.problem = problem.name;
  traj.states.reserve(static_cast<std::size_t>(k_steps) + 1);
  traj.diagnostics.reserve(static_cast<std::size_t>(k_steps));
  traj.states.push_back(make_initial_state(problem, config, ic));

  auto step = config.mode == ProblemKind::gradient ? step_gradient : step_nongradient;
  for (long n = 1; n <= k_steps; ++n) {
    std::pair<SaddleState, StepDiagnostics> result;
    try {
      result = step(problem, config, traj.states.back());
    } catch (const degenerate_frame_error& e) {
      if (e.step() >= 0) throw;
      throw degenerate_frame_error(std::string(e.what()) + " (step " + std::to_string(n) + ")", n);
    }
    if (!result.first.x.allFinite() || result.first.x.norm() > kDivergenceNorm) {
      throw divergence_error("position norm exceeded " + std::to_string(kDivergenceNorm) +
                                 " at step " + std::to_string(n) +
                                 " (tau=" + std::to_string(config.tau) + ")",
                             n);
    }
    traj.states.push_back(std::move(result.first));
    traj.diagnostics.push_back(result.second);
  }
  return traj;
}

}  // namespace saddle
