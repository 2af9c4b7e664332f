#pragma once

#include <string>
#include <utility>
#include <vector>

#include "saddle/problem.hpp"
#include "saddle/types.hpp"

namespace saddle {

/// Run configuration for one explicit-Euler trajectory.
struct SaddleConfig {
  int k = 1;          ///< saddle index: number of unstable directions tracked
  double beta = 1.0;  ///< position relaxation rate
  double gamma = 1.0; ///< direction relaxation rate
  double T = 1.0;     ///< final time
  double tau = 0.0;   ///< step size; must divide T evenly
  double l0 = 0.0;    ///< initial dimer half-length; 0 means sqrt(tau)
  ProblemKind mode = ProblemKind::gradient; ///< which direction update to use

  /// Throws input_error on invalid parameters.
  void validate() const;

  /// Number of steps K with K * tau == T; throws if T is not a multiple of tau.
  long step_count() const;

  /// l0 if positive, else sqrt(tau).
  double l0_effective() const;
};

/// Full state after n steps.
struct SaddleState {
  long n = 0;
  double t = 0.0;
  Vec x;
  OrthonormalFrame frame;
  DimerLength l;
};

/// Per-step diagnostics, recorded before orthonormalization snaps the frame back.
struct StepDiagnostics {
  double max_cross = 0.0;         ///< max |v_m . v_i| over m < i, pre-orthonormalization
  double max_norm_defect = 0.0;   ///< max | ||v_i||^2 - 1 |, pre-orthonormalization
  double max_gs_correction = 0.0; ///< max ||v_i - v_i_raw|| applied by orthonormalization
  double residual = 0.0;          ///< ||F(x)|| at the new position
};

/// A computed trajectory: states[0] is the initial state, states[n] the state
/// after n steps; diagnostics[n-1] describes the step producing states[n].
struct Trajectory {
  SaddleConfig config;
  std::string problem;
  std::vector<SaddleState> states;
  std::vector<StepDiagnostics> diagnostics;

  long step_count() const { return static_cast<long>(states.size()) - 1; }
};

/// ||F(x)|| at a state.
double saddle_residual(const Problem& problem, const SaddleState& state);

/// Validates starting data against problem and config and assembles step-0 state.
/// The frame must already be orthonormal to 1e-12; l0 conflicts are rejected.
SaddleState make_initial_state(const Problem& problem, const SaddleConfig& config,
                               const InitialCondition& ic);

/// One explicit step of the gradient-flavored scheme. Position moves along the
/// reflected force; each direction moves along its stably projected dimer
/// curvature; the frame is then re-orthonormalized and the dimer length is
/// evaluated analytically at the new time.
std::pair<SaddleState, StepDiagnostics> step_gradient(const Problem& problem,
                                                      const SaddleConfig& config,
                                                      const SaddleState& state);

/// One explicit step of the non-gradient scheme: same position update, but the
/// direction update couples each pair through the symmetrized projector, with
/// each dimer value computed once and shared.
std::pair<SaddleState, StepDiagnostics> step_nongradient(const Problem& problem,
                                                         const SaddleConfig& config,
                                                         const SaddleState& state);

/// Runs K = T / tau steps from the given starting data. Throws input_error on
/// bad configuration, divergence_error if ||x|| exceeds kDivergenceNorm or goes
/// non-finite, degenerate_frame_error (with the step attached) if the raw frame
/// collapses.
Trajectory integrate(const Problem& problem, const SaddleConfig& config,
                     const InitialCondition& ic);

}  // namespace saddle
