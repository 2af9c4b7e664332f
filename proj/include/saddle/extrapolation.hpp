#pragma once

#include <string>
#include <vector>

#include "saddle/dynamics.hpp"
#include "saddle/types.hpp"

namespace saddle {

/// One step-halving extrapolated state on the coarse grid. The combined
/// directions are deliberately left un-renormalized.
struct ExtrapolatedState {
  long n = 0;
  double t = 0.0;
  Vec x;
  RawFrame directions;
};

struct ExtrapolatedTrajectory {
  SaddleConfig coarse_config;
  std::string problem;
  double coarse_tau = 0.0;
  double fine_tau = 0.0;
  std::vector<ExtrapolatedState> states;

  long step_count() const { return static_cast<long>(states.size()) - 1; }
};

/// Combines a coarse run and its step-halved twin pointwise on the coarse
/// grid: 2 * fine(2n) - coarse(n) for both position and each direction.
/// The two runs must share problem, index, rates, horizon, and initial state,
/// and the fine step must be exactly half the coarse one. Each run keeps its
/// own dimer length schedule.
ExtrapolatedTrajectory richardson_combine(const Trajectory& coarse, const Trajectory& fine);

/// Orthonormalized view of an extrapolated frame, for consumers that need one.
OrthonormalFrame orthonormalized_directions(const ExtrapolatedState& state);

}  // namespace saddle
