#include "saddle/extrapolation.hpp"

#include <cstddef>
#include <string>

#include "saddle/core.hpp"

namespace saddle {

namespace {

bool same_vec(const Vec& a, const Vec& b) { return a.size() == b.size() && a == b; }

}  // namespace

ExtrapolatedTrajectory richardson_combine(const Trajectory& coarse, const Trajectory& fine) {
  if (coarse.problem != fine.problem) {
    throw input_error("extrapolation: runs solve different problems (\"" + coarse.problem +
                      "\" vs \"" + fine.problem + "\")");
  }
  const SaddleConfig& cc = coarse.config;
  const SaddleConfig& fc = fine.config;
  if (fc.tau != cc.tau / 2.0) {
    throw input_error("extrapolation: fine step must be exactly half the coarse step");
  }
  if (cc.T != fc.T || cc.k != fc.k || cc.beta != fc.beta || cc.gamma != fc.gamma ||
      cc.mode != fc.mode) {
    throw input_error("extrapolation: runs must share k, beta, gamma, T, and mode");
  }
  if (coarse.states.empty() || fine.states.empty() ||
      fine.step_count() != 2 * coarse.step_count()) {
    throw input_error("extrapolation: fine run must have exactly twice as many steps");
  }
  const SaddleState& c0 = coarse.states.front();
  const SaddleState& f0 = fine.states.front();
  bool same_start = same_vec(c0.x, f0.x) && c0.frame.size() == f0.frame.size();
  for (std::size_t i = 0; same_start && i < c0.frame.size(); ++i) {
    same_start = same_vec(c0.frame.vectors[i], f0.frame.vectors[i]);
  }
  if (!same_start) {
    throw input_error("extrapolation: runs must start from the same position and frame");
  }

  ExtrapolatedTrajectory out;
  out.coarse_config = cc;
  out.problem = coarse.problem;
  out.coarse_tau = cc.tau;
  out.fine_tau = fc.tau;
  out.states.reserve(coarse.states.size());

  for (std::size_t n = 0; n < coarse.states.size(); ++n) {
    const SaddleState& cs = coarse.states[n];
    const SaddleState& fs = fine.states[2 * n];
    ExtrapolatedState es;
    es.n = cs.n;
    es.t = cs.t;
    es.x = 2.0 * fs.x - cs.x;
    es.directions.vectors.reserve(cs.frame.size());
    for (std::size_t i = 0; i < cs.frame.size(); ++i) {
      es.directions.vectors.push_back(2.0 * fs.frame.vectors[i] - cs.frame.vectors[i]);
    }
    out.states.push_back(std::move(es));
  }
  return out;
}

OrthonormalFrame orthonormalized_directions(const ExtrapolatedState& state) {
  return gram_schmidt(state.directions).frame;
}

}  // namespace saddle
