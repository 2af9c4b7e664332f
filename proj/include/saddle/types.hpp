#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace saddle {

/// Dense position / direction vector in R^N (model units).
using Vec = Eigen::VectorXd;

/// Default tolerance for frame-invariant checks. Construction-time frames are
/// re-orthonormalized rather than trusted; this bound is what emitted frames
/// are held to.
inline constexpr double kDefaultOrthoTol = 1e-10;

/// Solution-norm bound past which the integrator declares divergence.
inline constexpr double kDivergenceNorm = 1e8;

/// Malformed input: dimension mismatches, bad indices, invalid configuration.
class input_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Name not present in the problem registry.
class lookup_error : public input_error {
public:
  using input_error::input_error;
};

/// Gram-Schmidt met a (numerically) linearly dependent raw frame. When thrown
/// from inside an integration the step index is attached.
class degenerate_frame_error : public std::runtime_error {
public:
  explicit degenerate_frame_error(const std::string& msg, long step = -1)
      : std::runtime_error(msg), step_(step) {}
  long step() const noexcept { return step_; }

private:
  long step_;
};

/// Solution norm exceeded the divergence guard at step `step`.
class divergence_error : public std::runtime_error {
public:
  divergence_error(const std::string& msg, long step)
      : std::runtime_error(msg), step_(step) {}
  long step() const noexcept { return step_; }

private:
  long step_;
};

/// Ordered direction vectors with no orthonormality guarantee (the pre-GS
/// state of a frame inside one time step).
struct RawFrame {
  std::vector<Vec> vectors;

  std::size_t size() const noexcept { return vectors.size(); }
  Eigen::Index dim() const { return vectors.empty() ? 0 : vectors.front().size(); }
};

/// Ordered list v_1..v_k of pairwise orthonormal directions in R^N, k <= N.
struct OrthonormalFrame {
  std::vector<Vec> vectors;
  double ortho_tol = kDefaultOrthoTol;

  std::size_t size() const noexcept { return vectors.size(); }
  Eigen::Index dim() const { return vectors.empty() ? 0 : vectors.front().size(); }

  /// max_{i,j} |v_i.v_j - delta_ij|
  double max_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      for (std::size_t j = i; j < vectors.size(); ++j) {
        const double target = (i == j) ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(vectors[i].dot(vectors[j]) - target));
      }
    }
    return worst;
  }

  bool is_orthonormal() const { return max_defect() <= ortho_tol; }
};

/// Dimer half-length l with its initial value; l decays as e^{-t} l0 and is
/// always carried analytically, never integrated.
struct DimerLength {
  double value = 0.0;
  double initial = 0.0;
};

/// Starting data: position, orthonormal frame, initial dimer half-length.
/// l0 == 0 means "inherit the run configuration's l0".
struct InitialCondition {
  Vec x0;
  OrthonormalFrame frame0;
  double l0 = 0.0;
};

}  // namespace saddle
