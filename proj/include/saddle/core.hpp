#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "saddle/problem.hpp"
#include "saddle/types.hpp"

namespace saddle {

/// Apply the Householder-type reflector (I - 2 sum_j v_j v_j^T) to f.
/// Norm-preserving for orthonormal frames.
Vec householder_apply(const OrthonormalFrame& frame, const Vec& f);

/// Apply (I - v_i v_i^T - 2 sum_{j<i} v_j v_j^T) to h, the projector driving
/// the dynamics of direction i (0-based) in the gradient scheme.
Vec stable_projector_apply(const OrthonormalFrame& frame, std::size_t i, const Vec& h);

/// Apply the symmetrized projector for non-gradient dynamics of direction i
/// (0-based): (I - v_i v_i^T) h_i - sum_{j<i} v_j (v_j^T h_i + v_i^T h_j).
/// h_list must hold the dimer values h_0..h_i.
Vec symmetrized_projector_apply(const OrthonormalFrame& frame, std::size_t i,
                                std::span<const Vec> h_list);

struct GramSchmidtResult {
  OrthonormalFrame frame;
  std::vector<double> correction_norms;  // ||v_i - raw_i|| per vector
};

/// Modified Gram-Schmidt: each vector is projected against the already
/// finalized ones in sequence, then renormalized. An intermediate norm below
/// tol * max(1, ||raw_i||) raises degenerate_frame_error.
GramSchmidtResult gram_schmidt(const RawFrame& raw, double tol = 1e-12);

/// Central-difference dimer approximation (F(x + l v) - F(x - l v)) / (2 l)
/// of H(x)v (gradient fields) or J(x)v (general fields). Exactly two force
/// evaluations; exact for linear F independent of l.
Vec dimer_hessian_apply(const Problem& problem, const Vec& x, const Vec& v, double l);
Vec dimer_hessian_apply(const std::function<Vec(const Vec&)>& force, const Vec& x, const Vec& v,
                        double l);

/// Analytic dimer-length law l(t) = e^{-t} l0.
double dimer_length_at(double t, double l0);

}  // namespace saddle
