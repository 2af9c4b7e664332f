#include "saddle/core.hpp"

#include <cmath>
#include <string>

namespace saddle {

namespace {

void check_dim(const OrthonormalFrame& frame, const Vec& f, const char* what) {
  if (!frame.vectors.empty() && f.size() != frame.dim()) {
    throw input_error(std::string(what) + ": vector dimension " + std::to_string(f.size()) +
                      " does not match frame dimension " + std::to_string(frame.dim()));
  }
}

}  // namespace

Vec householder_apply(const OrthonormalFrame& frame, const Vec& f) {
  check_dim(frame, f, "householder_apply");
  Vec out = f;
  for (const Vec& v : frame.vectors) {
    out.noalias() -= 2.0 * v.dot(f) * v;
  }
  return out;
}

Vec stable_projector_apply(const OrthonormalFrame& frame, std::size_t i, const Vec& h) {
  if (i >= frame.size()) {
    throw input_error("stable_projector_apply: index " + std::to_string(i) +
                      " out of range for frame of size " + std::to_string(frame.size()));
  }
  check_dim(frame, h, "stable_projector_apply");
  Vec out = h;
  out.noalias() -= frame.vectors[i].dot(h) * frame.vectors[i];
  for (std::size_t j = 0; j < i; ++j) {
    out.noalias() -= 2.0 * frame.vectors[j].dot(h) * frame.vectors[j];
  }
  return out;
}

Vec symmetrized_projector_apply(const OrthonormalFrame& frame, std::size_t i,
                                std::span<const Vec> h_list) {
  if (i >= frame.size()) {
    throw input_error("symmetrized_projector_apply: index " + std::to_string(i) +
                      " out of range for frame of size " + std::to_string(frame.size()));
  }
  if (h_list.size() < i + 1) {
    throw input_error("symmetrized_projector_apply: need dimer values h_0..h_" +
                      std::to_string(i) + ", got " + std::to_string(h_list.size()));
  }
  const Vec& hi = h_list[i];
  check_dim(frame, hi, "symmetrized_projector_apply");
  const Vec& vi = frame.vectors[i];
  Vec out = hi;
  out.noalias() -= vi.dot(hi) * vi;
  for (std::size_t j = 0; j < i; ++j) {
    const Vec& vj = frame.vectors[j];
    out.noalias() -= (vj.dot(hi) + vi.dot(h_list[j])) * vj;
  }
  return out;
}

GramSchmidtResult gram_schmidt(const RawFrame& raw, double tol) {
  const std::size_t k = raw.size();
  if (k == 0) {
    throw input_error("gram_schmidt: empty frame");
  }
  const Eigen::Index n = raw.dim();
  if (static_cast<Eigen::Index>(k) > n) {
    throw input_error("gram_schmidt: more vectors than dimensions (k=" + std::to_string(k) +
                      ", N=" + std::to_string(n) + ")");
  }

  GramSchmidtResult result;
  result.frame.vectors.reserve(k);
  result.correction_norms.resize(k);

  for (std::size_t i = 0; i < k; ++i) {
    const Vec& r = raw.vectors[i];
    if (r.size() != n) {
      throw input_error("gram_schmidt: inconsistent vector dimensions");
    }
    Vec w = r;
    for (std::size_t j = 0; j < i; ++j) {
      const Vec& vj = result.frame.vectors[j];
      w.noalias() -= vj.dot(w) * vj;
    }
    const double nrm = w.norm();
    if (nrm < tol * std::max(1.0, r.norm())) {
      throw degenerate_frame_error("gram_schmidt: vector " + std::to_string(i) +
                                   " is numerically dependent on its predecessors (norm " +
                                   std::to_string(nrm) + ")");
    }
    w /= nrm;
    result.correction_norms[i] = (w - r).norm();
    result.frame.vectors.push_back(std::move(w));
  }
  return result;
}

Vec dimer_hessian_apply(const std::function<Vec(const Vec&)>& force, const Vec& x, const Vec& v,
                        double l) {
  if (!(l > 0.0)) {
    throw input_error("dimer_hessian_apply: dimer half-length must be positive, got " +
                      std::to_string(l));
  }
  if (x.size() != v.size()) {
    throw input_error("dimer_hessian_apply: x and v dimensions differ");
  }
  const Vec forward = force(x + l * v);
  const Vec backward = force(x - l * v);
  if (forward.size() != x.size() || backward.size() != x.size()) {
    throw input_error("dimer_hessian_apply: force returned a vector of wrong dimension");
  }
  return (forward - backward) / (2.0 * l);
}

Vec dimer_hessian_apply(const Problem& problem, const Vec& x, const Vec& v, double l) {
  if (x.size() != problem.dimension) {
    throw input_error("dimer_hessian_apply: position dimension " + std::to_string(x.size()) +
                      " does not match problem \"" + problem.name + "\" (N=" +
                      std::to_string(problem.dimension) + ")");
  }
  return dimer_hessian_apply(problem.force, x, v, l);
}

double dimer_length_at(double t, double l0) {
  if (!(t >= 0.0)) {
    throw input_error("dimer_length_at: time must be non-negative");
  }
  if (!(l0 > 0.0)) {
    throw input_error("dimer_length_at: l0 must be positive");
  }
  return std::exp(-t) * l0;
}

}  // namespace saddle
