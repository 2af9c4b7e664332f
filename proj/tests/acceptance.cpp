// End-to-end gate: every shipped claim about the convergence tables, the
// scaling probes, and the algebraic kernels, re-checked in one binary with one
// PASS/FAIL line each. Exits nonzero if anything fails.
//
// Usage: acceptance <path-to-saddle-cli>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <string>
#include <vector>

#include "saddle/core.hpp"
#include "saddle/dynamics.hpp"
#include "saddle/harness.hpp"
#include "saddle/problem.hpp"

using namespace saddle;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void emit(bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s  %s (%s)\n", ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

bool within(double value, double target, double tol) {
  return std::abs(value / target - 1.0) <= tol;
}

struct Experiment {
  const char* problem;
  int k;
  double ex_target;    // first-order max_ex at tau = 2^-5
  double ev_target;    // first-order max_ev at tau = 2^-5 (0 = not gated)
  double exR_target;   // combined-pair max_ex at tau = 2^-5
};

constexpr Experiment kExperiments[] = {
    {"stingray", 1, 2.60e-2, 0.0, 1.45e-3},
    {"stingray", 2, 1.50e-2, 3.90e-2, 3.39e-4},
    {"nongradient3", 1, 4.95e-2, 0.0, 9.54e-4},
    {"nongradient3", 2, 3.00e-2, 0.0, 1.43e-4},
};

ConvergenceReport ladder_for(const Experiment& e, Scheme scheme, const HarnessOptions& opts) {
  const Problem& problem = registry_get(e.problem);
  const SaddleConfig base = calibrated_config(e.problem, e.k);
  const InitialCondition ic = default_initial_condition(problem, e.k);
  return convergence_ladder(problem, ic, base, default_taus(), default_ref_tau(), scheme, opts);
}

std::string run_command(const std::string& command) {
  std::string output;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return output;
  char buf[512];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, got);
  ::pclose(pipe);
  return output;
}

// Van der Corput radical inverse; the deterministic driver for the frame sweep.
double halton(unsigned long long index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-saddle-cli>\n");
    return 2;
  }
  const std::string cli = argv[1];

  // A private cache keeps the timed criteria honest about reference cost.
  const fs::path cache =
      fs::temp_directory_path() / ("saddle-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(cache);
  HarnessOptions opts;
  opts.cache_dir = cache;

  // 1. First-order table, stingray index-1: anchor error and rate window,
  //    timed including the fresh reference run.
  {
    const auto t0 = clock_type::now();
    const ConvergenceReport report = ladder_for(kExperiments[0], Scheme::euler, opts);
    const double elapsed = seconds_since(t0);
    const double ex = report.rows[0].max_ex;
    const CheckResult rates = check_report(report);
    const bool ok = within(ex, 2.60e-2, 0.10) && rates.ok && elapsed < 10.0;
    emit(ok, "first-order table, stingray index-1",
           "max_ex@2^-5 " + fmt("%.3E", ex) + " vs 2.60E-02, rates " +
               (rates.ok ? "in [0.90, 1.15]" : rates.message) + ", " + fmt("%.1f", elapsed) +
               " s");
  }

  // 2. First-order table, stingray index-2: both anchors and the rate window.
  {
    const ConvergenceReport report = ladder_for(kExperiments[1], Scheme::euler, opts);
    const double ex = report.rows[0].max_ex;
    const double ev = report.rows[0].max_ev;
    const CheckResult rates = check_report(report);
    const bool ok = within(ex, 1.50e-2, 0.10) && within(ev, 3.90e-2, 0.10) && rates.ok;
    emit(ok, "first-order table, stingray index-2",
           "max_ex@2^-5 " + fmt("%.3E", ex) + " vs 1.50E-02, max_ev " + fmt("%.3E", ev) +
               " vs 3.90E-02, rates " + (rates.ok ? "ok" : rates.message));
  }

  // 3. First-order tables, nongradient3 index-1 and index-2.
  for (int idx = 2; idx < 4; ++idx) {
    const Experiment& e = kExperiments[idx];
    const ConvergenceReport report = ladder_for(e, Scheme::euler, opts);
    const double ex = report.rows[0].max_ex;
    const CheckResult rates = check_report(report);
    const bool ok = within(ex, e.ex_target, 0.10) && rates.ok;
    emit(ok, "first-order table, nongradient3 index-" + std::to_string(e.k),
           "max_ex@2^-5 " + fmt("%.3E", ex) + " vs " + fmt("%.2E", e.ex_target) + ", rates " +
               (rates.ok ? "ok" : rates.message));
  }

  // 4. Combined-pair tables for all four experiments: anchor errors within 15%
  //    and every rate in [1.85, 2.15].
  for (const Experiment& e : kExperiments) {
    const ConvergenceReport report = ladder_for(e, Scheme::richardson, opts);
    const double ex = report.rows[0].max_ex;
    const CheckResult rates = check_report(report);
    const bool ok = within(ex, e.exR_target, 0.15) && rates.ok;
    emit(ok,
           "combined-pair table, " + std::string(e.problem) + " index-" + std::to_string(e.k),
           "max_ex@2^-5 " + fmt("%.3E", ex) + " vs " + fmt("%.2E", e.exR_target) + ", rates " +
               (rates.ok ? "in [1.85, 2.15]" : rates.message));
  }

  // 5. Frame-diagnostic scaling probes: every pre-orthonormalization defect
  //    shrinks at second order on both index-2 experiments.
  {
    const auto t0 = clock_type::now();
    bool ok = true;
    std::string detail;
    for (const char* name : {"stingray", "nongradient3"}) {
      const Problem& problem = registry_get(name);
      const SaddleConfig base = calibrated_config(name, 2);
      const InitialCondition ic = default_initial_condition(problem, 2);
      for (ScalingQuantity q : {ScalingQuantity::cross, ScalingQuantity::norm_defect,
                                ScalingQuantity::gs_correction}) {
        const ScalingProbeResult probe = scaling_probe(problem, ic, base, probe_taus(), q);
        if (!detail.empty()) detail += ", ";
        detail += std::string(name) + "/" + to_string(q) + " ";
        if (probe.at_roundoff()) {
          // Identically-cancelling diagnostic: the quadratic bound holds with
          // zero constant, no slope to fit.
          detail += "exact";
        } else {
          detail += fmt("%.2f", probe.slope);
          ok = ok && probe.slope >= 1.8;
        }
      }
    }
    const double elapsed = seconds_since(t0);
    ok = ok && elapsed < 30.0;
    emit(ok, "frame-diagnostic scaling probes",
           "slopes " + detail + ", " + fmt("%.1f", elapsed) + " s");
  }

  // 6. Dimer curvature oracle: the cubic problem shows the exact l^2 error law;
  //    the quadratic-force problem agrees with its exact product outright.
  {
    const Problem& cubic = registry_get("cubic1d");
    Vec x(1), v(1);
    x << 0.7;
    v << 1.0;
    bool ok = true;
    std::string detail;
    for (double l : {0.1, 0.01}) {
      const double err =
          (dimer_hessian_apply(cubic, x, v, l) - cubic.exact_hvp(x, v)).norm();
      ok = ok && std::abs(err - l * l) <= 1e-12;
      detail += "cubic |err - l^2| " + fmt("%.1E", std::abs(err - l * l)) + " at l=" +
                fmt("%g", l) + ", ";
    }

    const Problem& stingray = registry_get("stingray");
    Vec sx(2), sv(2);
    sx << 0.3, -0.7;
    sv << 0.6, 0.8;
    std::vector<double> ls = {1e-1, 1e-2, 1e-3};
    std::vector<double> errs;
    double worst = 0.0;
    for (double l : ls) {
      const double err = (dimer_hessian_apply(stingray, sx, sv, l) -
                          stingray.exact_hvp(sx, sv))
                             .norm();
      errs.push_back(err);
      worst = std::max(worst, err);
    }
    if (worst <= 1e-10) {
      detail += "quadratic force agrees exactly (worst " + fmt("%.1E", worst) + ")";
    } else {
      const double slope = fit_log2_slope(ls, errs);
      ok = ok && slope >= 1.9 && slope <= 2.1;
      detail += "slope " + fmt("%.2f", slope);
    }
    emit(ok, "dimer curvature oracle", detail);
  }

  // 7. Reflector and orthonormalization property sweep over 1000 frames from a
  //    deterministic low-discrepancy sequence.
  {
    const auto t0 = clock_type::now();
    constexpr unsigned kBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    constexpr int kDims[] = {2, 3, 5, 8};
    double worst_norm = 0.0, worst_invol = 0.0, worst_idem = 0.0, worst_span = 0.0,
           worst_ortho = 0.0;
    int accepted = 0;
    unsigned long long seq = 0;
    while (accepted < 1000) {
      const int dim = kDims[accepted % 4];
      const int k = 1 + accepted % std::min(dim, 3);
      RawFrame raw;
      bool usable = true;
      for (int i = 0; i < k && usable; ++i) {
        Vec v(dim);
        for (int d = 0; d < dim; ++d) {
          v[d] = 2.0 * halton(seq * 31 + static_cast<unsigned long long>(i) * 7 + 1,
                              kBases[(d + i) % 12]) -
                 1.0;
        }
        usable = v.norm() > 1e-3;
        raw.vectors.push_back(v);
      }
      ++seq;
      if (!usable) continue;
      GramSchmidtResult gs;
      try {
        gs = gram_schmidt(raw);
      } catch (const degenerate_frame_error&) {
        continue;
      }
      ++accepted;
      const OrthonormalFrame& frame = gs.frame;
      worst_ortho = std::max(worst_ortho, frame.max_defect());

      Vec probe(dim);
      for (int d = 0; d < dim; ++d) {
        probe[d] = 2.0 * halton(seq * 31 + 5, kBases[(d + 7) % 12]) - 1.0;
      }
      const Vec reflected = householder_apply(frame, probe);
      worst_norm = std::max(worst_norm, std::abs(reflected.norm() - probe.norm()));
      worst_invol =
          std::max(worst_invol, (householder_apply(frame, reflected) - probe).norm());

      // The stable projector is idempotent for the leading direction.
      const Vec once = stable_projector_apply(frame, 0, probe);
      worst_idem = std::max(worst_idem, (stable_projector_apply(frame, 0, once) - once).norm());

      if (k == dim) {
        // Full frames span everything: the reflector is exactly -I there.
        worst_span = std::max(worst_span, (reflected + probe).norm());
      }
    }
    const double elapsed = seconds_since(t0);
    const bool ok = worst_norm <= 1e-10 && worst_invol <= 1e-10 && worst_idem <= 1e-10 &&
                    worst_span <= 1e-10 && worst_ortho <= 1e-10 && elapsed < 5.0;
    emit(ok, "reflector and orthonormalization property sweep",
           "worst norm " + fmt("%.1E", worst_norm) + ", involution " + fmt("%.1E", worst_invol) +
               ", idempotence " + fmt("%.1E", worst_idem) + ", span " + fmt("%.1E", worst_span) +
               ", orthonormality " + fmt("%.1E", worst_ortho) + ", " + fmt("%.1f", elapsed) +
               " s");
  }

  // 8. Determinism: the same converge invocation twice, byte-identical CSV.
  {
    const std::string command = "SADDLE_CACHE_DIR='" + cache.string() + "' '" + cli +
                                "' converge --problem stingray --k 1 --format csv 2>/dev/null";
    const std::string first = run_command(command);
    const std::string second = run_command(command);
    const bool ok = !first.empty() && first == second;
    emit(ok, "converge determinism",
           ok ? "two invocations byte-identical (" + std::to_string(first.size()) + " bytes)"
              : "outputs differ or command failed");
  }

  fs::remove_all(cache);
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
