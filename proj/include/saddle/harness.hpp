#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "saddle/dynamics.hpp"
#include "saddle/extrapolation.hpp"

namespace saddle {

/// Version string baked in at build time (git describe), "unknown" otherwise.
const char* build_version();

/// Trajectory-vs-reference error maxima over coarse nodes n >= 1.
struct ErrorSummary {
  double max_ex = 0.0;  ///< max_n ||x_ref(t_n) - x_n||
  double max_ev = 0.0;  ///< max_n sum_i ||v_i_ref(t_n) - v_i_n||
  long flip_count = 0;  ///< (node, direction) pairs with reversed orientation; reported, not fixed
};

enum class Scheme { euler, richardson };
const char* to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& s);

/// One ladder row; cr values are NaN when blank (first row, or error at
/// roundoff level where a ratio is meaningless).
struct LadderRow {
  long inv_tau = 0;
  double tau = 0.0;
  double max_ex = 0.0;
  double cr_x = 0.0;
  double max_ev = 0.0;
  double cr_v = 0.0;
  long flip_count = 0;
};

struct ConvergenceReport {
  std::string problem;
  int k = 1;
  Scheme scheme = Scheme::euler;
  double ref_tau = 0.0;
  SaddleConfig config_base;
  Vec x0;
  std::vector<Vec> v0;
  std::vector<LadderRow> rows;
};

enum class ScalingQuantity { cross, norm_defect, gs_correction };
const char* to_string(ScalingQuantity q);
ScalingQuantity scaling_quantity_from_string(const std::string& s);

/// Per-tau maxima of one pre-orthonormalization step diagnostic, with the
/// least-squares slope of log2(max) against log2(tau).
struct ScalingProbeResult {
  ScalingQuantity quantity = ScalingQuantity::cross;
  std::vector<double> taus;
  std::vector<double> maxima;
  double slope = 0.0;

  /// True when every maximum sits at machine-noise level, which happens when a
  /// diagnostic cancels exactly (e.g. the cross term of a symmetric curvature
  /// in two dimensions). The slope fit is meaningless there; the quantity
  /// satisfies its quadratic bound outright.
  bool at_roundoff(double floor = 1e-13) const;
};

struct HarnessOptions {
  std::filesystem::path cache_dir;  ///< empty means default_cache_dir()
  bool use_cache = true;
};

/// $SADDLE_CACHE_DIR if set, else ./.saddle-cache.
std::filesystem::path default_cache_dir();

/// Integrates once at ref_tau with l0 = sqrt(ref_tau) (config_base.l0
/// overrides if positive; config_base.tau is ignored and ic.l0 must be unset
/// or equal). Results are cached on disk keyed by problem, starting data, and
/// configuration; cache files are written atomically (write then rename).
Trajectory run_reference(const Problem& problem, const InitialCondition& ic,
                         const SaddleConfig& config_base, double ref_tau,
                         const HarnessOptions& opts = {});

/// Compares states at shared nodes: traj node n against ref node n * (tau /
/// ref_tau), which must be an exact integer stride. Frames are compared as
/// emitted (post-orthonormalization on both sides).
ErrorSummary error_norms(const Trajectory& traj, const Trajectory& ref);

/// Same comparison for a step-halved pair against a reference pair; directions
/// are compared raw on both sides, without renormalization.
ErrorSummary error_norms(const ExtrapolatedTrajectory& traj, const ExtrapolatedTrajectory& ref);

/// 2^-5 .. 2^-8, the tabulated ladder.
std::vector<double> default_taus();
/// 2^-5 .. 2^-9, the scaling-probe ladder.
std::vector<double> probe_taus();
/// Default reference step 2^-13.
double default_ref_tau();

/// Relaxation rates and horizon calibrated per problem and index so that the
/// default ladders land on the tabulated errors in the project documentation.
/// Pairs without a calibration get unit rates and horizon.
SaddleConfig calibrated_config(const std::string& problem, int k);

/// Runs the ladder (each tau with l0 = sqrt(tau); for richardson each row also
/// integrates at tau/2 and combines) against the cached reference and fills in
/// convergence rates CR_r = log2(err_{r-1} / err_r) on the finer row. The
/// euler reference is the single run at ref_tau; the richardson reference is
/// the combination of runs at ref_tau and ref_tau / 2. Ladder entries run
/// concurrently; assembly is deterministic. A divergence at any tau aborts the
/// whole report.
ConvergenceReport convergence_ladder(const Problem& problem, const InitialCondition& ic,
                                     const SaddleConfig& config_base,
                                     const std::vector<double>& taus, double ref_tau,
                                     Scheme scheme, const HarnessOptions& opts = {});

/// Integrates the ladder and records, per tau, the max over all steps of the
/// chosen diagnostic, then fits the slope. fixed_l0 > 0 pins the dimer length
/// across the ladder instead of the sqrt(tau) default. cross needs k >= 2.
ScalingProbeResult scaling_probe(const Problem& problem, const InitialCondition& ic,
                                 const SaddleConfig& config_base, const std::vector<double>& taus,
                                 ScalingQuantity quantity, double fixed_l0 = 0.0);

/// Least-squares slope of log2(ys) against log2(xs); all values must be
/// positive and the lists equal length >= 2.
double fit_log2_slope(const std::vector<double>& xs, const std::vector<double>& ys);

enum class ReportFormat { csv, json, md };
ReportFormat report_format_from_string(const std::string& s);

/// csv: columns inv_tau,max_ex,cr_x,max_ev,cr_v with blanks as empty fields.
/// json: rows plus full provenance (problem, starting data, taus, ref_tau,
/// build version). md: aligned table in the tabulated layout.
std::string render_report(const ConvergenceReport& report, ReportFormat format);

struct CheckResult {
  bool ok = true;
  std::string message;
};

/// Verifies every rate beyond the first row sits in the scheme's window
/// (euler [0.90, 1.15], richardson [1.85, 2.15]); blanks beyond row one fail.
CheckResult check_report(const ConvergenceReport& report);

}  // namespace saddle
