#include "saddle/harness.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "saddle/io.hpp"

#ifndef SADDLE_BUILD_VERSION
#define SADDLE_BUILD_VERSION "unknown"
#endif

namespace saddle {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr double kRateFloor = 1e-13;  // errors at or below this give no meaningful ratio

double nan_blank() { return std::numeric_limits<double>::quiet_NaN(); }

std::string fmt(const char* spec, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, value);
  return buf;
}

}  // namespace

const char* build_version() { return SADDLE_BUILD_VERSION; }

const char* to_string(Scheme scheme) {
  return scheme == Scheme::euler ? "euler" : "richardson";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "euler") return Scheme::euler;
  if (s == "richardson") return Scheme::richardson;
  throw input_error("unknown scheme \"" + s + "\" (expected euler or richardson)");
}

const char* to_string(ScalingQuantity q) {
  switch (q) {
    case ScalingQuantity::cross:
      return "cross";
    case ScalingQuantity::norm_defect:
      return "norm_defect";
    default:
      return "gs_correction";
  }
}

ScalingQuantity scaling_quantity_from_string(const std::string& s) {
  if (s == "cross") return ScalingQuantity::cross;
  if (s == "norm_defect" || s == "norm") return ScalingQuantity::norm_defect;
  if (s == "gs_correction" || s == "gs") return ScalingQuantity::gs_correction;
  throw input_error("unknown quantity \"" + s + "\" (expected cross, norm, or gs)");
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  if (s == "md") return ReportFormat::md;
  throw input_error("unknown format \"" + s + "\" (expected csv, json, or md)");
}

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("SADDLE_CACHE_DIR"); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return fs::path(".saddle-cache");
}

std::vector<double> default_taus() {
  return {std::exp2(-5.0), std::exp2(-6.0), std::exp2(-7.0), std::exp2(-8.0)};
}

std::vector<double> probe_taus() {
  return {std::exp2(-5.0), std::exp2(-6.0), std::exp2(-7.0), std::exp2(-8.0), std::exp2(-9.0)};
}

double default_ref_tau() { return std::exp2(-13.0); }

SaddleConfig calibrated_config(const std::string& problem, int k) {
  SaddleConfig cfg;
  cfg.k = k;
  if (problem == "nongradient3") cfg.mode = ProblemKind::nongradient;
  if (problem == "stingray" && k == 2) {
    cfg.beta = 0.5071;
    cfg.gamma = 1.8701;
    cfg.T = 0.28125;
  } else if (problem == "nongradient3" && k == 1) {
    cfg.beta = 0.8057;
    cfg.gamma = 1.2609;
  } else if (problem == "nongradient3" && k == 2) {
    cfg.beta = 0.9599;
    cfg.gamma = 1.9034;
    cfg.T = 1.125;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Reference cache
// ---------------------------------------------------------------------------

namespace {

std::string cache_key(const Problem& problem, const InitialCondition& ic,
                      const SaddleConfig& cfg) {
  std::ostringstream os;
  auto num = [&os](double v) { os << '|' << fmt("%.17g", v); };
  os << "v1|" << problem.name << '|' << problem.dimension << '|' << to_string(problem.kind)
     << '|' << cfg.k << '|' << to_string(cfg.mode);
  num(cfg.beta);
  num(cfg.gamma);
  num(cfg.T);
  num(cfg.tau);
  num(cfg.l0_effective());
  os << "|x";
  for (Eigen::Index i = 0; i < ic.x0.size(); ++i) num(ic.x0[i]);
  for (const Vec& v : ic.frame0.vectors) {
    os << "|v";
    for (Eigen::Index i = 0; i < v.size(); ++i) num(v[i]);
  }

  const std::string s = os.str();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::optional<Trajectory> try_read_cache(const Problem& problem, const SaddleConfig& cfg,
                                         long k_steps, const fs::path& file) {
  std::vector<StateRecord> records;
  try {
    if (!fs::exists(file)) return std::nullopt;
    records = read_states_jsonl(file);
  } catch (...) {
    return std::nullopt;
  }
  if (records.size() != static_cast<std::size_t>(k_steps) + 1) return std::nullopt;
  Trajectory traj;
  traj.config = cfg;
  traj.problem = problem.name;
  traj.states.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    StateRecord& rec = records[i];
    if (rec.extrapolated || rec.state.n != static_cast<long>(i) ||
        rec.state.x.size() != problem.dimension ||
        rec.state.frame.size() != static_cast<std::size_t>(cfg.k)) {
      return std::nullopt;
    }
    for (const Vec& v : rec.state.frame.vectors) {
      if (v.size() != problem.dimension) return std::nullopt;
    }
    traj.states.push_back(std::move(rec.state));
  }
  return traj;
}

void write_cache(const Problem& problem, const Trajectory& traj, const fs::path& file) {
  static std::atomic<unsigned> seq{0};
  fs::create_directories(file.parent_path());
  fs::path tmp = file;
  tmp += ".tmp" + std::to_string(::getpid()) + "-" + std::to_string(seq.fetch_add(1));
  write_trajectory_jsonl(problem, traj, tmp);
  fs::rename(tmp, file);
}

}  // namespace

Trajectory run_reference(const Problem& problem, const InitialCondition& ic,
                         const SaddleConfig& config_base, double ref_tau,
                         const HarnessOptions& opts) {
  SaddleConfig cfg = config_base;
  cfg.tau = ref_tau;
  if (ic.l0 > 0.0 && ic.l0 != cfg.l0_effective()) {
    throw input_error("reference run: set l0 on the configuration, not the initial condition");
  }
  InitialCondition ic0 = ic;
  ic0.l0 = 0.0;
  cfg.validate();
  const long k_steps = cfg.step_count();

  const fs::path dir = opts.cache_dir.empty() ? default_cache_dir() : opts.cache_dir;
  const fs::path file = dir / ("ref-" + problem.name + "-" + cache_key(problem, ic0, cfg) +
                               ".jsonl");
  if (opts.use_cache) {
    if (auto cached = try_read_cache(problem, cfg, k_steps, file)) return *std::move(cached);
  }
  Trajectory traj = integrate(problem, cfg, ic0);
  if (opts.use_cache) write_cache(problem, traj, file);
  return traj;
}

// ---------------------------------------------------------------------------
// Error norms
// ---------------------------------------------------------------------------

namespace {

long alignment_stride(double traj_tau, double ref_tau) {
  const double ratio = traj_tau / ref_tau;
  const long stride = std::lround(ratio);
  if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9) {
    throw input_error("reference step does not divide the trajectory step evenly");
  }
  return stride;
}

void accumulate_node(const Vec& ref_x, const std::vector<Vec>& ref_dirs, const Vec& x,
                     const std::vector<Vec>& directions, ErrorSummary& out) {
  if (x.size() != ref_x.size() || directions.size() != ref_dirs.size()) {
    throw input_error("error norms: runs have mismatched dimensions");
  }
  out.max_ex = std::max(out.max_ex, (ref_x - x).norm());
  double ev = 0.0;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    ev += (ref_dirs[i] - directions[i]).norm();
    if (ref_dirs[i].dot(directions[i]) < 0.0) ++out.flip_count;
  }
  out.max_ev = std::max(out.max_ev, ev);
}

}  // namespace

ErrorSummary error_norms(const Trajectory& traj, const Trajectory& ref) {
  if (traj.problem != ref.problem) {
    throw input_error("error norms: runs solve different problems");
  }
  const long stride = alignment_stride(traj.config.tau, ref.config.tau);
  const long k_traj = traj.step_count();
  if (k_traj * stride > ref.step_count()) {
    throw input_error("error norms: reference run is shorter than the trajectory");
  }
  ErrorSummary out;
  for (long n = 1; n <= k_traj; ++n) {
    const SaddleState& r = ref.states[static_cast<std::size_t>(n * stride)];
    accumulate_node(r.x, r.frame.vectors, traj.states[static_cast<std::size_t>(n)].x,
                    traj.states[static_cast<std::size_t>(n)].frame.vectors, out);
  }
  return out;
}

ErrorSummary error_norms(const ExtrapolatedTrajectory& traj, const ExtrapolatedTrajectory& ref) {
  if (traj.problem != ref.problem) {
    throw input_error("error norms: runs solve different problems");
  }
  const long stride = alignment_stride(traj.coarse_tau, ref.coarse_tau);
  const long k_traj = traj.step_count();
  if (k_traj * stride > ref.step_count()) {
    throw input_error("error norms: reference run is shorter than the trajectory");
  }
  ErrorSummary out;
  for (long n = 1; n <= k_traj; ++n) {
    const ExtrapolatedState& r = ref.states[static_cast<std::size_t>(n * stride)];
    accumulate_node(r.x, r.directions.vectors, traj.states[static_cast<std::size_t>(n)].x,
                    traj.states[static_cast<std::size_t>(n)].directions.vectors, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ladders and probes
// ---------------------------------------------------------------------------

namespace {

long inv_tau_of(double tau) {
  const double inv = 1.0 / tau;
  const long r = std::lround(inv);
  if (r < 1 || std::abs(inv - static_cast<double>(r)) > 1e-9 * static_cast<double>(r)) {
    throw input_error("tau " + fmt("%.17g", tau) + " is not a dyadic fraction of 1");
  }
  return r;
}

void validate_halving(const std::vector<double>& taus) {
  if (taus.empty()) throw input_error("ladder needs at least one tau");
  for (std::size_t j = 0; j < taus.size(); ++j) {
    if (!(taus[j] > 0.0)) throw input_error("ladder taus must be positive");
    if (j > 0 && taus[j] != taus[j - 1] / 2.0) {
      throw input_error("ladder taus must halve step to step (got " + fmt("%.17g", taus[j - 1]) +
                        " then " + fmt("%.17g", taus[j]) + ")");
    }
  }
}

void rethrow_first(std::vector<std::exception_ptr>& errors) {
  for (std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double blank_aware_rate(double prev, double curr) {
  if (prev <= kRateFloor || curr <= kRateFloor) return nan_blank();
  return std::log2(prev / curr);
}

}  // namespace

ConvergenceReport convergence_ladder(const Problem& problem, const InitialCondition& ic,
                                     const SaddleConfig& config_base,
                                     const std::vector<double>& taus, double ref_tau,
                                     Scheme scheme, const HarnessOptions& opts) {
  validate_halving(taus);
  for (double tau : taus) {
    inv_tau_of(tau);
    alignment_stride(scheme == Scheme::richardson ? tau / 2.0 : tau, ref_tau);
  }

  Trajectory ref;
  ExtrapolatedTrajectory ref_pair;
  if (scheme == Scheme::euler) {
    ref = run_reference(problem, ic, config_base, ref_tau, opts);
  } else {
    ref_pair = richardson_combine(run_reference(problem, ic, config_base, ref_tau, opts),
                                  run_reference(problem, ic, config_base, ref_tau / 2.0, opts));
  }

  InitialCondition ic0 = ic;
  ic0.l0 = 0.0;

  ConvergenceReport report;
  report.problem = problem.name;
  report.k = config_base.k;
  report.scheme = scheme;
  report.ref_tau = ref_tau;
  report.config_base = config_base;
  report.x0 = ic.x0;
  report.v0 = ic.frame0.vectors;
  report.rows.resize(taus.size());

  std::vector<std::exception_ptr> errors(taus.size());
  const long count = static_cast<long>(taus.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long j = 0; j < count; ++j) {
    try {
      SaddleConfig cfg = config_base;
      cfg.tau = taus[static_cast<std::size_t>(j)];
      ErrorSummary summary;
      if (scheme == Scheme::euler) {
        summary = error_norms(integrate(problem, cfg, ic0), ref);
      } else {
        SaddleConfig fine = cfg;
        fine.tau = cfg.tau / 2.0;
        summary = error_norms(
            richardson_combine(integrate(problem, cfg, ic0), integrate(problem, fine, ic0)),
            ref_pair);
      }
      LadderRow& row = report.rows[static_cast<std::size_t>(j)];
      row.inv_tau = inv_tau_of(cfg.tau);
      row.tau = cfg.tau;
      row.max_ex = summary.max_ex;
      row.max_ev = summary.max_ev;
      row.flip_count = summary.flip_count;
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  rethrow_first(errors);

  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    if (r == 0) {
      report.rows[r].cr_x = nan_blank();
      report.rows[r].cr_v = nan_blank();
    } else {
      report.rows[r].cr_x = blank_aware_rate(report.rows[r - 1].max_ex, report.rows[r].max_ex);
      report.rows[r].cr_v = blank_aware_rate(report.rows[r - 1].max_ev, report.rows[r].max_ev);
    }
  }
  return report;
}

ScalingProbeResult scaling_probe(const Problem& problem, const InitialCondition& ic,
                                 const SaddleConfig& config_base, const std::vector<double>& taus,
                                 ScalingQuantity quantity, double fixed_l0) {
  if (taus.size() < 3) throw input_error("probe ladder needs at least 3 taus");
  for (std::size_t j = 0; j < taus.size(); ++j) {
    if (!(taus[j] > 0.0)) throw input_error("probe taus must be positive");
    if (j > 0 && taus[j] >= taus[j - 1]) throw input_error("probe taus must strictly decrease");
  }
  if (quantity == ScalingQuantity::cross && config_base.k < 2) {
    throw input_error("cross probe needs k >= 2 (no pairs exist at k=1)");
  }

  InitialCondition ic0 = ic;
  ic0.l0 = 0.0;

  ScalingProbeResult result;
  result.quantity = quantity;
  result.taus = taus;
  result.maxima.resize(taus.size(), 0.0);

  std::vector<std::exception_ptr> errors(taus.size());
  const long count = static_cast<long>(taus.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long j = 0; j < count; ++j) {
    try {
      SaddleConfig cfg = config_base;
      cfg.tau = taus[static_cast<std::size_t>(j)];
      cfg.l0 = fixed_l0 > 0.0 ? fixed_l0 : 0.0;
      const Trajectory traj = integrate(problem, cfg, ic0);
      double peak = 0.0;
      for (const StepDiagnostics& d : traj.diagnostics) {
        switch (quantity) {
          case ScalingQuantity::cross:
            peak = std::max(peak, d.max_cross);
            break;
          case ScalingQuantity::norm_defect:
            peak = std::max(peak, d.max_norm_defect);
            break;
          case ScalingQuantity::gs_correction:
            peak = std::max(peak, d.max_gs_correction);
            break;
        }
      }
      result.maxima[static_cast<std::size_t>(j)] = peak;
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  rethrow_first(errors);

  // A slope through machine-noise maxima (or exact zeros) would be fiction.
  result.slope = result.at_roundoff() ? std::numeric_limits<double>::quiet_NaN()
                                      : fit_log2_slope(result.taus, result.maxima);
  return result;
}

bool ScalingProbeResult::at_roundoff(double floor) const {
  if (maxima.empty()) return false;
  for (double m : maxima) {
    if (m > floor) return false;
  }
  return true;
}

double fit_log2_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw input_error("slope fit needs two equal-length samples at minimum");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw input_error("slope fit requires strictly positive values");
    }
    const double lx = std::log2(xs[i]);
    const double ly = std::log2(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(xs.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Report rendering and checking
// ---------------------------------------------------------------------------

std::string render_report(const ConvergenceReport& report, ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::ostringstream os;
    os << "inv_tau,max_ex,cr_x,max_ev,cr_v\n";
    for (const LadderRow& row : report.rows) {
      os << row.inv_tau << ',' << fmt("%.10E", row.max_ex) << ','
         << (std::isnan(row.cr_x) ? "" : fmt("%.4f", row.cr_x)) << ','
         << fmt("%.10E", row.max_ev) << ','
         << (std::isnan(row.cr_v) ? "" : fmt("%.4f", row.cr_v)) << '\n';
    }
    return os.str();
  }

  if (format == ReportFormat::json) {
    ordered_json doc;
    doc["problem"] = report.problem;
    doc["k"] = report.k;
    doc["scheme"] = to_string(report.scheme);
    doc["mode"] = to_string(report.config_base.mode);
    doc["beta"] = report.config_base.beta;
    doc["gamma"] = report.config_base.gamma;
    doc["T"] = report.config_base.T;
    doc["ref_tau"] = report.ref_tau;
    ordered_json x0 = ordered_json::array();
    for (Eigen::Index i = 0; i < report.x0.size(); ++i) x0.push_back(report.x0[i]);
    doc["x0"] = std::move(x0);
    ordered_json v0 = ordered_json::array();
    for (const Vec& v : report.v0) {
      ordered_json vj = ordered_json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) vj.push_back(v[i]);
      v0.push_back(std::move(vj));
    }
    doc["v0"] = std::move(v0);
    doc["build"] = build_version();
    ordered_json rows = ordered_json::array();
    for (const LadderRow& row : report.rows) {
      ordered_json rj;
      rj["inv_tau"] = row.inv_tau;
      rj["tau"] = row.tau;
      rj["max_ex"] = row.max_ex;
      rj["cr_x"] = std::isnan(row.cr_x) ? ordered_json() : ordered_json(row.cr_x);
      rj["max_ev"] = row.max_ev;
      rj["cr_v"] = std::isnan(row.cr_v) ? ordered_json() : ordered_json(row.cr_v);
      rj["flips"] = row.flip_count;
      rows.push_back(std::move(rj));
    }
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
  }

  std::ostringstream os;
  os << "| 1/tau | max e_x | CR | max e_v | CR |\n";
  os << "| ---: | ---: | ---: | ---: | ---: |\n";
  for (const LadderRow& row : report.rows) {
    os << "| " << row.inv_tau << " | " << fmt("%.2E", row.max_ex) << " | "
       << (std::isnan(row.cr_x) ? "" : fmt("%.2f", row.cr_x)) << " | "
       << fmt("%.2E", row.max_ev) << " | "
       << (std::isnan(row.cr_v) ? "" : fmt("%.2f", row.cr_v)) << " |\n";
  }
  return os.str();
}

CheckResult check_report(const ConvergenceReport& report) {
  const double lo = report.scheme == Scheme::euler ? 0.90 : 1.85;
  const double hi = report.scheme == Scheme::euler ? 1.15 : 2.15;
  if (report.rows.size() < 2) {
    return {false, "check needs at least two ladder rows"};
  }
  auto fail = [&](const LadderRow& row, const char* which, double value) -> CheckResult {
    std::ostringstream os;
    os << which << " at inv_tau=" << row.inv_tau << " is ";
    if (std::isnan(value)) {
      os << "blank (error at roundoff level)";
    } else {
      os << fmt("%.4f", value);
    }
    os << ", outside [" << fmt("%.2f", lo) << ", " << fmt("%.2f", hi) << "]";
    return {false, os.str()};
  };
  for (std::size_t r = 1; r < report.rows.size(); ++r) {
    const LadderRow& row = report.rows[r];
    if (std::isnan(row.cr_x) || row.cr_x < lo || row.cr_x > hi) {
      return fail(row, "cr_x", row.cr_x);
    }
    if (std::isnan(row.cr_v) || row.cr_v < lo || row.cr_v > hi) {
      return fail(row, "cr_v", row.cr_v);
    }
  }
  return {true, "all rates within [" + fmt("%.2f", lo) + ", " + fmt("%.2f", hi) + "]"};
}

}  // namespace saddle
