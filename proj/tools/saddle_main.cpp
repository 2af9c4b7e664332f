#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "saddle/core.hpp"
#include "saddle/dynamics.hpp"
#include "saddle/extrapolation.hpp"
#include "saddle/harness.hpp"
#include "saddle/io.hpp"
#include "saddle/runspec.hpp"

namespace {

struct CommonFlags {
  saddle::RunSpec spec;
  std::string problem_file;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* T_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--problem", flags.spec.problem, "Problem name from the registry")->required();
  cmd->add_option("--problem-file", flags.problem_file,
                  "JSON file of linear problems to register before running");
  cmd->add_option("--k", flags.spec.k, "Saddle index: number of unstable directions")
      ->default_val(1);
  cmd->add_option("--x0", flags.spec.x0_text, "Initial position, comma-separated");
  cmd->add_option("--v0", flags.spec.v0_text,
                  "Initial directions, comma-separated vectors joined by semicolons");
  flags.beta_opt = cmd->add_option("--beta", flags.spec.beta,
                                   "Position relaxation rate (default: calibrated preset)");
  flags.gamma_opt = cmd->add_option("--gamma", flags.spec.gamma,
                                    "Direction relaxation rate (default: calibrated preset)");
  flags.T_opt = cmd->add_option("--T", flags.spec.T, "Final time (default: calibrated preset)");
  cmd->add_option("--l0", flags.spec.l0, "Initial dimer half-length (default sqrt(tau))");
}

/// Flags the user left unset fall back to the per-problem calibration.
void apply_calibrated_defaults(CommonFlags& flags) {
  const saddle::SaddleConfig cal = saddle::calibrated_config(flags.spec.problem, flags.spec.k);
  if (flags.beta_opt->count() == 0) flags.spec.beta = cal.beta;
  if (flags.gamma_opt->count() == 0) flags.spec.gamma = cal.gamma;
  if (flags.T_opt->count() == 0) flags.spec.T = cal.T;
}

void load_extra_problems(const CommonFlags& flags) {
  if (!flags.problem_file.empty()) saddle::load_problem_file(flags.problem_file);
}

std::vector<double> parse_taus(const std::string& text, std::vector<double> fallback) {
  if (text.empty()) return fallback;
  const saddle::Vec v = saddle::parse_vector(text);
  return {v.data(), v.data() + v.size()};
}

void warn(const std::string& message) {
  if (!message.empty()) std::cerr << "warning: " << message << "\n";
}

int cmd_run(CommonFlags& flags) {
  load_extra_problems(flags);
  apply_calibrated_defaults(flags);
  saddle::ResolvedRun run = saddle::resolve_run_spec(flags.spec);
  warn(run.warning);

  const saddle::Trajectory traj = saddle::integrate(*run.problem, run.config, run.ic);
  const std::string out = flags.spec.out.empty()
                              ? flags.spec.problem + "-k" + std::to_string(flags.spec.k) + ".jsonl"
                              : flags.spec.out;
  saddle::write_trajectory_jsonl(*run.problem, traj, out);

  const saddle::SaddleState& last = traj.states.back();
  std::cout << "wrote " << out << " (" << traj.states.size() << " states)\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6e", saddle::saddle_residual(*run.problem, last));
  std::cout << "final residual " << buf << "\n";
  std::cout << "final x ";
  for (Eigen::Index i = 0; i < last.x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", last.x[i]);
    std::cout << (i > 0 ? "," : "") << buf;
  }
  std::cout << "\n";
  return 0;
}

int cmd_converge(CommonFlags& flags, const std::string& taus_text, double ref_tau,
                 const std::string& scheme_text, const std::string& format_text, bool check) {
  load_extra_problems(flags);
  apply_calibrated_defaults(flags);
  saddle::ResolvedRun run = saddle::resolve_run_spec(flags.spec);
  warn(run.warning);

  const std::vector<double> taus = parse_taus(taus_text, saddle::default_taus());
  const saddle::Scheme scheme = saddle::scheme_from_string(scheme_text);
  const saddle::ReportFormat format = saddle::report_format_from_string(format_text);

  const saddle::ConvergenceReport report =
      saddle::convergence_ladder(*run.problem, run.ic, run.config, taus, ref_tau, scheme);

  for (const saddle::LadderRow& row : report.rows) {
    if (row.flip_count > 0) {
      std::cerr << "warning: direction orientation flipped against the reference at inv_tau="
                << row.inv_tau << " (" << row.flip_count << " occurrences)\n";
    }
  }

  const std::string rendered = saddle::render_report(report, format);
  if (flags.spec.out.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(flags.spec.out);
    if (!out) throw saddle::input_error("cannot open " + flags.spec.out + " for writing");
    out << rendered;
    std::cout << "wrote " << flags.spec.out << "\n";
  }

  if (check) {
    const saddle::CheckResult result = saddle::check_report(report);
    std::cerr << "check: " << result.message << "\n";
    if (!result.ok) return 2;
  }
  return 0;
}

int cmd_verify(CommonFlags& flags, const std::string& taus_text,
               const std::string& lemma_text, double fixed_l0) {
  load_extra_problems(flags);
  apply_calibrated_defaults(flags);
  saddle::ResolvedRun run = saddle::resolve_run_spec(flags.spec);
  warn(run.warning);

  const std::vector<double> taus = parse_taus(taus_text, saddle::probe_taus());
  const saddle::ScalingQuantity quantity = saddle::scaling_quantity_from_string(lemma_text);

  const saddle::ScalingProbeResult probe =
      saddle::scaling_probe(*run.problem, run.ic, run.config, taus, quantity, fixed_l0);

  char buf[64];
  std::cout << "quantity " << saddle::to_string(probe.quantity) << "\n";
  for (std::size_t j = 0; j < probe.taus.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.10E", probe.maxima[j]);
    std::cout << "tau 2^" << std::lround(std::log2(probe.taus[j])) << " max " << buf << "\n";
  }
  if (probe.at_roundoff()) {
    std::cout << "slope (not fit: maxima at roundoff level)\n";
    std::cerr << "check: exact cancellation, quadratic bound holds outright\n";
    return 0;
  }
  std::snprintf(buf, sizeof(buf), "%.4f", probe.slope);
  std::cout << "slope " << buf << "\n";
  if (probe.slope < 1.8) {
    std::cerr << "check: slope below 1.8\n";
    return 2;
  }
  std::cerr << "check: slope at or above 1.8\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shrinking-dimer saddle dynamics: index-k saddle search with convergence tooling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", saddle::build_version());

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Integrate one trajectory and write it as JSON lines");
  add_common(run, run_flags);
  run->add_option("--tau", run_flags.spec.tau, "Step size")->default_val(0.03125);
  run->add_option("--out", run_flags.spec.out, "Output path (default <problem>-k<k>.jsonl)");

  CommonFlags conv_flags;
  std::string conv_taus;
  std::string conv_scheme = "euler";
  double conv_ref_tau = saddle::default_ref_tau();
  bool conv_check = false;
  CLI::App* converge =
      app.add_subcommand("converge", "Run a dyadic step ladder against a fine reference "
                                     "and report error maxima with convergence rates");
  add_common(converge, conv_flags);
  converge->add_option("--taus", conv_taus, "Comma-separated halving ladder (default 2^-5..2^-8)");
  converge->add_option("--ref-tau", conv_ref_tau, "Reference step (default 2^-13)");
  converge->add_option("--scheme", conv_scheme, "euler or richardson")->default_val("euler");
  converge->add_option("--format", conv_flags.spec.format, "csv, json, or md")->default_val("md");
  converge->add_option("--out", conv_flags.spec.out, "Output path (default stdout)");
  converge->add_flag("--check", conv_check, "Exit 2 unless all rates sit in the scheme's window");

  CommonFlags verify_flags;
  std::string verify_taus;
  std::string verify_lemma;
  double verify_fixed_l0 = 0.0;
  CLI::App* verify = app.add_subcommand(
      "verify", "Probe the second-order step-size scaling of the pre-orthonormalization "
                "frame diagnostics");
  add_common(verify, verify_flags);
  verify->add_option("--lemma", verify_lemma, "cross, norm, or gs")->required();
  verify->add_option("--taus", verify_taus, "Comma-separated ladder (default 2^-5..2^-9)");
  verify->add_option("--fixed-l0", verify_fixed_l0,
                     "Pin the dimer half-length across the ladder instead of sqrt(tau)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (converge->parsed()) {
      return cmd_converge(conv_flags, conv_taus, conv_ref_tau, conv_scheme,
                          conv_flags.spec.format, conv_check);
    }
    return cmd_verify(verify_flags, verify_taus, verify_lemma, verify_fixed_l0);
  } catch (const saddle::divergence_error& e) {
    std::cerr << "error: diverged: " << e.what() << "\n";
    return 1;
  } catch (const saddle::degenerate_frame_error& e) {
    std::cerr << "error: frame degenerated: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
