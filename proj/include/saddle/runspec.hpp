#pragma once

#include <string>
#include <vector>

#include "saddle/dynamics.hpp"

namespace saddle {

/// Flag-level description of one run, before problems and vectors are looked
/// up and parsed. Empty x0/v0 mean the problem's built-in starting data.
struct RunSpec {
  std::string problem;
  int k = 1;
  double beta = 1.0;
  double gamma = 1.0;
  double T = 1.0;
  double tau = 0.03125;
  double l0 = 0.0;  ///< 0 means sqrt(tau)
  std::string x0_text;
  std::string v0_text;
  std::string out;
  std::string format = "md";
};

/// "1,0.5,-2e-3" -> vector; throws input_error on anything unparseable.
Vec parse_vector(const std::string& text);

/// Semicolon-separated vectors: "0,1;1,0" -> two vectors.
std::vector<Vec> parse_frame_list(const std::string& text);

struct ResolvedRun {
  const Problem* problem = nullptr;
  SaddleConfig config;
  InitialCondition ic;
  std::string warning;  ///< set when the frame needed a correction above 1e-8
};

/// Looks up the problem, fills in built-in starting data where flags are
/// absent, and orthonormalizes the frame.
ResolvedRun resolve_run_spec(const RunSpec& spec);

}  // namespace saddle
