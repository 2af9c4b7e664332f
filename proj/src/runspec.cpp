#include "saddle/runspec.hpp"

#include <cstddef>
#include <sstream>
#include <string>

#include "saddle/core.hpp"

namespace saddle {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, sep)) parts.push_back(token);
  if (!text.empty() && text.back() == sep) parts.push_back("");
  return parts;
}

double parse_double(const std::string& token) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    throw input_error("cannot parse \"" + token + "\" as a number");
  }
  while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) ++used;
  if (used != token.size()) {
    throw input_error("trailing characters after number in \"" + token + "\"");
  }
  return value;
}

}  // namespace

Vec parse_vector(const std::string& text) {
  if (text.empty()) throw input_error("empty vector");
  const std::vector<std::string> parts = split(text, ',');
  Vec v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = parse_double(parts[i]);
  }
  return v;
}

std::vector<Vec> parse_frame_list(const std::string& text) {
  if (text.empty()) throw input_error("empty frame");
  std::vector<Vec> frame;
  for (const std::string& part : split(text, ';')) frame.push_back(parse_vector(part));
  return frame;
}

ResolvedRun resolve_run_spec(const RunSpec& spec) {
  if (spec.problem.empty()) throw input_error("a problem name is required");
  ResolvedRun run;
  run.problem = &registry_get(spec.problem);

  run.config.k = spec.k;
  run.config.beta = spec.beta;
  run.config.gamma = spec.gamma;
  run.config.T = spec.T;
  run.config.tau = spec.tau;
  run.config.l0 = spec.l0;
  run.config.mode = run.problem->kind;
  run.config.validate();
  (void)run.config.step_count();  // reject a non-dividing tau before any parsing work

  InitialCondition defaults;
  const bool need_defaults = spec.x0_text.empty() || spec.v0_text.empty();
  if (need_defaults) defaults = default_initial_condition(*run.problem, spec.k);

  run.ic.x0 = spec.x0_text.empty() ? defaults.x0 : parse_vector(spec.x0_text);

  RawFrame raw;
  raw.vectors = spec.v0_text.empty() ? defaults.frame0.vectors : parse_frame_list(spec.v0_text);
  if (raw.vectors.size() != static_cast<std::size_t>(spec.k)) {
    throw input_error("frame has " + std::to_string(raw.vectors.size()) +
                      " vectors, expected k=" + std::to_string(spec.k));
  }
  GramSchmidtResult gs = gram_schmidt(raw);
  run.ic.frame0 = std::move(gs.frame);
  double correction = 0.0;
  for (double c : gs.correction_norms) correction = std::max(correction, c);
  if (correction > 1e-8) {
    std::ostringstream os;
    os << "initial frame was orthonormalized; largest correction " << correction;
    run.warning = os.str();
  }
  return run;
}

}  // namespace saddle
