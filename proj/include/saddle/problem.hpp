#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "saddle/types.hpp"

namespace saddle {

enum class ProblemKind { gradient, nongradient };

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& s);

/// A force-field definition. `force` is required and must be total on R^N.
/// `energy` (gradient kind only) and `exact_hvp` (the exact H(x)v or J(x)v)
/// are optional and exist mainly as oracles for the dimer approximation.
struct Problem {
  std::string name;
  int dimension = 0;
  ProblemKind kind = ProblemKind::gradient;
  std::function<Vec(const Vec&)> force;
  std::function<double(const Vec&)> energy;
  std::function<Vec(const Vec&, const Vec&)> exact_hvp;

  bool has_energy() const { return static_cast<bool>(energy); }
  bool has_exact_hvp() const { return static_cast<bool>(exact_hvp); }
};

/// Evaluate problem.force with dimension checks on both sides.
Vec eval_force(const Problem& problem, const Vec& x);

/// Look up a registered problem. Built-ins: "stingray", "nongradient3",
/// "linear", "cubic1d". Unknown names raise lookup_error listing what exists.
const Problem& registry_get(const std::string& name);

/// Register a user problem. Rejects duplicate names and incomplete records.
void registry_register(Problem problem);

std::vector<std::string> registry_names();

/// Register linear problems (F(x) = M x + offset) from a JSON definition
/// file: either one object or an array of {"name", "matrix" (row-major),
/// "offset"}. Returns the registered names. A symmetric matrix yields a
/// gradient problem with energy attached; otherwise kind is non-gradient.
std::vector<std::string> load_problem_file(const std::filesystem::path& path);

/// Build a linear Problem without registering it.
Problem make_linear_problem(std::string name, const std::vector<double>& matrix_row_major,
                            const std::vector<double>& offset);

/// The built-in starting data for "stingray" and "nongradient3" at index k;
/// raises input_error for problems or indices without one.
InitialCondition default_initial_condition(const Problem& problem, int k, double l0 = 0.0);

// Built-in fields, exposed directly so they can be probed without the registry.
Vec stingray_force(const Vec& x);
double stingray_energy(const Vec& x);
Vec exact_hvp_stingray(const Vec& x, const Vec& v);
Vec nongradient3_force(const Vec& x);
Vec exact_hvp_nongradient3(const Vec& x, const Vec& v);

}  // namespace saddle
