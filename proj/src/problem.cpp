#include "saddle/problem.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace saddle {

const char* to_string(ProblemKind kind) {
  return kind == ProblemKind::gradient ? "gradient" : "non-gradient";
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "gradient") return ProblemKind::gradient;
  if (s == "non-gradient" || s == "nongradient") return ProblemKind::nongradient;
  throw input_error("unknown problem kind \"" + s + "\" (expected gradient or non-gradient)");
}

Vec eval_force(const Problem& problem, const Vec& x) {
  if (x.size() != problem.dimension) {
    throw input_error("force evaluation: position dimension " + std::to_string(x.size()) +
                      " does not match problem \"" + problem.name + "\" (N=" +
                      std::to_string(problem.dimension) + ")");
  }
  Vec f = problem.force(x);
  if (f.size() != problem.dimension) {
    throw input_error("force evaluation: problem \"" + problem.name +
                      "\" returned a vector of wrong dimension");
  }
  return f;
}

// ---------------------------------------------------------------------------
// Built-in fields
// ---------------------------------------------------------------------------

double stingray_energy(const Vec& x) {
  return x[0] * x[0] + (x[0] - 1.0) * x[1] * x[1];
}

Vec stingray_force(const Vec& x) {
  Vec f(2);
  f[0] = -2.0 * x[0] - x[1] * x[1];
  f[1] = -2.0 * (x[0] - 1.0) * x[1];
  return f;
}

Vec exact_hvp_stingray(const Vec& x, const Vec& v) {
  // H = -Hess(E) with Hess(E) = [[2, 2 x2], [2 x2, 2 (x1 - 1)]]
  Vec h(2);
  h[0] = -(2.0 * v[0] + 2.0 * x[1] * v[1]);
  h[1] = -(2.0 * x[1] * v[0] + 2.0 * (x[0] - 1.0) * v[1]);
  return h;
}

namespace {

const Eigen::Matrix3d& nongradient3_matrix() {
  static const Eigen::Matrix3d m = [] {
    Eigen::Matrix3d mm;
    mm << 1.0, 0.5, 0.0,  //
        -0.5, 1.0, -0.3,  //
        0.0, -0.2, 1.0;
    return mm;
  }();
  return m;
}

constexpr double kNg3Centers[3] = {1.0, 2.0, -1.0};

}  // namespace

Vec nongradient3_force(const Vec& x) {
  Vec f = nongradient3_matrix() * x;
  for (int i = 0; i < 3; ++i) {
    const double s = x[i] - kNg3Centers[i];
    f[i] += 1.0 / (1.0 + s * s);
  }
  return f;
}

Vec exact_hvp_nongradient3(const Vec& x, const Vec& v) {
  // J = M + diag(g_i'(x_i)), g_i(s) = 1 / (1 + (s - c_i)^2)
  Vec h = nongradient3_matrix() * v;
  for (int i = 0; i < 3; ++i) {
    const double s = x[i] - kNg3Centers[i];
    const double denom = 1.0 + s * s;
    h[i] += -2.0 * s / (denom * denom) * v[i];
  }
  return h;
}

// ---------------------------------------------------------------------------
// Linear problems
// ---------------------------------------------------------------------------

Problem make_linear_problem(std::string name, const std::vector<double>& matrix_row_major,
                            const std::vector<double>& offset) {
  const int n = static_cast<int>(offset.size());
  if (n < 1) {
    throw input_error("linear problem \"" + name + "\": offset must have at least one entry");
  }
  if (matrix_row_major.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw input_error("linear problem \"" + name + "\": matrix has " +
                      std::to_string(matrix_row_major.size()) + " entries, expected " +
                      std::to_string(n * n));
  }

  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      m(r, c) = matrix_row_major[static_cast<std::size_t>(r) * n + c];
    }
  }
  Vec b = Eigen::Map<const Vec>(offset.data(), n);

  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  const bool symmetric = (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;

  Problem p;
  p.name = std::move(name);
  p.dimension = n;
  p.kind = symmetric ? ProblemKind::gradient : ProblemKind::nongradient;
  p.force = [m, b](const Vec& x) -> Vec { return m * x + b; };
  p.exact_hvp = [m](const Vec&, const Vec& v) -> Vec { return m * v; };
  if (symmetric) {
    // F = M x + b derives from E(x) = -x^T M x / 2 - b^T x via F = -grad E.
    p.energy = [m, b](const Vec& x) -> double { return -0.5 * x.dot(m * x) - b.dot(x); };
  }
  return p;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, Problem>& registry_map() {
  static std::map<std::string, Problem> problems = [] {
    std::map<std::string, Problem> map;

    Problem stingray;
    stingray.name = "stingray";
    stingray.dimension = 2;
    stingray.kind = ProblemKind::gradient;
    stingray.force = stingray_force;
    stingray.energy = stingray_energy;
    stingray.exact_hvp = exact_hvp_stingray;
    map.emplace(stingray.name, std::move(stingray));

    Problem ng3;
    ng3.name = "nongradient3";
    ng3.dimension = 3;
    ng3.kind = ProblemKind::nongradient;
    ng3.force = nongradient3_force;
    ng3.exact_hvp = exact_hvp_nongradient3;
    map.emplace(ng3.name, std::move(ng3));

    map.emplace("linear", make_linear_problem("linear", {-1.0, 0.0, 0.0, 1.0}, {0.0, 0.0}));

    Problem cubic;
    cubic.name = "cubic1d";
    cubic.dimension = 1;
    cubic.kind = ProblemKind::gradient;
    cubic.force = [](const Vec& x) -> Vec {
      Vec f(1);
      f[0] = x[0] * x[0] * x[0];
      return f;
    };
    cubic.energy = [](const Vec& x) -> double { return -0.25 * std::pow(x[0], 4); };
    cubic.exact_hvp = [](const Vec& x, const Vec& v) -> Vec {
      Vec h(1);
      h[0] = 3.0 * x[0] * x[0] * v[0];
      return h;
    };
    map.emplace(cubic.name, std::move(cubic));

    return map;
  }();
  return problems;
}

}  // namespace

const Problem& registry_get(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  const auto& map = registry_map();
  auto it = map.find(name);
  if (it == map.end()) {
    std::ostringstream os;
    os << "unknown problem \"" << name << "\"; available:";
    for (const auto& [key, value] : map) os << " " << key;
    throw lookup_error(os.str());
  }
  return it->second;
}

void registry_register(Problem problem) {
  if (problem.name.empty()) throw input_error("registry_register: problem name must be non-empty");
  if (problem.dimension < 1) throw input_error("registry_register: dimension must be >= 1");
  if (!problem.force) throw input_error("registry_register: force must be set");
  if (problem.kind == ProblemKind::nongradient && problem.has_energy()) {
    throw input_error("registry_register: non-gradient problems cannot carry an energy");
  }
  std::lock_guard<std::mutex> lock(registry_mutex());
  auto& map = registry_map();
  if (map.contains(problem.name)) {
    throw input_error("registry_register: problem \"" + problem.name + "\" already registered");
  }
  map.emplace(problem.name, std::move(problem));
}

std::vector<std::string> registry_names() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [key, value] : registry_map()) names.push_back(key);
  return names;
}

std::vector<std::string> load_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw input_error("cannot open problem file " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("problem file " + path.string() + ": " + e.what());
  }

  auto parse_one = [&](const nlohmann::json& entry) -> Problem {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("matrix") ||
        !entry.contains("offset")) {
      throw input_error("problem file " + path.string() +
                        ": each entry needs \"name\", \"matrix\", \"offset\"");
    }
    return make_linear_problem(entry.at("name").get<std::string>(),
                               entry.at("matrix").get<std::vector<double>>(),
                               entry.at("offset").get<std::vector<double>>());
  };

  std::vector<std::string> names;
  if (doc.is_array()) {
    for (const auto& entry : doc) {
      Problem p = parse_one(entry);
      names.push_back(p.name);
      registry_register(std::move(p));
    }
  } else {
    Problem p = parse_one(doc);
    names.push_back(p.name);
    registry_register(std::move(p));
  }
  return names;
}

// ---------------------------------------------------------------------------
// Built-in starting data
// ---------------------------------------------------------------------------

InitialCondition default_initial_condition(const Problem& problem, int k, double l0) {
  InitialCondition ic;
  ic.l0 = l0;
  if (problem.name == "stingray") {
    ic.x0 = Vec(2);
    ic.x0 << 1.0, 1.0;
    if (k == 1) {
      Vec v(2);
      v << 0.0, 1.0;
      ic.frame0.vectors = {v};
      return ic;
    }
    if (k == 2) {
      Vec v1(2), v2(2);
      v1 << 0.0, 1.0;
      v2 << 1.0, 0.0;
      ic.frame0.vectors = {v1, v2};
      return ic;
    }
  } else if (problem.name == "nongradient3") {
    ic.x0 = Vec(3);
    ic.x0 << -1.0, 1.0, 0.0;
    if (k == 1) {
      Vec v(3);
      v << -1.0, 0.0, 0.0;
      ic.frame0.vectors = {v};
      return ic;
    }
    if (k == 2) {
      const double r = 1.0 / std::sqrt(2.0);
      Vec v1(3), v2(3);
      v1 << -r, r, 0.0;
      v2 << r, r, 0.0;
      ic.frame0.vectors = {v1, v2};
      return ic;
    }
  }
  throw input_error("no built-in initial condition for problem \"" + problem.name +
                    "\" at index k=" + std::to_string(k) + "; pass x0 and v0 explicitly");
}

}  // namespace saddle
