#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "saddle/dynamics.hpp"
#include "saddle/problem.hpp"

using namespace saddle;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

SaddleConfig config_for(const Problem& p, int k, double tau, double T = 1.0) {
  SaddleConfig c;
  c.k = k;
  c.tau = tau;
  c.T = T;
  c.mode = p.kind;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  SaddleConfig c;
  c.tau = 0.25;
  c.T = 1.0;
  c.validate();
  CHECK(c.step_count() == 4);
  CHECK(c.l0_effective() == doctest::Approx(0.5));

  c.l0 = 0.01;
  CHECK(c.l0_effective() == 0.01);

  SaddleConfig bad = c;
  bad.tau = 0.3;  // does not divide T
  CHECK_THROWS_AS((void)bad.step_count(), input_error);

  bad = c;
  bad.k = 0;
  CHECK_THROWS_AS(bad.validate(), input_error);
  bad = c;
  bad.tau = -0.1;
  CHECK_THROWS_AS(bad.validate(), input_error);
  bad = c;
  bad.beta = 0.0;
  CHECK_THROWS_AS(bad.validate(), input_error);
}

TEST_CASE("first gradient step matches hand evaluation") {
  // tau=2^-5 from the benchmark start: F=(-3,0) is orthogonal to v=(0,1),
  // so x moves by tau*F; the direction picks up -tau*2*e1 then renormalizes.
  const Problem& sting = registry_get("stingray");
  auto cfg = config_for(sting, 1, 1.0 / 32);
  auto ic = default_initial_condition(sting, 1);
  auto s0 = make_initial_state(sting, cfg, ic);
  auto [s1, diag] = step_gradient(sting, cfg, s0);

  CHECK(s1.x.isApprox(vec2(0.90625, 1.0), 1e-15));
  const double n = std::sqrt(1.00390625);
  CHECK(s1.frame.vectors[0][0] == doctest::Approx(-0.0625 / n).epsilon(1e-13));
  CHECK(s1.frame.vectors[0][1] == doctest::Approx(1.0 / n).epsilon(1e-13));
  CHECK(s1.t == doctest::Approx(1.0 / 32));
  CHECK(s1.l.value == doctest::Approx(std::sqrt(1.0 / 32) * std::exp(-1.0 / 32)).epsilon(1e-14));
  CHECK(diag.residual == doctest::Approx(saddle_residual(sting, s1)).epsilon(1e-14));
}

TEST_CASE("first non-gradient step matches hand evaluation") {
  // F(x0) = (-0.3, 2, 0.3); v=( -1,0,0) reflects the first component.
  const Problem& ng = registry_get("nongradient3");
  auto cfg = config_for(ng, 1, 1.0 / 32);
  auto ic = default_initial_condition(ng, 1);
  auto s0 = make_initial_state(ng, cfg, ic);
  auto [s1, diag] = step_nongradient(ng, cfg, s0);
  CHECK(s1.x.isApprox(vec3(-0.990625, 1.0625, 0.009375), 1e-13));
}

TEST_CASE("gradient and non-gradient schemes coincide for k=1 on gradient problems") {
  const Problem& sting = registry_get("stingray");
  auto cfg = config_for(sting, 1, 1.0 / 64);
  auto ic = default_initial_condition(sting, 1);
  auto s0 = make_initial_state(sting, cfg, ic);

  auto g = step_gradient(sting, cfg, s0).first;
  auto n = step_nongradient(sting, cfg, s0).first;
  CHECK(g.x == n.x);
  CHECK(g.frame.vectors[0] == n.frame.vectors[0]);
}

TEST_CASE("zero force field is a fixed point of the position update") {
  Problem zero;
  zero.name = "zero-field";
  zero.dimension = 2;
  zero.kind = ProblemKind::gradient;
  zero.force = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };

  SaddleConfig cfg = config_for(zero, 1, 0.125);
  InitialCondition ic;
  ic.x0 = vec2(0.4, -0.2);
  ic.frame0.vectors = {vec2(0, 1)};
  auto traj = integrate(zero, cfg, ic);
  CHECK(traj.states.back().x == ic.x0);
  // Dimer of a zero field vanishes, so the frame never moves either.
  CHECK(traj.states.back().frame.vectors[0].isApprox(vec2(0, 1), 1e-15));
}

TEST_CASE("integrate produces K+1 states with exact dyadic times") {
  const Problem& sting = registry_get("stingray");
  auto cfg = config_for(sting, 1, 1.0 / 32);
  auto traj = integrate(sting, cfg, default_initial_condition(sting, 1));
  REQUIRE(traj.states.size() == 33);
  REQUIRE(traj.diagnostics.size() == 32);
  for (long n = 0; n <= 32; ++n) {
    CHECK(traj.states[static_cast<std::size_t>(n)].t == static_cast<double>(n) / 32.0);
    CHECK(traj.states[static_cast<std::size_t>(n)].n == n);
  }
  // l is carried analytically: l_n = e^{-t_n} l0 exactly.
  const double l0 = std::sqrt(1.0 / 32);
  for (const auto& s : traj.states) {
    CHECK(s.l.value == doctest::Approx(std::exp(-s.t) * l0).epsilon(1e-15));
  }
}

TEST_CASE("integration is bitwise deterministic") {
  const Problem& ng = registry_get("nongradient3");
  auto cfg = config_for(ng, 2, 1.0 / 64);
  auto a = integrate(ng, cfg, default_initial_condition(ng, 2));
  auto b = integrate(ng, cfg, default_initial_condition(ng, 2));
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    CHECK(a.states[i].x == b.states[i].x);
    for (std::size_t j = 0; j < a.states[i].frame.size(); ++j) {
      CHECK(a.states[i].frame.vectors[j] == b.states[i].frame.vectors[j]);
    }
  }
}

TEST_CASE("K=0 run returns only the initial state") {
  const Problem& sting = registry_get("stingray");
  auto cfg = config_for(sting, 1, 0.25, 0.0);
  auto traj = integrate(sting, cfg, default_initial_condition(sting, 1));
  CHECK(traj.states.size() == 1);
  CHECK(traj.step_count() == 0);
}

TEST_CASE("residual decreases over the index-1 benchmark run") {
  const Problem& sting = registry_get("stingray");
  auto cfg = config_for(sting, 1, 1.0 / 256);
  auto traj = integrate(sting, cfg, default_initial_condition(sting, 1));
  const double r0 = saddle_residual(sting, traj.states.front());
  const double rK = traj.diagnostics.back().residual;
  CHECK(rK < r0);
}

TEST_CASE("divergence guard names the step") {
  // Pure ascent on an unbounded quadratic-force field blows up in finite time.
  const Problem& sting = registry_get("stingray");
  auto cfg = config_for(sting, 2, 1.0 / 8192);
  try {
    (void)integrate(sting, cfg, default_initial_condition(sting, 2));
    FAIL("expected divergence_error");
  } catch (const divergence_error& e) {
    CHECK(e.step() > 0);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("mode and problem kind must agree") {
  const Problem& sting = registry_get("stingray");
  SaddleConfig cfg = config_for(sting, 1, 0.25);
  cfg.mode = ProblemKind::nongradient;
  CHECK_THROWS_AS((void)integrate(sting, cfg, default_initial_condition(sting, 1)), input_error);
}

TEST_CASE("initial state validation") {
  const Problem& sting = registry_get("stingray");
  auto cfg = config_for(sting, 2, 0.25);

  InitialCondition bad_dim;
  bad_dim.x0 = vec3(1, 1, 1);
  bad_dim.frame0.vectors = {vec2(0, 1), vec2(1, 0)};
  CHECK_THROWS_AS((void)make_initial_state(sting, cfg, bad_dim), input_error);

  InitialCondition bad_count;
  bad_count.x0 = vec2(1, 1);
  bad_count.frame0.vectors = {vec2(0, 1)};  // k=2 expected
  CHECK_THROWS_AS((void)make_initial_state(sting, cfg, bad_count), input_error);

  InitialCondition skew;
  skew.x0 = vec2(1, 1);
  skew.frame0.vectors = {vec2(0, 1), vec2(0.5, 0.5)};
  CHECK_THROWS_AS((void)make_initial_state(sting, cfg, skew), input_error);

  // l0 conflict: both config and initial condition set a value.
  SaddleConfig with_l0 = config_for(sting, 1, 0.25);
  with_l0.l0 = 0.1;
  InitialCondition ic = default_initial_condition(sting, 1);
  ic.l0 = 0.2;
  CHECK_THROWS_AS((void)make_initial_state(sting, with_l0, ic), input_error);

  // Without the config override the initial condition's l0 is adopted.
  SaddleConfig plain = config_for(sting, 1, 0.25);
  auto s = make_initial_state(sting, plain, ic);
  CHECK(s.l.initial == 0.2);
}

TEST_CASE("k=N full frame still integrates on a linear saddle") {
  // diag(-1, 1): bounded in both the descent and ascent directions over T=1.
  const Problem& lin = registry_get("linear");
  auto cfg = config_for(lin, 2, 1.0 / 64);
  InitialCondition ic;
  ic.x0 = vec2(0.5, 0.5);
  ic.frame0.vectors = {vec2(1, 0), vec2(0, 1)};
  auto traj = integrate(lin, cfg, ic);
  CHECK(traj.states.back().x.allFinite());
  // Full-frame reflector is -I: x' = -F = -(M x), explicit Euler on it.
  Vec expect = ic.x0;
  Eigen::Matrix2d M;
  M << -1, 0, 0, 1;
  for (int n = 0; n < 64; ++n) expect -= (1.0 / 64) * (M * expect);
  CHECK(traj.states.back().x.isApprox(expect, 1e-12));
}
