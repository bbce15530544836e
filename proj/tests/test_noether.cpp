#include <catch_amalgamated.hpp>

#include <chrono>
#include <cmath>

#include "symdirect/noether.hpp"
#include "symdirect/problem_io.hpp"

using namespace symdirect;

namespace {

ProblemFile load(const std::string& name) { return load_problem_file(std::string(SYMDIRECT_FIXTURES) + "/" + name); }

Expr P(const ProblemSpec& p, const std::string& text) { return parse(text, p.space); }

ProblemSpec rocket_instance(const std::string& t0, const std::string& t1, const std::string& alpha) {
  auto f = load("rocket_symbolic.ocp");
  return instantiate(f.problem, {{"T0", parse_unchecked(t0)},
                                 {"tau", parse_unchecked("(" + t1 + ") - (" + t0 + ")")},
                                 {"alpha", parse_unchecked(alpha)}});
}

}  // namespace

TEST_CASE("generalized pins follow the state shifts") {
  auto simple = load("simple_symbolic.ocp");
  auto g = generalize(simple.problem, *simple.symmetry);
  REQUIRE(g.pins.size() == 2);
  CHECK(equal(g.pins[0].value, P(simple.problem, "alpha + s*a")));
  CHECK(equal(g.pins[1].value, P(simple.problem, "beta + s*b")));

  auto rocket = load("rocket_symbolic.ocp");
  auto gr = generalize(rocket.problem, *rocket.symmetry);
  CHECK(equal(gr.pins[0].value, P(rocket.problem, "s^2*T0^2/2 - alpha")));
  CHECK(equal(gr.pins[1].value, P(rocket.problem, "s^2*(T0 + tau)^2/2")));
  CHECK(equal(gr.pins[2].value, P(rocket.problem, "s^2*(T0 + tau)")));

  auto id = generalize(rocket.problem, TransformFamily::identity(rocket.problem.space));
  for (std::size_t i = 0; i < 3; ++i) CHECK(equal(id.pins[i].value, rocket.problem.boundary[i].value));
}

TEST_CASE("generalize rejects non-symmetries and non-shift families") {
  auto f = load("simple_bad_gauge.ocp");
  CHECK_THROWS_AS(generalize(f.problem, *f.symmetry), ValidationError);
  auto fam = *load("simple.ocp").symmetry;
  fam.x_maps = {P(f.problem, "x + s*x")};
  CHECK_THROWS_AS(generalize(f.problem, fam), Unsupported);
}

TEST_CASE("parameter fit on the integrator") {
  auto f = load("simple_symbolic.ocp");
  auto fit = fit_parameter(generalize(f.problem, *f.symmetry), {});
  REQUIRE(fit.roots.size() == 1);
  CHECK(fit.power == 1);
  CHECK(equal(*fit.roots[0].power_value, P(f.problem, "(beta - alpha)/(a - b)")));

  auto same = instantiate(f.problem, {{"a", Expr(0)}, {"b", Expr(1)}, {"alpha", Expr(3)}, {"beta", Expr(3)}});
  auto fit0 = fit_parameter(generalize(same, *f.symmetry), {});
  REQUIRE(fit0.roots.size() == 1);
  CHECK(fit0.roots[0].value == 0.0);
}

TEST_CASE("parameter fit on the rocket returns both roots") {
  struct Case {
    const char *t0, *t1, *alpha;
  };
  for (auto c : {Case{"0", "1", "1"}, Case{"1", "3", "2"}, Case{"0", "2", "1/2"}}) {
    auto p = rocket_instance(c.t0, c.t1, c.alpha);
    auto fit = fit_parameter(generalize(p, *load("rocket.ocp").symmetry), {});
    const double tau = std::stod(c.t1) - std::stod(c.t0);
    const double alpha = eval(parse_unchecked(c.alpha), {});
    const double expected = std::sqrt(2 * alpha) / tau;
    REQUIRE(fit.roots.size() == 2);
    CHECK(fit.power == 2);
    CHECK(std::abs(fit.roots[0].value + expected) <= 1e-12);
    CHECK(std::abs(fit.roots[1].value - expected) <= 1e-12);
  }
  auto sym = load("rocket_symbolic.ocp");
  auto fit = fit_parameter(generalize(sym.problem, *sym.symmetry), {});
  REQUIRE(fit.roots.size() == 2);
  CHECK(equal(*fit.roots[0].power_value, P(sym.problem, "2*alpha/tau^2")));
}

TEST_CASE("parameter fit failures") {
  auto f = load("infeasible.ocp");
  CHECK_THROWS_AS(fit_parameter(generalize(f.problem, *f.symmetry), {}), SolverError);

  auto simple = load("simple.ocp");
  auto p = simple.problem;
  p.boundary.pop_back();
  auto free_end = fit_parameter(generalize(p, *simple.symmetry), {});
  REQUIRE(free_end.roots.size() == 1);
  CHECK(free_end.roots[0].value == 0.0);
  p.boundary.clear();
  CHECK_THROWS_WITH(fit_parameter(generalize(p, *simple.symmetry), {}),
                    Catch::Matchers::ContainsSubstring("degenerate boundary data"));
}

TEST_CASE("real root scan") {
  const Poly s = Poly::variable("s");
  const Poly p = (s * s - Poly(2)) * (s - Poly(3)) * (s - Poly(3));
  auto roots = detail::real_roots(p, "s", -100, 100, 10000);
  REQUIRE(roots.size() == 3);
  CHECK(roots[0] == Catch::Approx(-std::sqrt(2.0)).epsilon(1e-14));
  CHECK(roots[1] == Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(roots[2] == 3.0);
  CHECK(detail::real_roots(s * s + Poly(1), "s", -100, 100, 10000).empty());
}

TEST_CASE("trivial-control certificate") {
  auto f = load("simple.ocp");
  auto p = f.problem;
  CHECK(certify_trivial(p, {}) == Status::CertifiedGlobal);
  p.lagrangian = P(p, "u^2 + x^2");
  CHECK(certify_trivial(p, {}) == Status::Candidate);
  p.lagrangian = P(p, "(u - 1)^2");
  CHECK(certify_trivial(p, {Expr(1)}) == Status::CertifiedGlobal);
  CHECK(certify_trivial(p, {}) == Status::Candidate);
  p.lagrangian = P(p, "t^2*u^4 + 3*u^2");
  CHECK(certify_trivial(p, {}) == Status::CertifiedGlobal);
  p.lagrangian = P(p, "u^3");
  CHECK(certify_trivial(p, {}) == Status::Candidate);
  p.lagrangian = P(p, "-u^2");
  CHECK(certify_trivial(p, {}) == Status::Candidate);
}

TEST_CASE("direct method on the integrator with symbolic data") {
  auto f = load("simple_symbolic.ocp");
  const auto start = std::chrono::steady_clock::now();
  auto sols = noether_solve(f.problem, *f.symmetry);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 1.0);
  REQUIRE(sols.size() == 1);
  const auto& x = sols[0].states[0];
  CHECK(equal(coeff_in(x, "t", 0), P(f.problem, "(beta*a - b*alpha)/(a - b)")));
  CHECK(equal(coeff_in(x, "t", 1), P(f.problem, "(alpha - beta)/(a - b)")));
  CHECK(equal(sols[0].controls[0], P(f.problem, "(alpha - beta)/(a - b)")));
  CHECK(sols[0].status == Status::CertifiedGlobal);
  REQUIRE(sols[0].exact_cost);
  CHECK(equal(*sols[0].exact_cost, P(f.problem, "(beta - alpha)^2/(b - a)")));
}

TEST_CASE("direct method on the numeric integrator") {
  auto f = load("simple.ocp");
  auto sols = noether_solve(f.problem, *f.symmetry);
  REQUIRE(sols.size() == 1);
  CHECK(equal(sols[0].states[0], P(f.problem, "t")));
  CHECK(sols[0].cost == 1.0);
  CHECK(sols[0].diagnostics.dyn_residual == 0.0);
  CHECK(sols[0].diagnostics.bc_residual == 0.0);

  auto flat = f.problem;
  flat.boundary[1].value = Expr(0);
  auto zero = noether_solve(flat, *f.symmetry);
  REQUIRE(zero.size() == 1);
  CHECK(is_zero(zero[0].states[0]));
  CHECK(is_zero(zero[0].controls[0]));
  CHECK(zero[0].cost == 0.0);
}

TEST_CASE("direct method on the rocket") {
  auto f = load("rocket.ocp");
  auto sols = noether_solve(f.problem, *f.symmetry);
  REQUIRE(sols.size() == 2);
  for (const auto& s : sols) {
    CHECK(equal(s.controls[0], Expr(-2)));
    CHECK(equal(s.states[1], P(f.problem, "-2*t + 2")));
    CHECK(equal(s.states[0], P(f.problem, "-t^2 + 2*t - 1")));
    CHECK(s.cost == 4.0);
    // x2(t0) is free and the gauge reads it, so optimality does not transfer
    CHECK(s.status == Status::Candidate);
    bool noted = false;
    for (const auto& n : s.diagnostics.notes) noted = noted || n.find("x2(t0)") != std::string::npos;
    CHECK(noted);
  }
  CHECK(sols[0].diagnostics.parameter_values[0] == Catch::Approx(-std::sqrt(2.0)));
}

TEST_CASE("direct method on the rocket with both velocities pinned") {
  auto f = load("rocket_pinned.ocp");
  auto sols = noether_solve(f.problem, *f.symmetry);
  REQUIRE(sols.size() == 2);
  for (const auto& s : sols) {
    CHECK(equal(s.controls[0], Expr(-2)));
    CHECK(s.status == Status::CertifiedGlobal);
    CHECK(s.cost == 4.0);
  }
}

TEST_CASE("direct method on the rocket with symbolic data") {
  auto f = load("rocket_symbolic.ocp");
  const auto start = std::chrono::steady_clock::now();
  auto sols = noether_solve(f.problem, *f.symmetry);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 2.0);
  REQUIRE(sols.size() == 2);
  const auto& p = f.problem;
  for (const auto& s : sols) {
    CHECK(equal(s.controls[0], P(p, "-2*alpha/tau^2")));
    CHECK(equal(s.states[1], P(p, "-(2*alpha/tau^2)*t + (2*alpha/tau)*(T0/tau + 1)")));
    const Expr t1 = P(p, "T0 + tau");
    const Expr x1 = P(p, "-alpha") + P(p, "2*alpha/tau^2") * (t1 * (P(p, "t") - P(p, "T0")) -
                                                              (P(p, "t^2") - P(p, "T0^2")) / Expr(2));
    for (int k = 0; k <= 2; ++k) CHECK(equal(coeff_in(s.states[0], "t", k), coeff_in(x1, "t", k)));
    REQUIRE(s.exact_cost);
    CHECK(equal(*s.exact_cost, P(p, "4*alpha^2/tau^3")));
  }
}

TEST_CASE("forward transform of the solution gives the trivial trajectory") {
  auto f = load("rocket.ocp");
  auto g = generalize(f.problem, *f.symmetry);
  auto fit = fit_parameter(g, {});
  auto sols = noether_solve(f.problem, *f.symmetry);
  for (std::size_t r = 0; r < sols.size(); ++r) {
    const Expr w = *fit.roots[r].power_value;
    for (std::size_t i = 0; i < 2; ++i) {
      Expr forward = canonical(substitute(f.symmetry->x_maps[i], {{"x1", sols[r].states[0]}, {"x2", sols[r].states[1]}}));
      Expr diff = canonical(forward - fit.trivial_states[i]);
      Poly reduced = detail::reduce_power(diff.rational(), "s", 2, "w").num();
      CHECK(RatFunc(reduced).substitute({{"w", w.rational()}}).is_zero());
    }
    Expr u_fwd = canonical(substitute(f.symmetry->u_maps[0], {{"u", sols[r].controls[0]}}));
    CHECK(RatFunc(detail::reduce_power(u_fwd.rational(), "s", 2, "w").num()).substitute({{"w", w.rational()}}).is_zero());
  }
}

TEST_CASE("shooting fallback agrees with the closed form") {
  auto f = load("rocket.ocp");
  NoetherOptions opt;
  opt.fit.force_numeric = true;
  auto sols = noether_solve(f.problem, *f.symmetry, opt);
  REQUIRE(sols.size() == 2);
  CHECK(std::abs(std::abs(sols[0].diagnostics.parameter_values[0]) - std::sqrt(2.0)) < 1e-8);
  for (const auto& s : sols) {
    REQUIRE(s.samples);
    CHECK(s.cost == Catch::Approx(4.0).epsilon(1e-8));
    for (std::size_t k = 0; k < s.samples->times.size(); ++k) {
      const double t = s.samples->times[k];
      CHECK(std::abs(s.samples->states[k][0] - (-t * t + 2 * t - 1)) < 1e-8);
      CHECK(std::abs(s.samples->controls[k][0] + 2.0) < 1e-8);
    }
  }
}
