#include <catch_amalgamated.hpp>

#include "symdirect/linear.hpp"
#include "symdirect/problem_io.hpp"

using namespace symdirect;

namespace {

std::string fixture(const std::string& name) { return std::string(SYMDIRECT_FIXTURES) + "/" + name; }

Solution closed_form(const ProblemSpec& p, const std::vector<std::string>& xs, const std::vector<std::string>& us) {
  Solution s;
  for (const auto& x : xs) s.states.push_back(parse(x, p.space));
  for (const auto& u : us) s.controls.push_back(parse(u, p.space));
  return s;
}

}  // namespace

TEST_CASE("fixtures load with their symmetry sections") {
  auto simple = load_problem_file(fixture("simple.ocp"));
  CHECK(simple.problem.space.n() == 1);
  CHECK(simple.problem.boundary.size() == 2);
  REQUIRE(simple.symmetry);
  CHECK(to_string(*simple.symmetry->gauge) == "s^2*t + 2*s*x");

  auto rocket = load_problem_file(fixture("rocket.ocp"));
  CHECK(rocket.problem.space.n() == 2);
  CHECK(rocket.problem.boundary.size() == 3);
  CHECK(rocket.problem.is_numeric());

  auto sym = load_problem_file(fixture("rocket_symbolic.ocp"));
  CHECK_FALSE(sym.problem.is_numeric());
  CHECK(equal(sym.problem.t1, parse("T0 + tau", sym.problem.space)));
  CHECK_THROWS_AS(sym.problem.t1_value(), ValidationError);

  CHECK_FALSE(load_problem_file(fixture("simple_nosym.ocp")).symmetry);
}

TEST_CASE("print then load reproduces the problem") {
  for (const char* name : {"simple.ocp", "rocket.ocp", "rocket_symbolic.ocp", "simple_symbolic.ocp"}) {
    auto a = load_problem_file(fixture(name));
    const std::string text = print_problem(a);
    auto b = load_problem(text);
    CHECK(print_problem(b) == text);
    CHECK(equal(a.problem.lagrangian, b.problem.lagrangian));
    REQUIRE(b.problem.boundary.size() == a.problem.boundary.size());
    for (std::size_t i = 0; i < a.problem.boundary.size(); ++i)
      CHECK(equal(a.problem.boundary[i].value, b.problem.boundary[i].value));
  }
}

TEST_CASE("malformed problems are rejected") {
  const std::string head = "[problem]\nstate = [\"x1\", \"x2\"]\ncontrol = [\"u\"]\nt0 = 0\nt1 = 1\nlagrangian = \"u^2\"\n";
  CHECK_THROWS_WITH(load_problem(head + "dynamics = [\"u\"]\n"), Catch::Matchers::ContainsSubstring("dimension mismatch"));
  CHECK_THROWS_AS(load_problem(head + "dynamics = [\"x2\", \"u\"]\nboundary = [[\"t0\", \"x1\", 0], [\"t0\", \"x1\", 1]]\n"),
                  ValidationError);
  CHECK_THROWS_AS(load_problem(head + "dynamics = [\"x2\", \"w\"]\n"), UnknownIdentifier);
  CHECK_THROWS_AS(load_problem(head + "dynamics = [\"x2\", \"u\"]\nfoo = 1\n"), ParseError);
  CHECK_THROWS_AS(load_problem(head + "dynamics = [\"x2\", \"u*s\"]\n"), ValidationError);
  CHECK_THROWS_AS(load_problem("[problem]\nstate = [\"x\"]\ncontrol = [\"u\"]\nt0 = 1\nt1 = 0\nlagrangian = \"u^2\"\n"
                               "dynamics = [\"u\"]\n"),
                  ValidationError);
  CHECK_THROWS_AS(load_problem_file(fixture("missing.ocp")), ValidationError);
}

TEST_CASE("cost and residuals of closed forms") {
  auto rocket = load_problem_file(fixture("rocket.ocp")).problem;
  auto sol = closed_form(rocket, {"-t^2 + 2*t - 1", "-2*t + 2"}, {"-2"});
  CHECK(cost_of(rocket, sol, 200) == Catch::Approx(4.0).epsilon(1e-12));
  auto r = residuals(rocket, sol, 100);
  CHECK(r.dynamics == 0.0);
  CHECK(r.boundary == 0.0);
  auto exact = exact_cost(rocket, sol.states, sol.controls);
  REQUIRE(exact);
  CHECK(to_string(*exact) == "4");

  auto simple = load_problem_file(fixture("simple.ocp")).problem;
  auto line = closed_form(simple, {"t"}, {"1"});
  CHECK(cost_of(simple, line, 10) == Catch::Approx(1.0).epsilon(1e-14));
  auto zero = closed_form(simple, {"0"}, {"0"});
  CHECK(cost_of(simple, zero, 10) == 0.0);
  CHECK(residuals(simple, zero, 10).boundary == Catch::Approx(1.0));

  auto wrong = closed_form(simple, {"t^2"}, {"1"});
  CHECK(residuals(simple, wrong, 10).dynamics == Catch::Approx(1.0));
}

TEST_CASE("sampled trajectories use interval controls") {
  auto simple = load_problem_file(fixture("simple.ocp")).problem;
  Solution s;
  SampledTrajectory traj;
  traj.interval_controls = true;
  for (int k = 0; k <= 4; ++k) {
    traj.times.push_back(k / 4.0);
    traj.states.push_back({k / 4.0});
  }
  traj.controls.assign(4, {1.0});
  s.samples = traj;
  CHECK(cost_of(simple, s, 4) == Catch::Approx(1.0));
  auto r = residuals(simple, s, 4);
  CHECK(r.dynamics == Catch::Approx(0.0).margin(1e-15));
  CHECK(r.boundary == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("linear solve keeps later unknowns free") {
  VarSpace v;
  v.states = {"x"};
  v.controls = {"u"};
  v.coefficients = {"a", "b", "p", "q", "r"};
  auto sol = solve_linear({parse("p + q - a", v), parse("q - r*b", v)}, {"p", "q", "r"});
  CHECK(sol.consistent());
  CHECK(sol.rank == 2);
  REQUIRE(sol.free == std::vector<std::string>{"r"});
  CHECK(equal(sol.values.at("p"), parse("a - r*b", v)));

  auto bad = solve_linear({parse("p - 1", v), parse("p - a", v)}, {"p"});
  CHECK_FALSE(bad.consistent());
  const bool either = equal(bad.conditions.at(0), parse("a - 1", v)) || equal(bad.conditions.at(0), parse("1 - a", v));
  CHECK(either);
  CHECK_THROWS_AS(solve_linear({parse("p*q", v)}, {"p", "q"}), Unsupported);
}
