#include <catch_amalgamated.hpp>

#include "symdirect/problem_io.hpp"
#include "symdirect/symmetry.hpp"

using namespace symdirect;

namespace {

ProblemFile load(const std::string& name) { return load_problem_file(std::string(SYMDIRECT_FIXTURES) + "/" + name); }

}  // namespace

TEST_CASE("fixture symmetries are exact invariances") {
  for (const char* name : {"simple.ocp", "rocket.ocp", "simple_symbolic.ocp", "rocket_symbolic.ocp"}) {
    auto f = load(name);
    auto rep = check_invariance(f.problem, *f.symmetry);
    INFO(name);
    CHECK(rep.mode == CheckMode::SymbolicExact);
    CHECK(rep.invariant());
    CHECK(is_zero(rep.lagrangian_residual));
  }
}

TEST_CASE("perturbed gauge leaves a residual") {
  auto f = load("simple_bad_gauge.ocp");
  auto rep = check_invariance(f.problem, *f.symmetry);
  CHECK_FALSE(rep.invariant());
  CHECK(rep.dynamics_ok.at(0));
  CHECK(equal(rep.lagrangian_residual, parse("-s*u", f.problem.space)));
}

TEST_CASE("gauge shifted by a function of s alone gives the same verdict") {
  for (const char* name : {"simple.ocp", "rocket.ocp", "simple_bad_gauge.ocp"}) {
    auto f = load(name);
    auto g = *f.symmetry;
    g.gauge = *g.gauge + pow(Expr::symbol("s"), 3);
    auto a = check_invariance(f.problem, *f.symmetry);
    auto b = check_invariance(f.problem, g);
    CHECK(a.invariant() == b.invariant());
    CHECK(equal(a.lagrangian_residual, b.lagrangian_residual));
  }
}

TEST_CASE("numeric sampling agrees with the symbolic verdict") {
  SamplingOptions opt;
  opt.force_numeric = true;
  auto good = load("rocket.ocp");
  auto rep = check_invariance(good.problem, *good.symmetry, opt);
  CHECK(rep.mode == CheckMode::NumericSampled);
  CHECK(rep.invariant());
  CHECK(rep.max_sampled_residual <= 1e-9);
  auto bad = load("simple_bad_gauge.ocp");
  auto rb = check_invariance(bad.problem, *bad.symmetry, opt);
  CHECK_FALSE(rb.invariant());
  CHECK(rb.max_sampled_residual > 1e-3);
}

TEST_CASE("time-scaling families fall back to sampling") {
  auto f = load("simple.ocp");
  TransformFamily fam = *f.symmetry;
  fam.t_map = parse("t + s*t", f.problem.space);
  fam.x_maps = {parse("x", f.problem.space)};
  fam.u_maps = {parse("u", f.problem.space)};
  fam.gauge = Expr(0);
  auto rep = check_invariance(f.problem, fam);
  CHECK(rep.mode == CheckMode::NumericSampled);
  CHECK_FALSE(rep.invariant());
}

TEST_CASE("invariance preconditions") {
  auto f = load("simple.ocp");
  auto fam = *f.symmetry;
  fam.gauge.reset();
  CHECK_THROWS_WITH(check_invariance(f.problem, fam), Catch::Matchers::ContainsSubstring("synthesize_gauge"));
  fam.gauge = parse("s*u", f.problem.space);
  CHECK_THROWS_AS(check_invariance(f.problem, fam), Unsupported);
  fam = *f.symmetry;
  fam.x_maps = {parse("x + 1 + s", f.problem.space)};
  CHECK_THROWS_AS(check_invariance(f.problem, fam), ValidationError);
}

TEST_CASE("gauge synthesis recovers the fixture gauges") {
  for (const char* name : {"simple.ocp", "rocket.ocp", "rocket_symbolic.ocp"}) {
    auto f = load(name);
    Expr phi = synthesize_gauge(f.problem, *f.symmetry);
    INFO(name << ": " << to_string(phi));
    CHECK(equal(phi, *f.symmetry->gauge));
  }
  auto f = load("simple.ocp");
  CHECK(is_zero(synthesize_gauge(f.problem, TransformFamily::identity(f.problem.space))));
}

TEST_CASE("gauge synthesis fails when the excess is not a total derivative") {
  auto f = load("simple.ocp");
  f.problem.lagrangian = parse("u^2 + x^2", f.problem.space);
  auto fam = *f.symmetry;
  fam.x_maps = {parse("x + s", f.problem.space)};
  fam.u_maps = {parse("u", f.problem.space)};
  CHECK_THROWS_AS(synthesize_gauge(f.problem, fam), SolverError);
}

TEST_CASE("ansatz search finds the known families") {
  auto simple = load("simple.ocp");
  auto fams = find_symmetry_ansatz(simple.problem, 1, 1);
  REQUIRE(fams.size() == 1);
  CHECK(equal(fams[0].x_maps[0], simple.symmetry->x_maps[0]));
  CHECK(equal(fams[0].u_maps[0], simple.symmetry->u_maps[0]));
  CHECK(equal(*fams[0].gauge, *simple.symmetry->gauge));

  auto rocket = load("rocket.ocp");
  auto rf = find_symmetry_ansatz(rocket.problem, 2, 2);
  bool found = false;
  for (const auto& fam : rf) {
    CHECK(check_invariance(rocket.problem, fam).invariant());
    CHECK(identity_at_zero(fam, rocket.problem.space));
    bool same = equal(fam.u_maps[0], rocket.symmetry->u_maps[0]);
    for (std::size_t i = 0; i < 2; ++i) same = same && equal(fam.x_maps[i], rocket.symmetry->x_maps[i]);
    found = found || same;
  }
  CHECK(found);
}

TEST_CASE("ansatz search can come back empty") {
  auto f = load("simple.ocp");
  f.problem.lagrangian = parse("t*u^2", f.problem.space);
  CHECK(find_symmetry_ansatz(f.problem, 0, 1).empty());
}
