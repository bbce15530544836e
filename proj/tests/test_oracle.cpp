#include <catch_amalgamated.hpp>

#include <random>

#include "symdirect/noether.hpp"
#include "symdirect/oracle.hpp"
#include "symdirect/problem_io.hpp"

using namespace symdirect;

namespace {

ProblemFile load(const std::string& name) { return load_problem_file(std::string(SYMDIRECT_FIXTURES) + "/" + name); }

double max_rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(1.0, std::abs(b(i, j))));
  return worst;
}

}  // namespace

TEST_CASE("oracle on the integrator") {
  auto f = load("simple.ocp");
  auto res = transcribe_and_solve(f.problem, 100);
  CHECK(res.converged);
  CHECK_FALSE(res.local);
  CHECK(res.iterations == 1);
  CHECK(res.kkt_residual <= 1e-9);
  CHECK(std::abs(res.cost - 1.0) <= 1e-6);
  for (const auto& u : res.controls) CHECK(u[0] == Catch::Approx(1.0).epsilon(1e-10));

  auto flat = f.problem;
  flat.boundary[1].value = Expr(0);
  auto zero = transcribe_and_solve(flat, 17);
  CHECK(std::abs(zero.cost) <= 1e-14);
  for (const auto& u : zero.controls) CHECK(std::abs(u[0]) <= 1e-12);
}

// With x2(t0) free the optimum is u = -3t, cost 3.
Solution rocket_optimum(const ProblemSpec& p) {
  Solution s;
  s.states = {parse("-1 + 3*t/2 - t^3/2", p.space), parse("3/2 - 3*t^2/2", p.space)};
  s.controls = {parse("-3*t", p.space)};
  s.exact_cost = exact_cost(p, s.states, s.controls);
  return s;
}

TEST_CASE("oracle on the rocket") {
  auto f = load("rocket.ocp");
  auto res = transcribe_and_solve(f.problem, 200);
  CHECK(std::abs(res.cost - 3.0) <= 1e-4);
  for (int k = 0; k < 200; ++k) CHECK(std::abs(res.controls[k][0] + 3.0 * (k + 0.5) / 200) <= 1e-3);
  auto coarse = transcribe_and_solve(f.problem, 2);
  CHECK(coarse.converged);
  CHECK(coarse.cost >= 3.0 - 0.5);

  auto pinned = load("rocket_pinned.ocp");
  auto rp = transcribe_and_solve(pinned.problem, 200);
  CHECK(std::abs(rp.cost - 4.0) <= 1e-10);
  for (const auto& u : rp.controls) CHECK(u[0] == Catch::Approx(-2.0).epsilon(1e-9));
  Transcription tr(f.problem, 2);
  CHECK(tr.constraints() == 2 * 2 + 3);
}

TEST_CASE("oracle is no worse than the sampled closed form") {
  auto f = load("rocket.ocp");
  const int N = 50;
  Transcription tr(f.problem, N);
  auto res = transcribe_and_solve(f.problem, N);
  Eigen::VectorXd z(tr.variables());
  for (int k = 0; k <= N; ++k) {
    const double t = tr.time(k);
    z[tr.x_index(k, 0)] = -t * t + 2 * t - 1;
    z[tr.x_index(k, 1)] = -2 * t + 2;
  }
  for (int k = 0; k < N; ++k) z[tr.u_index(k, 0)] = -2.0;
  CHECK(tr.constraint_values(z).lpNorm<Eigen::Infinity>() <= 1e-3);
  CHECK(tr.objective(z) >= res.cost - 1e-6);
  Eigen::VectorXd zo(tr.variables());
  for (int k = 0; k <= N; ++k)
    for (std::size_t i = 0; i < 2; ++i) zo[tr.x_index(k, i)] = res.states[k][i];
  for (int k = 0; k < N; ++k) zo[tr.u_index(k, 0)] = res.controls[k][0];
  CHECK(tr.constraint_values(zo).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("derivatives agree with central differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (const char* name : {"simple.ocp", "rocket.ocp"}) {
    auto f = load(name);
    auto p = f.problem;
    if (std::string(name) == "simple.ocp") p.lagrangian = parse("u^2 + t*x^3*u + x^4", p.space);
    Transcription tr(p, 8);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd z(tr.variables());
      for (auto& v : z) v = d(rng);
      const double step = 1e-6;
      Eigen::VectorXd g_fd(z.size());
      Eigen::MatrixXd J_fd(tr.constraints(), z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        Eigen::VectorXd zp = z, zm = z;
        zp[i] += step;
        zm[i] -= step;
        g_fd[i] = (tr.objective(zp) - tr.objective(zm)) / (2 * step);
        J_fd.col(i) = (tr.constraint_values(zp) - tr.constraint_values(zm)) / (2 * step);
      }
      CHECK(max_rel(tr.gradient(z), g_fd) <= 1e-6);
      CHECK(max_rel(Eigen::MatrixXd(tr.jacobian(z)), J_fd) <= 1e-6);
    }
  }
}

TEST_CASE("nonconvex transcription converges by damped Newton") {
  auto f = load("simple.ocp");
  auto p = f.problem;
  p.lagrangian = parse("u^2 + x^4", p.space);
  auto res = transcribe_and_solve(p, 40);
  CHECK(res.local);
  CHECK(res.converged);
  CHECK(res.kkt_residual <= 1e-9);
  CHECK(res.iterations > 1);
  CHECK(res.cost > 0.0);
  CHECK(res.cost < 1.2);  // x = t is feasible with cost 6/5
}

TEST_CASE("contradictory pins give a rank defect") {
  auto f = load("infeasible.ocp");
  CHECK_THROWS_WITH(transcribe_and_solve(f.problem, 20), Catch::Matchers::ContainsSubstring("rank defect"));
}

TEST_CASE("convergence study") {
  auto rocket = load("rocket.ocp");
  auto ref = rocket_optimum(rocket.problem);
  CHECK(residuals(rocket.problem, ref, 10).boundary == 0.0);
  auto rows = convergence_study(rocket.problem, {25, 50, 100, 200}, ref);
  REQUIRE(rows.size() == 4);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].state_error < rows[k - 1].state_error);
  CHECK(error_decays(rows));
  for (const auto& r : rows) CHECK(r.cost_gap <= 3.0 / r.N);

  auto simple = load("simple.ocp");
  auto sref = noether_solve(simple.problem, *simple.symmetry).at(0);
  for (const auto& r : convergence_study(simple.problem, {25, 50, 100, 200}, sref)) CHECK(r.cost_gap <= 1e-10);
}
