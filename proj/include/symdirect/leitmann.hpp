#ifndef SYMDIRECT_LEITMANN_HPP
#define SYMDIRECT_LEITMANN_HPP

#include <string>
#include <vector>

#include "linear.hpp"
#include "noether.hpp"
#include "problem.hpp"

namespace symdirect {

/// x = sign * x~ + f(t), with G(t, x~) the potential of the functional
/// identity. x~ and its velocity reuse the problem's state and control
/// names.
struct LeitmannTransform {
  int sign = 1;
  Expr f;
  Expr G;
};

struct LeitmannTrace {
  Expr excess;
  Expr A;
  Expr B;
  std::vector<Expr> exactness;
  std::vector<std::string> unknowns;
  int degree = 1;
};

struct LeitmannResult {
  Solution solution;
  LeitmannTransform transform;
  LeitmannTrace trace;
};

struct IdentityCheck {
  bool ok = false;
  Expr residual;
};

/// L(t, sign x + f, sign u + f') - L(t, x, u) - (dG/dt + dG/dx u).
inline IdentityCheck check_functional_identity(const ProblemSpec& p, const LeitmannTransform& tr) {
  const VarSpace& space = p.space;
  if (space.n() != 1 || space.m() != 1) throw Unsupported("the functional identity is checked for scalar problems");
  const std::string &t = space.time, &x = space.states[0], &u = space.controls[0];
  const Expr sign(tr.sign);
  const Expr moved = substitute(p.lagrangian, {{x, sign * Expr::symbol(x) + tr.f},
                                               {u, sign * Expr::symbol(u) + partial(tr.f, t)}});
  IdentityCheck out;
  out.residual = canonical(moved - p.lagrangian - partial(tr.G, t) - partial(tr.G, x) * Expr::symbol(u));
  out.ok = is_zero(out.residual);
  return out;
}

namespace detail {

struct LeitmannAttempt {
  std::optional<LeitmannResult> result;
  std::string failure;
};

inline LeitmannAttempt leitmann_attempt(const ProblemSpec& p, int degree, int sign, const Expr& alpha,
                                        const Expr& beta) {
  const VarSpace& space = p.space;
  const std::string &t = space.time, &x = space.states[0], &u = space.controls[0];
  LeitmannAttempt at;
  LeitmannTrace tr;
  tr.degree = degree;

  std::set<std::string> taken = free_names(p.lagrangian);
  RatFunc f;
  for (int j = 0; j <= degree; ++j) {
    tr.unknowns.push_back(space.fresh_name("c" + std::to_string(j + 1), taken));
    taken.insert(tr.unknowns.back());
    f += RatFunc(Poly::term(Monomial::variable(t, j) * Monomial::variable(tr.unknowns.back()), Rational(1)));
  }
  const Expr fe = Expr::from_rational(f);
  const Expr sg(sign);
  const Expr excess = canonical(
      substitute(p.lagrangian, {{x, sg * Expr::symbol(x) + fe}, {u, sg * Expr::symbol(u) + partial(fe, t)}}) -
      p.lagrangian);
  tr.excess = excess;
  if (degree_in(excess, u) > 1) {
    at.failure = "the Lagrangian excess is superlinear in the velocity";
    return at;
  }
  tr.B = coeff_in(excess, u, 1);
  tr.A = coeff_in(excess, u, 0);
  const RatFunc exact = (partial(tr.B, t) - partial(tr.A, x)).rational();
  for (const auto& [mono, c] : coefficients_in(exact, {t, x})) tr.exactness.push_back(Expr::from_rational(c));

  LinearSolution sol;
  try {
    sol = solve_linear(tr.exactness, tr.unknowns);
  } catch (const Unsupported&) {
    at.failure = "the exactness condition is not linear in the coefficients of f";
    return at;
  }
  if (!sol.consistent()) {
    at.failure = "the exactness condition has no polynomial solution of degree " + std::to_string(degree) +
                 "; raise --f-degree";
    return at;
  }
  const Expr f1 = substitute(fe, sol.values);
  const std::vector<Expr> bc{substitute(f1, {{t, p.t0}}) - alpha, substitute(f1, {{t, p.t1}}) - beta};
  const auto bsol = solve_linear(bc, sol.free);
  if (!bsol.consistent()) {
    at.failure = "the boundary conditions on f are inconsistent";
    return at;
  }
  if (!bsol.free.empty()) {
    at.failure = "the boundary system for f is singular";
    return at;
  }
  const Expr f_final = canonical(substitute(f1, bsol.values));
  std::map<std::string, Expr> coeffs;
  for (const auto& c : tr.unknowns) coeffs.emplace(c, substitute(sol.values.at(c), bsol.values));

  LeitmannResult res;
  res.transform.sign = sign;
  res.transform.f = f_final;
  const Expr A = substitute(tr.A, coeffs), B = substitute(tr.B, coeffs);
  const Expr IB = integrate(B, x);
  res.transform.G = canonical(IB + integrate(canonical(A - partial(IB, t)), t));
  res.trace = std::move(tr);

  Solution& s = res.solution;
  s.method = Method::Leitmann;
  s.status = certify_trivial(p, {Expr(0)});
  s.states = {f_final};
  s.controls = {canonical(partial(f_final, t))};
  s.exact_cost = exact_cost(p, s.states, s.controls);
  if (p.is_numeric()) {
    s.cost = s.exact_cost && is_constant(*s.exact_cost) ? s.exact_cost->rational().constant_value().get_d()
                                                         : cost_of(p, s, 200);
    const auto r = residuals(p, s, 200);
    s.diagnostics.dyn_residual = r.dynamics;
    s.diagnostics.bc_residual = r.boundary;
  }
  s.diagnostics.notes.push_back("f(t) = " + to_string(f_final));
  s.diagnostics.notes.push_back("G(t, x~) = " + to_string(res.transform.G));
  at.result = std::move(res);
  return at;
}

}  // namespace detail

/// Leitmann's direct method for scalar problems x' = u with L quadratic in
/// u. Searches f of degree f_degree (escalating to 3), sign +1 first.
inline LeitmannResult leitmann_solve(const ProblemSpec& p, int f_degree = 1) {
  const VarSpace& space = p.space;
  if (space.n() != 1 || space.m() != 1) throw Unsupported("Leitmann's method needs one state and one control (n = m = 1)");
  const std::string &t = space.time, &x = space.states[0], &u = space.controls[0];
  if (!equal(p.dynamics[0], Expr::symbol(u))) throw Unsupported("Leitmann's method needs dynamics x' = u");
  if (f_degree < 0) throw ValidationError("f degree must be nonnegative");
  const RatFunc& L = p.lagrangian.rational();
  for (const auto& v : {t, x, u})
    if (L.den().depends_on(v)) throw Unsupported("Leitmann's method needs a polynomial Lagrangian");
  if (L.degree_in(u) != 2) throw Unsupported("Leitmann's method needs a Lagrangian quadratic in the velocity");
  const Expr a = coeff_in(p.lagrangian, u, 2);
  if (depends_on(a, x)) throw Unsupported("the coefficient of the squared velocity must not depend on the state");
  if (p.is_numeric()) {
    const CompiledExpr ca(a, {t});
    const double t0 = p.t0_value(), t1 = p.t1_value();
    for (int k = 0; k <= 100; ++k) {
      const double tv[1] = {t0 + (t1 - t0) * k / 100};
      if (ca(tv) == 0.0) throw ValidationError("the coefficient of the squared velocity vanishes on the horizon");
    }
  }

  std::optional<Expr> alpha, beta;
  for (const auto& pin : p.boundary) (pin.end == Endpoint::Initial ? alpha : beta) = pin.value;
  if (!alpha || !beta) throw Unsupported("Leitmann's method needs the state pinned at both ends");

  std::string failure;
  for (int degree = f_degree; degree <= std::max(f_degree, 3); ++degree)
    for (int sign : {1, -1}) {
      auto at = detail::leitmann_attempt(p, degree, sign, *alpha, *beta);
      if (at.result) return std::move(*at.result);
      if (failure.empty()) failure = at.failure;
    }
  throw SolverError("no admissible polynomial f up to degree " + std::to_string(std::max(f_degree, 3)) +
                    " (first failure: " + failure + ")");
}

}  // namespace symdirect

#endif
