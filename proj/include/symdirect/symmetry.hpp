#ifndef SYMDIRECT_SYMMETRY_HPP
#define SYMDIRECT_SYMMETRY_HPP

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "compiled.hpp"
#include "linear.hpp"
#include "problem.hpp"
#include "transform.hpp"

namespace symdirect {

enum class CheckMode { SymbolicExact, NumericSampled };

inline const char* check_mode_name(CheckMode m) {
  return m == CheckMode::SymbolicExact ? "symbolic-exact" : "numeric-sampled";
}

/// Box, sample count and tolerance for numeric invariance checks. The time
/// range defaults to the problem horizon when it is numeric, else [0, 1].
struct SamplingOptions {
  std::optional<std::pair<double, double>> t_range;
  std::pair<double, double> x_range{-10.0, 10.0};
  std::pair<double, double> u_range{-10.0, 10.0};
  std::pair<double, double> s_range{-2.0, 2.0};
  std::pair<double, double> coefficient_range{0.5, 2.0};
  int points = 500;
  double tolerance = 1e-9;
  unsigned seed = 42;
  bool force_numeric = false;
};

struct InvarianceReport {
  bool lagrangian_ok = false;
  Expr lagrangian_residual;
  std::vector<bool> dynamics_ok;
  std::vector<Expr> dynamics_residuals;
  CheckMode mode = CheckMode::SymbolicExact;
  double max_sampled_residual = 0.0;

  bool invariant() const {
    if (!lagrangian_ok) return false;
    for (bool ok : dynamics_ok)
      if (!ok) return false;
    return true;
  }
};

namespace detail {

inline bool mentions_control(const Expr& e, const VarSpace& space) {
  for (const auto& u : space.controls)
    if (depends_on(e, u)) return true;
  return false;
}

inline std::vector<std::string> check_slots(const VarSpace& space) {
  std::vector<std::string> slots{space.time};
  slots.insert(slots.end(), space.states.begin(), space.states.end());
  slots.insert(slots.end(), space.controls.begin(), space.controls.end());
  slots.push_back(space.parameter);
  slots.insert(slots.end(), space.coefficients.begin(), space.coefficients.end());
  return slots;
}

}  // namespace detail

/// Invariance of the problem under `f` up to its gauge:
///   L(h^s) d(t^s)/dt - L - dPhi/dt == 0
///   d(x_i^s)/dt - f_i(h^s) d(t^s)/dt == 0
/// with total derivatives taken along x' = f. Exact when t^s = t and the
/// family is a shift; otherwise residuals are sampled.
inline InvarianceReport check_invariance(const ProblemSpec& p, const TransformFamily& f,
                                         const SamplingOptions& opt = {}) {
  const VarSpace& space = p.space;
  validate_family(f, space);
  if (!identity_at_zero(f, space)) throw ValidationError("transformation is not the identity at s = 0");
  if (!f.gauge) throw ValidationError("no gauge term given; use synthesize_gauge to construct one");
  if (detail::mentions_control(*f.gauge, space))
    throw Unsupported("gauge terms depending on the control are not supported");
  if (detail::mentions_control(f.t_map, space)) throw Unsupported("t^s depending on the control is not supported");
  for (const auto& x : f.x_maps)
    if (detail::mentions_control(x, space)) throw Unsupported("x^s depending on the control is not supported");

  const auto h = f.bindings(space);
  const Expr dts = total_derivative(f.t_map, p.dynamics, space);
  InvarianceReport report;
  report.lagrangian_residual =
      canonical(substitute(p.lagrangian, h) * dts - p.lagrangian - total_derivative(*f.gauge, p.dynamics, space));
  for (std::size_t i = 0; i < space.n(); ++i)
    report.dynamics_residuals.push_back(
        canonical(total_derivative(f.x_maps[i], p.dynamics, space) - substitute(p.dynamics[i], h) * dts));

  if (!opt.force_numeric && shift_form(f, space)) {
    report.mode = CheckMode::SymbolicExact;
    report.lagrangian_ok = is_zero(report.lagrangian_residual);
    for (const auto& r : report.dynamics_residuals) report.dynamics_ok.push_back(is_zero(r));
    return report;
  }

  report.mode = CheckMode::NumericSampled;
  const auto slots = detail::check_slots(space);
  std::pair<double, double> t_range{0.0, 1.0};
  if (opt.t_range) t_range = *opt.t_range;
  else if (is_constant(p.t0) && is_constant(p.t1)) t_range = {p.t0_value(), p.t1_value()};

  std::mt19937_64 rng(opt.seed);
  auto draw = [&](std::pair<double, double> r) { return std::uniform_real_distribution<double>(r.first, r.second)(rng); };
  std::vector<std::vector<double>> points(opt.points, std::vector<double>(slots.size()));
  for (auto& pt : points) {
    std::size_t k = 0;
    pt[k++] = draw(t_range);
    for (std::size_t i = 0; i < space.n(); ++i) pt[k++] = draw(opt.x_range);
    for (std::size_t j = 0; j < space.m(); ++j) pt[k++] = draw(opt.u_range);
    pt[k++] = draw(opt.s_range);
    while (k < slots.size()) pt[k++] = draw(opt.coefficient_range);
  }
  auto max_abs = [&](const Expr& r) {
    CompiledExpr c(r, slots);
    double worst = 0.0;
    for (const auto& pt : points) worst = std::max(worst, std::abs(c(pt)));
    return worst;
  };
  const double rl = max_abs(report.lagrangian_residual);
  report.lagrangian_ok = rl <= opt.tolerance;
  report.max_sampled_residual = rl;
  for (const auto& r : report.dynamics_residuals) {
    const double ri = max_abs(r);
    report.dynamics_ok.push_back(ri <= opt.tolerance);
    report.max_sampled_residual = std::max(report.max_sampled_residual, ri);
  }
  return report;
}

namespace detail {

/// Monomials in `vars` of total degree 1..max_degree, in graded-lex order
/// (largest first).
inline std::vector<Monomial> monomials_up_to(const std::vector<std::string>& vars, int max_degree) {
  std::vector<Monomial> out{Monomial{}};
  for (const auto& v : vars) {
    std::vector<Monomial> next;
    for (const auto& m : out)
      for (int e = 0; m.total_degree() + e <= max_degree; ++e) next.push_back(m * Monomial::variable(v, e));
    out = std::move(next);
  }
  std::erase_if(out, [](const Monomial& m) { return m.is_one(); });
  std::sort(out.begin(), out.end(), MonomialGreater{});
  return out;
}

inline std::vector<std::string> time_and_states(const VarSpace& space) {
  std::vector<std::string> v{space.time};
  v.insert(v.end(), space.states.begin(), space.states.end());
  return v;
}

inline std::set<std::string> time_states_controls(const VarSpace& space) {
  std::set<std::string> v{space.time};
  v.insert(space.states.begin(), space.states.end());
  v.insert(space.controls.begin(), space.controls.end());
  return v;
}

/// Polynomial ansatz sum_k name_k * monomial_k with fresh unknown names.
struct GaugeAnsatz {
  std::vector<std::string> unknowns;
  RatFunc phi;
};

inline GaugeAnsatz gauge_ansatz(const VarSpace& space, int degree, const std::string& stem,
                                std::set<std::string>& taken) {
  GaugeAnsatz a;
  for (const auto& mono : monomials_up_to(time_and_states(space), degree)) {
    const std::string name = space.fresh_name(stem + std::to_string(a.unknowns.size()), taken);
    taken.insert(name);
    a.unknowns.push_back(name);
    a.phi += RatFunc(Poly::term(mono * Monomial::variable(name), Rational(1)));
  }
  return a;
}

/// Equations (one per monomial in t, x, u) stating dPhi/dt == target.
inline std::vector<Expr> gauge_equations(const ProblemSpec& p, const RatFunc& phi, const RatFunc& target) {
  const VarSpace& space = p.space;
  RatFunc dphi = phi.partial(space.time);
  for (std::size_t i = 0; i < space.n(); ++i) dphi += phi.partial(space.states[i]) * p.dynamics[i].rational();
  std::vector<Expr> eqs;
  for (const auto& [mono, coeff] : coefficients_in(dphi - target, time_states_controls(space)))
    eqs.push_back(Expr::from_rational(coeff));
  return eqs;
}

inline int degree_in_txu(const RatFunc& r, const VarSpace& space) {
  const auto vars = time_states_controls(space);
  for (const auto& v : vars)
    if (r.den().depends_on(v)) throw NotPolynomial(v);
  return std::max(0, r.num().degree_in(vars));
}

}  // namespace detail

/// Gauge Phi^s(t, x) whose total derivative equals the Lagrangian excess
/// L(h^s) - L. Solved from a polynomial ansatz; terms in s alone are
/// dropped, and undetermined ansatz directions are set to zero.
inline Expr synthesize_gauge(const ProblemSpec& p, const TransformFamily& f) {
  const VarSpace& space = p.space;
  validate_family(f, space);
  if (!equal(f.t_map, Expr::symbol(space.time))) throw Unsupported("gauge synthesis requires t^s = t");
  for (const auto& x : f.x_maps)
    if (detail::mentions_control(x, space)) throw Unsupported("x^s depending on the control is not supported");
  const RatFunc excess = (substitute(p.lagrangian, f.bindings(space)) - p.lagrangian).rational();
  if (excess.is_zero()) return Expr(0);

  int degree = 0;
  try {
    degree = detail::degree_in_txu(excess, space);
  } catch (const NotPolynomial&) {
    throw Unsupported("Lagrangian excess is not polynomial in (t, x, u)");
  }
  for (const auto& d : p.dynamics) degree = std::max(degree, detail::degree_in_txu(d.rational(), space));
  degree += static_cast<int>(space.n()) + 1;

  std::set<std::string> taken;
  for (const auto& n : excess.variables()) taken.insert(n);
  auto ansatz = detail::gauge_ansatz(space, degree, "phi", taken);
  auto sol = solve_linear(detail::gauge_equations(p, ansatz.phi, excess), ansatz.unknowns);
  if (!sol.consistent())
    throw SolverError("the Lagrangian excess is not a total derivative of a polynomial gauge of degree <= " +
                      std::to_string(degree));
  std::map<std::string, Expr> values;
  for (const auto& [name, v] : sol.values) values.emplace(name, v);
  for (const auto& name : sol.free) values[name] = Expr(0);
  Expr phi = substitute(Expr::from_rational(ansatz.phi), values);
  if (!equal(total_derivative(phi, p.dynamics, space), Expr::from_rational(excess)))
    throw SolverError("synthesized gauge failed verification");
  return phi;
}

/// Shift-form symmetries x_i^s = x_i + s^k g_i(t), u_j^s = u_j + s^k d_j(t)
/// with deg g, d <= max_deg_t and k = 1..max_deg_s. Each power of s is
/// solved separately; families that leave every control unchanged are not
/// returned because they cannot change which control is trivial.
inline std::vector<TransformFamily> find_symmetry_ansatz(const ProblemSpec& p, int max_deg_t, int max_deg_s) {
  const VarSpace& space = p.space;
  if (max_deg_t < 0 || max_deg_s < 1) throw ValidationError("ansatz degrees must satisfy deg_t >= 0, deg_s >= 1");
  const Expr s = Expr::symbol(space.parameter);
  std::vector<TransformFamily> found;

  for (int k = 1; k <= max_deg_s; ++k) {
    std::set<std::string> taken;
    std::vector<std::string> shift_unknowns;
    std::vector<RatFunc> g(space.n()), d(space.m());
    auto add_unknown = [&](const std::string& stem, RatFunc& target, int power) {
      const std::string name = space.fresh_name(stem, taken);
      taken.insert(name);
      shift_unknowns.push_back(name);
      target += RatFunc(Poly::term(Monomial::variable(space.time, power) * Monomial::variable(name), Rational(1)));
    };
    for (std::size_t i = 0; i < space.n(); ++i)
      for (int j = 0; j <= max_deg_t; ++j)
        add_unknown("c" + std::to_string(i + 1) + "_" + std::to_string(j), g[i], j);
    for (std::size_t l = 0; l < space.m(); ++l)
      for (int j = 0; j <= max_deg_t; ++j)
        add_unknown("d" + std::to_string(l + 1) + "_" + std::to_string(j), d[l], j);

    const RatFunc sk = s.rational().pow(k);
    std::map<std::string, RatFunc> h;
    for (std::size_t i = 0; i < space.n(); ++i)
      h.emplace(space.states[i], RatFunc::variable(space.states[i]) + sk * g[i]);
    for (std::size_t l = 0; l < space.m(); ++l)
      h.emplace(space.controls[l], RatFunc::variable(space.controls[l]) + sk * d[l]);

    std::vector<Expr> equations;
    const auto txu = detail::time_states_controls(space);
    auto order_k = [&](const RatFunc& r) { return r.coeff_in(space.parameter, k); };
    for (std::size_t i = 0; i < space.n(); ++i) {
      // d/dt (s^k g_i) - (f_i(h^s) - f_i), order s^k
      RatFunc r = sk * g[i].partial(space.time) - (p.dynamics[i].rational().substitute(h) - p.dynamics[i].rational());
      for (const auto& [mono, c] : coefficients_in(order_k(r), txu)) equations.push_back(Expr::from_rational(c));
    }
    const RatFunc excess = p.lagrangian.rational().substitute(h) - p.lagrangian.rational();
    const RatFunc excess_k = order_k(excess);
    int degree = detail::degree_in_txu(excess_k, space) + static_cast<int>(space.n()) + max_deg_t + 1;
    for (const auto& dyn : p.dynamics) degree = std::max(degree, detail::degree_in_txu(dyn.rational(), space));
    auto ansatz = detail::gauge_ansatz(space, degree, "e", taken);
    for (auto& eq : detail::gauge_equations(p, ansatz.phi, excess_k)) equations.push_back(eq);

    // Gauge unknowns first so that they take the pivots; control shifts last
    // so that they are the preferred free directions.
    std::vector<std::string> unknowns = ansatz.unknowns;
    unknowns.insert(unknowns.end(), shift_unknowns.begin(), shift_unknowns.end());
    const auto sol = solve_linear(equations, unknowns);
    if (!sol.consistent()) continue;

    const std::set<std::string> shift_set(shift_unknowns.begin(), shift_unknowns.end());
    for (const auto& free_name : sol.free) {
      if (!shift_set.count(free_name)) continue;
      std::map<std::string, Expr> pick;
      for (const auto& name : sol.free) pick.emplace(name, Expr(name == free_name ? 1 : 0));
      std::map<std::string, Expr> shifts;
      for (const auto& name : shift_unknowns) shifts.emplace(name, substitute(sol.values.at(name), pick));

      TransformFamily fam;
      fam.t_map = Expr::symbol(space.time);
      bool moves_control = false;
      for (std::size_t i = 0; i < space.n(); ++i)
        fam.x_maps.push_back(canonical(Expr::symbol(space.states[i]) +
                                       pow(s, k) * substitute(Expr::from_rational(g[i]), shifts)));
      for (std::size_t l = 0; l < space.m(); ++l) {
        Expr dl = substitute(Expr::from_rational(d[l]), shifts);
        moves_control = moves_control || !is_zero(dl);
        fam.u_maps.push_back(canonical(Expr::symbol(space.controls[l]) + pow(s, k) * dl));
      }
      if (!moves_control) continue;
      try {
        fam.gauge = synthesize_gauge(p, fam);
      } catch (const SolverError&) {
        continue;
      }
      if (check_invariance(p, fam).invariant()) found.push_back(std::move(fam));
    }
  }
  return found;
}

}  // namespace symdirect

#endif
