#ifndef SYMDIRECT_NOETHER_HPP
#define SYMDIRECT_NOETHER_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "linear.hpp"
#include "problem.hpp"
#include "symmetry.hpp"
#include "transform.hpp"

namespace symdirect {

struct GeneralizedPin {
  Endpoint end = Endpoint::Initial;
  std::size_t state = 0;
  Expr value;
};

/// The base problem pushed through a shift-form symmetry: every pin
/// x_i(tau) = v becomes x_i^s(tau) = v + g_i(tau, s).
struct GeneralizedProblem {
  ProblemSpec base;
  TransformFamily family;
  ShiftForm shifts;
  std::vector<GeneralizedPin> pins;
};

inline GeneralizedProblem generalize(const ProblemSpec& p, const TransformFamily& f) {
  auto shifts = shift_form(f, p.space);
  if (!shifts) throw Unsupported("generalization requires a shift-form family with t^s = t");
  TransformFamily fam = f;
  if (!fam.gauge) fam.gauge = synthesize_gauge(p, f);
  if (!check_invariance(p, fam).invariant()) throw ValidationError("transformation is not a symmetry of the problem");
  GeneralizedProblem g{p, fam, *shifts, {}};
  for (const auto& pin : p.boundary) {
    const Expr at = substitute(shifts->state_shifts[pin.state], {{p.space.time, p.time_of(pin.end)}});
    g.pins.push_back({pin.end, pin.state, canonical(pin.value + at)});
  }
  return g;
}

struct FitOptions {
  double scan_min = -100.0;
  double scan_max = 100.0;
  int scan_points = 10000;
  bool force_numeric = false;
};

/// One trivializing parameter value. `power_value` is the exact value of
/// s^k (k = ParameterFit::power) on the closed-form path; `value` is the
/// root itself and is NaN when the problem is symbolic.
struct FitRoot {
  double value = std::numeric_limits<double>::quiet_NaN();
  std::optional<Expr> power_value;
  std::vector<double> initial_state;
};

struct ParameterFit {
  std::vector<Expr> u_triv;
  /// Everything depends on s only through s^power.
  int power = 1;
  /// Trivial trajectory in t and s with the integration constants
  /// eliminated (closed-form path).
  std::vector<Expr> trivial_states;
  /// Conditions on s left after eliminating the constants.
  std::vector<Expr> mismatch;
  std::vector<FitRoot> roots;
  bool numeric = false;
  std::vector<std::string> notes;
};

namespace detail {

/// Rewrites a rational function whose s-exponents are all multiples of k in
/// terms of w = s^k.
inline Poly reduce_power(const Poly& p, const std::string& s, int k, const std::string& w) {
  Poly out;
  for (const auto& [m, c] : p.terms()) {
    const int e = m.degree_in(s);
    if (e % k) throw SolverError("internal: exponent not a multiple of the parameter power");
    out.add_term(m.with_exponent(s, 0).with_exponent(w, e / k), c);
  }
  return out;
}

inline RatFunc reduce_power(const RatFunc& r, const std::string& s, int k, const std::string& w) {
  return RatFunc(reduce_power(r.num(), s, k, w), reduce_power(r.den(), s, k, w));
}

inline int exponent_gcd(const RatFunc& r, const std::string& s, int g) {
  for (const Poly* p : {&r.num(), &r.den()})
    for (const auto& [m, c] : p->terms()) g = std::gcd(g, m.degree_in(s));
  return g;
}

/// Closed-form integration of x' = f(t, x, u_triv) from t = 0 with x(0) = c
/// by Picard iteration; nullopt unless it reaches a polynomial fixed point.
inline std::optional<std::vector<RatFunc>> picard(const ProblemSpec& p, const std::vector<Expr>& u_triv,
                                                  const std::vector<std::string>& constants) {
  const VarSpace& space = p.space;
  std::map<std::string, RatFunc> controls;
  for (std::size_t j = 0; j < space.m(); ++j) controls.emplace(space.controls[j], u_triv[j].rational());
  std::vector<RatFunc> rhs;
  for (const auto& f : p.dynamics) rhs.push_back(f.rational().substitute(controls));

  std::vector<RatFunc> x;
  for (const auto& c : constants) x.push_back(RatFunc::variable(c));
  const int cap = 4 * static_cast<int>(space.n()) + 8;
  for (int it = 0; it < cap; ++it) {
    std::map<std::string, RatFunc> along;
    for (std::size_t i = 0; i < space.n(); ++i) along.emplace(space.states[i], x[i]);
    std::vector<RatFunc> next;
    for (std::size_t i = 0; i < space.n(); ++i) {
      RatFunc integrand = rhs[i].substitute(along);
      if (integrand.den().depends_on(space.time)) return std::nullopt;
      next.push_back(RatFunc::variable(constants[i]) + integrand.integrate(space.time));
    }
    if (next == x) return x;
    x = std::move(next);
  }
  return std::nullopt;
}

/// Real roots of a univariate polynomial on [lo, hi]: the square-free part
/// is scanned for sign changes, then bisected and polished by Newton.
inline std::vector<double> real_roots(const Poly& p, const std::string& var, double lo, double hi, int points) {
  std::vector<double> roots;
  if (p.is_zero() || p.is_constant()) return roots;
  Poly sf = p;
  const Poly d = gcd(p, p.partial(var));
  if (!d.is_constant()) sf = *exact_divide(p, d);
  const Poly dsf = sf.partial(var);
  auto f = [&](double x) { return sf.eval([&](const std::string&) { return x; }); };
  auto df = [&](double x) { return dsf.eval([&](const std::string&) { return x; }); };

  double prev_x = lo, prev_f = f(lo);
  if (prev_f == 0.0) roots.push_back(lo);
  for (int i = 1; i <= points; ++i) {
    const double x = lo + (hi - lo) * i / points;
    const double fx = f(x);
    if (fx == 0.0) {
      roots.push_back(x);
    } else if (prev_f != 0.0 && (prev_f < 0) != (fx < 0)) {
      double a = prev_x, b = x, fa = prev_f;
      while (b - a > 1e-13 * std::max(1.0, std::abs(a))) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if (fm == 0.0) {
          a = b = mid;
          break;
        }
        if ((fm < 0) == (fa < 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      double r = 0.5 * (a + b);
      for (int k = 0; k < 3; ++k) {
        const double dr = df(r);
        if (dr == 0.0) break;
        const double step = f(r) / dr;
        if (!std::isfinite(step) || std::abs(step) > (x - prev_x)) break;
        r -= step;
      }
      roots.push_back(r);
    }
    prev_x = x;
    prev_f = fx;
  }
  return roots;
}

inline void rk4(const std::vector<CompiledExpr>& f, double t0, double t1, int steps, std::vector<double> x,
                std::vector<std::vector<double>>* path, std::vector<double>& out) {
  const std::size_t n = x.size();
  const double h = (t1 - t0) / steps;
  std::vector<double> arg(n + 1), k1(n), k2(n), k3(n), k4(n);
  auto rhs = [&](double t, const std::vector<double>& y, std::vector<double>& k) {
    arg[0] = t;
    std::copy(y.begin(), y.end(), arg.begin() + 1);
    for (std::size_t i = 0; i < n; ++i) k[i] = f[i](arg);
  };
  std::vector<double> y(n);
  if (path) path->push_back(x);
  for (int s = 0; s < steps; ++s) {
    const double t = t0 + s * h;
    rhs(t, x, k1);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, y, k2);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, y, k3);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * k3[i];
    rhs(t + h, y, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    if (path) path->push_back(x);
  }
  out = std::move(x);
}

struct Shooting {
  std::vector<CompiledExpr> rhs;
  std::vector<CompiledExpr> pin_values;
  std::vector<GeneralizedPin> pins;
  double t0 = 0, t1 = 1;
  int steps = 2000;

  Shooting(const GeneralizedProblem& g, const std::vector<Expr>& u_triv) {
    const VarSpace& space = g.base.space;
    std::map<std::string, Expr> controls;
    for (std::size_t j = 0; j < space.m(); ++j) controls.emplace(space.controls[j], u_triv[j]);
    std::vector<std::string> slots{space.time};
    slots.insert(slots.end(), space.states.begin(), space.states.end());
    for (const auto& f : g.base.dynamics) rhs.emplace_back(substitute(f, controls), slots);
    for (const auto& pin : g.pins) pin_values.emplace_back(pin.value, std::vector<std::string>{space.parameter});
    pins = g.pins;
    t0 = g.base.t0_value();
    t1 = g.base.t1_value();
  }

  Eigen::VectorXd mismatch(const Eigen::VectorXd& z) const {
    const std::size_t n = rhs.size();
    std::vector<double> x0(z.data() + 1, z.data() + 1 + n), xf;
    rk4(rhs, t0, t1, steps, x0, nullptr, xf);
    Eigen::VectorXd r(pins.size());
    const double s[1] = {z[0]};
    for (std::size_t k = 0; k < pins.size(); ++k) {
      const auto& x = pins[k].end == Endpoint::Initial ? x0 : xf;
      r[k] = x[pins[k].state] - pin_values[k](s);
    }
    return r;
  }
};

/// Newton iteration on the stacked pin mismatch in (s, x(t0)) from a grid of
/// starting parameters.
inline std::vector<FitRoot> shoot(const GeneralizedProblem& g, const std::vector<Expr>& u_triv) {
  Shooting sh(g, u_triv);
  const std::size_t n = g.base.space.n();
  std::vector<FitRoot> found;
  for (double s0 = -3.0; s0 <= 3.0 + 1e-12; s0 += 0.5) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n + 1);
    z[0] = s0;
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      const Eigen::VectorXd r = sh.mismatch(z);
      if (!r.allFinite()) break;
      if (r.lpNorm<Eigen::Infinity>() <= 1e-11) {
        ok = true;
        break;
      }
      Eigen::MatrixXd J(r.size(), n + 1);
      for (std::size_t c = 0; c <= n; ++c) {
        Eigen::VectorXd zp = z, zm = z;
        const double h = 1e-6 * std::max(1.0, std::abs(z[c]));
        zp[c] += h;
        zm[c] -= h;
        J.col(c) = (sh.mismatch(zp) - sh.mismatch(zm)) / (2 * h);
      }
      z -= J.completeOrthogonalDecomposition().solve(r);
    }
    if (!ok) continue;
    bool dup = false;
    for (const auto& f : found) dup = dup || std::abs(f.value - z[0]) < 1e-8;
    if (dup) continue;
    FitRoot root;
    root.value = z[0];
    root.initial_state.assign(z.data() + 1, z.data() + 1 + n);
    found.push_back(root);
  }
  std::sort(found.begin(), found.end(), [](const FitRoot& a, const FitRoot& b) { return a.value < b.value; });
  return found;
}

inline std::vector<Expr> default_trivial_control(const VarSpace& space, const std::vector<Expr>& u_triv) {
  if (u_triv.empty()) return std::vector<Expr>(space.m(), Expr(0));
  if (u_triv.size() != space.m()) throw ValidationError("trivial control must have one entry per control");
  for (const auto& u : u_triv)
    for (const auto& name : free_names(u))
      if (name != space.time && !space.coefficients.count(name))
        throw ValidationError("trivial control may only depend on t, found '" + name + "'");
  return u_triv;
}

}  // namespace detail

/// Chooses s so that u_triv is feasible for the generalized problem.
/// Closed form: integrate the trivial dynamics symbolically, eliminate the
/// integration constants with the pins, and solve the remaining conditions
/// in s (exactly when they are linear in s^k). Otherwise roots come from a
/// sign-change scan, or from shooting when no closed form exists.
inline ParameterFit fit_parameter(const GeneralizedProblem& g, const std::vector<Expr>& u_triv_in,
                                  const FitOptions& opt = {}) {
  const ProblemSpec& p = g.base;
  const VarSpace& space = p.space;
  ParameterFit fit;
  fit.u_triv = detail::default_trivial_control(space, u_triv_in);

  std::set<std::string> taken;
  for (const auto& pin : g.pins)
    for (const auto& n : free_names(pin.value)) taken.insert(n);
  std::vector<std::string> constants;
  for (std::size_t i = 0; i < space.n(); ++i) {
    constants.push_back(space.fresh_name("c" + std::to_string(i + 1), taken));
    taken.insert(constants.back());
  }
  std::optional<std::vector<RatFunc>> traj;
  if (!opt.force_numeric) traj = detail::picard(p, fit.u_triv, constants);

  if (!traj) {
    if (!p.is_numeric()) throw Unsupported("trivial dynamics have no closed form; numeric fitting needs numeric data");
    fit.numeric = true;
    fit.roots = detail::shoot(g, fit.u_triv);
    fit.notes.push_back("parameter fitted by shooting");
    if (fit.roots.empty()) throw SolverError("no trivializing parameter found");
    return fit;
  }

  std::vector<Expr> equations;
  for (const auto& pin : g.pins) {
    const RatFunc at = (*traj)[pin.state].substitute({{space.time, p.time_of(pin.end).rational()}});
    equations.push_back(Expr::from_rational(at - pin.value.rational()));
  }
  const auto lin = solve_linear(equations, constants);
  if (lin.rank < space.n()) throw SolverError("degenerate boundary data: integration constants are not determined");
  fit.mismatch = lin.conditions;

  std::map<std::string, RatFunc> cvals;
  for (const auto& c : constants) cvals.emplace(c, lin.values.at(c).rational());
  for (const auto& x : *traj) fit.trivial_states.push_back(Expr::from_rational(x.substitute(cvals)));

  const std::string& s = space.parameter;
  if (fit.mismatch.empty()) {
    fit.roots.push_back({0.0, Expr(0), {}});
    fit.notes.push_back("trivial control is feasible for every s; using s = 0");
    return fit;
  }

  int k = 0;
  for (const auto& c : fit.mismatch) k = detail::exponent_gcd(c.rational(), s, k);
  for (const auto& e : fit.trivial_states) k = detail::exponent_gcd(e.rational(), s, k);
  for (const auto& e : g.shifts.state_shifts) k = detail::exponent_gcd(e.rational(), s, k);
  for (const auto& e : g.shifts.control_shifts) k = detail::exponent_gcd(e.rational(), s, k);
  if (g.family.gauge) k = detail::exponent_gcd(g.family.gauge->rational(), s, k);
  if (k == 0) throw SolverError("no trivializing parameter found: boundary mismatch does not depend on s");
  fit.power = k;
  std::set<std::string> all = taken;
  all.insert(s);
  const std::string w = space.fresh_name("w", all);

  std::vector<Poly> conds;
  for (const auto& c : fit.mismatch) conds.push_back(detail::reduce_power(c.rational(), s, k, w).num());

  auto add_roots_from_power = [&](const Expr& wv) {
    if (!p.is_numeric()) {
      const int count = k % 2 == 0 ? 2 : 1;
      for (int i = 0; i < count; ++i) fit.roots.push_back({std::numeric_limits<double>::quiet_NaN(), wv, {}});
      fit.notes.push_back(s + "^" + std::to_string(k) + " = " + to_string(wv));
      return;
    }
    const double v = wv.rational().constant_value().get_d();
    if (k % 2 == 1) {
      fit.roots.push_back({std::copysign(std::pow(std::abs(v), 1.0 / k), v), wv, {}});
    } else if (v == 0.0) {
      fit.roots.push_back({0.0, wv, {}});
    } else if (v > 0.0) {
      const double r = std::pow(v, 1.0 / k);
      fit.roots.push_back({-r, wv, {}});
      fit.roots.push_back({r, wv, {}});
    }
  };

  for (const auto& c : conds)
    if (c.is_constant()) throw SolverError("no trivializing parameter found: boundary conditions are inconsistent");

  // Exact route: some condition is linear in w and the others vanish at its root.
  auto linear = std::find_if(conds.begin(), conds.end(), [&](const Poly& c) { return c.degree_in(w) == 1; });
  if (linear != conds.end()) {
    const RatFunc p1(linear->coeff_in(w, 1)), p0(linear->coeff_in(w, 0));
    const RatFunc wv = -p0 / p1;
    bool all_vanish = true;
    for (const auto& c : conds) all_vanish = all_vanish && RatFunc(c).substitute({{w, wv}}).is_zero();
    if (!all_vanish) throw SolverError("no trivializing parameter found: boundary conditions are inconsistent");
    add_roots_from_power(Expr::from_rational(wv));
    if (fit.roots.empty()) throw SolverError("no trivializing parameter found: " + s + "^" + std::to_string(k) +
                                             " = " + to_string(Expr::from_rational(wv)) + " has no real root");
    return fit;
  }

  if (!p.is_numeric())
    throw Unsupported("symbolic parameter fitting needs a condition linear in " + s + "^" + std::to_string(k));
  Poly common = conds[0];
  for (std::size_t i = 1; i < conds.size(); ++i) common = gcd(common, conds[i]);
  if (common.is_constant()) throw SolverError("no trivializing parameter found: conditions have no common root");
  Poly in_s;
  for (const auto& [m, c] : common.terms()) in_s.add_term(Monomial::variable(s, m.degree_in(w) * k), c);
  std::vector<double> roots;
  if (common.constant_term() == 0) roots.push_back(0.0);
  for (double r : detail::real_roots(in_s, s, opt.scan_min, opt.scan_max, opt.scan_points))
    if (std::abs(r) > 1e-12 || roots.empty() || roots[0] != 0.0) roots.push_back(r);
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              roots.end());
  for (double r : roots) fit.roots.push_back({r, pow(Expr::from_double(r), k), {}});
  fit.notes.push_back("parameter roots located numerically on [" + std::to_string(opt.scan_min) + ", " +
                      std::to_string(opt.scan_max) + "]");
  if (fit.roots.empty()) throw SolverError("no trivializing parameter found in the scan interval");
  return fit;
}

/// Pointwise certificate: L(t, x, u_triv) is free of x and L - L(u_triv) is
/// a sum of even powers of (u - u_triv) with coefficients that are sums of
/// even monomials with positive weights. Anything else is a candidate.
inline Status certify_trivial(const ProblemSpec& p, const std::vector<Expr>& u_triv_in) {
  const VarSpace& space = p.space;
  const auto u_triv = detail::default_trivial_control(space, u_triv_in);
  std::map<std::string, Expr> at_triv;
  for (std::size_t j = 0; j < space.m(); ++j) at_triv.emplace(space.controls[j], u_triv[j]);
  const Expr base = substitute(p.lagrangian, at_triv);
  for (const auto& x : space.states)
    if (depends_on(base, x)) return Status::Candidate;

  std::set<std::string> taken = free_names(p.lagrangian);
  std::map<std::string, Expr> shift;
  std::vector<std::string> vs;
  for (std::size_t j = 0; j < space.m(); ++j) {
    vs.push_back(space.fresh_name("v" + std::to_string(j + 1), taken));
    taken.insert(vs.back());
    shift.emplace(space.controls[j], Expr::symbol(vs.back()) + u_triv[j]);
  }
  const RatFunc diff = (substitute(p.lagrangian, shift) - substitute(base, shift)).rational();
  if (diff.is_zero()) return Status::CertifiedGlobal;
  auto even_positive = [](const Poly& q) {
    for (const auto& [m, c] : q.terms()) {
      if (c <= 0) return false;
      for (const auto& [v, e] : m.factors())
        if (e % 2) return false;
    }
    return true;
  };
  if (!even_positive(diff.den())) return Status::Candidate;
  return even_positive(diff.num()) ? Status::CertifiedGlobal : Status::Candidate;
}

/// The gauge adds Phi(t1, x(t1)) - Phi(t0, x(t0)) to the cost. That shift
/// is the same for every admissible trajectory only if Phi reads pinned
/// endpoint states alone. Returns the first offending endpoint state.
inline std::optional<std::string> unpinned_gauge_state(const ProblemSpec& p, const Expr& gauge) {
  for (std::size_t i = 0; i < p.space.n(); ++i) {
    if (!depends_on(gauge, p.space.states[i])) continue;
    for (Endpoint end : {Endpoint::Initial, Endpoint::Final}) {
      bool pinned = false;
      for (const auto& pin : p.boundary) pinned = pinned || (pin.end == end && pin.state == i);
      if (!pinned) return p.space.states[i] + "(" + endpoint_tag(end) + ")";
    }
  }
  return std::nullopt;
}

struct NoetherOptions {
  std::vector<Expr> u_triv;
  FitOptions fit;
  int mesh = 200;
};

/// The direct method end to end: generalize along `f`, fit the parameter,
/// and map each trivial trajectory back through the inverse shift.
inline std::vector<Solution> noether_solve(const ProblemSpec& p, const TransformFamily& f,
                                           const NoetherOptions& opt = {}) {
  const VarSpace& space = p.space;
  const GeneralizedProblem g = generalize(p, f);
  const ParameterFit fit = fit_parameter(g, opt.u_triv, opt.fit);
  const Status status = certify_trivial(p, fit.u_triv);
  const std::string& s = space.parameter;
  std::vector<Solution> out;

  for (const auto& root : fit.roots) {
    Solution sol;
    sol.method = Method::Noether;
    sol.status = status;
    sol.diagnostics.notes = fit.notes;
    if (!std::isnan(root.value)) sol.diagnostics.parameter_values.push_back(root.value);
    auto demote_if_gauge_free = [&](const Expr& gauge_at_root) {
      if (auto free_state = unpinned_gauge_state(p, gauge_at_root)) {
        sol.status = Status::Candidate;
        sol.diagnostics.notes.push_back("gauge term depends on the unpinned endpoint state " + *free_state +
                                        "; the cost shift between the problems is not constant");
      }
    };

    if (fit.numeric) {
      detail::Shooting sh(g, fit.u_triv);
      const int steps = std::max(opt.mesh, 2) * 10;
      std::vector<std::vector<double>> path;
      std::vector<double> xf;
      detail::rk4(sh.rhs, sh.t0, sh.t1, steps, root.initial_state, &path, xf);
      const std::map<std::string, Expr> at_s{{s, Expr::from_double(root.value)}};
      std::vector<CompiledExpr> gs, ds, us;
      const std::vector<std::string> slot{space.time};
      for (const auto& e : g.shifts.state_shifts) gs.emplace_back(substitute(e, at_s), slot);
      for (const auto& e : g.shifts.control_shifts) ds.emplace_back(substitute(e, at_s), slot);
      for (const auto& e : fit.u_triv) us.emplace_back(e, slot);
      SampledTrajectory traj;
      for (int k = 0; k <= steps; k += 10) {
        const double tv[1] = {sh.t0 + (sh.t1 - sh.t0) * k / steps};
        traj.times.push_back(tv[0]);
        std::vector<double> x(space.n()), u(space.m());
        for (std::size_t i = 0; i < space.n(); ++i) x[i] = path[k][i] - gs[i](tv);
        for (std::size_t j = 0; j < space.m(); ++j) u[j] = us[j](tv) - ds[j](tv);
        traj.states.push_back(x);
        traj.controls.push_back(u);
      }
      demote_if_gauge_free(substitute(*g.family.gauge, at_s));
      sol.samples = std::move(traj);
      sol.cost = cost_of(p, sol, opt.mesh);
      const auto r = residuals(p, sol, opt.mesh);
      sol.diagnostics.dyn_residual = r.dynamics;
      sol.diagnostics.bc_residual = r.boundary;
      out.push_back(std::move(sol));
      continue;
    }

    std::set<std::string> names{s};
    for (const auto& n : free_names(*root.power_value)) names.insert(n);
    const std::string w = space.fresh_name("w", names);
    const std::map<std::string, RatFunc> at_root{{w, root.power_value->rational()}};
    auto at = [&](const Expr& e) {
      return Expr::from_rational(detail::reduce_power(e.rational(), s, fit.power, w).substitute(at_root));
    };
    for (std::size_t i = 0; i < space.n(); ++i)
      sol.states.push_back(at(fit.trivial_states[i] - g.shifts.state_shifts[i]));
    for (std::size_t j = 0; j < space.m(); ++j)
      sol.controls.push_back(at(fit.u_triv[j] - g.shifts.control_shifts[j]));
    demote_if_gauge_free(at(*g.family.gauge));
    sol.exact_cost = exact_cost(p, sol.states, sol.controls);
    if (p.is_numeric()) {
      if (sol.exact_cost && is_constant(*sol.exact_cost))
        sol.cost = sol.exact_cost->rational().constant_value().get_d();
      else
        sol.cost = cost_of(p, sol, opt.mesh);
      const auto r = residuals(p, sol, opt.mesh);
      sol.diagnostics.dyn_residual = r.dynamics;
      sol.diagnostics.bc_residual = r.boundary;
    }
    out.push_back(std::move(sol));
  }
  return out;
}

}  // namespace symdirect

#endif
