#ifndef SYMDIRECT_PROBLEM_HPP
#define SYMDIRECT_PROBLEM_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "compiled.hpp"
#include "expr.hpp"

namespace symdirect {

enum class Endpoint { Initial, Final };

inline const char* endpoint_tag(Endpoint e) { return e == Endpoint::Initial ? "t0" : "t1"; }

/// Scalar endpoint condition x_state(t0 or t1) = value.
struct BoundaryPin {
  Endpoint end = Endpoint::Initial;
  std::size_t state = 0;
  Expr value;
};

/// Lagrange-form problem: minimize the integral of L(t, x, u) over [t0, t1]
/// subject to x' = f(t, x, u), the boundary pins, and unconstrained u.
/// Horizon and pin values may mention coefficient symbols.
struct ProblemSpec {
  VarSpace space;
  Expr lagrangian;
  std::vector<Expr> dynamics;
  Expr t0 = 0;
  Expr t1 = 1;
  std::vector<BoundaryPin> boundary;

  const Expr& time_of(Endpoint e) const { return e == Endpoint::Initial ? t0 : t1; }

  /// True when no coefficient symbol appears anywhere.
  bool is_numeric() const {
    if (!space.coefficients.empty()) {
      auto touches = [&](const Expr& e) {
        for (const auto& n : free_names(e))
          if (space.coefficients.count(n)) return true;
        return false;
      };
      if (touches(lagrangian) || touches(t0) || touches(t1)) return false;
      for (const auto& f : dynamics)
        if (touches(f)) return false;
      for (const auto& b : boundary)
        if (touches(b.value)) return false;
    }
    return true;
  }

  double t0_value() const { return numeric_value(t0, "t0"); }
  double t1_value() const { return numeric_value(t1, "t1"); }

  /// Throws ValidationError on any broken invariant.
  void validate() const {
    space.validate();
    if (dynamics.size() != space.n())
      throw ValidationError("dimension mismatch: " + std::to_string(dynamics.size()) + " dynamics entries for " +
                            std::to_string(space.n()) + " states");
    auto check_names = [&](const Expr& e, const std::string& what, bool allow_tx) {
      for (const auto& name : free_names(e)) {
        auto kind = space.kind_of(name);
        if (!kind) throw ValidationError(what + " uses undeclared name '" + name + "'");
        if (*kind == SymbolKind::Parameter) throw ValidationError(what + " must not use the parameter");
        if (!allow_tx && *kind != SymbolKind::Coefficient)
          throw ValidationError(what + " may only use coefficient symbols, found '" + name + "'");
      }
    };
    check_names(lagrangian, "lagrangian", true);
    for (const auto& f : dynamics) check_names(f, "dynamics", true);
    check_names(t0, "t0", false);
    check_names(t1, "t1", false);
    if (is_constant(t0) && is_constant(t1) && !(t0.rational().constant_value() < t1.rational().constant_value()))
      throw ValidationError("horizon requires t0 < t1");
    std::set<std::pair<int, std::size_t>> seen;
    for (const auto& b : boundary) {
      if (b.state >= space.n()) throw ValidationError("boundary pin refers to a missing state");
      check_names(b.value, "boundary value", false);
      if (!seen.emplace(static_cast<int>(b.end), b.state).second)
        throw ValidationError(std::string("duplicate boundary entry for ") + space.states[b.state] + "(" +
                              endpoint_tag(b.end) + ")");
    }
  }

  /// Slots for compiled evaluation of L and f: t, states, controls.
  std::vector<std::string> slots() const {
    std::vector<std::string> out{space.time};
    out.insert(out.end(), space.states.begin(), space.states.end());
    out.insert(out.end(), space.controls.begin(), space.controls.end());
    return out;
  }

 private:
  static double numeric_value(const Expr& e, const char* what) {
    if (!is_constant(e)) throw ValidationError(std::string(what) + " is symbolic; instantiate coefficients first");
    return e.rational().constant_value().get_d();
  }
};

/// Replace coefficient symbols by values and drop them from the space.
inline ProblemSpec instantiate(const ProblemSpec& p, const std::map<std::string, Expr>& values) {
  ProblemSpec out = p;
  out.lagrangian = substitute(p.lagrangian, values);
  for (auto& f : out.dynamics) f = substitute(f, values);
  out.t0 = substitute(p.t0, values);
  out.t1 = substitute(p.t1, values);
  for (auto& b : out.boundary) b.value = substitute(b.value, values);
  for (const auto& [k, v] : values) out.space.coefficients.erase(k);
  return out;
}

enum class Status { CertifiedGlobal, Candidate };
enum class Method { Noether, Leitmann, Oracle };

inline const char* status_name(Status s) { return s == Status::CertifiedGlobal ? "certified-global" : "candidate"; }
inline const char* method_name(Method m) {
  switch (m) {
    case Method::Noether:
      return "noether";
    case Method::Leitmann:
      return "leitmann";
    case Method::Oracle:
      return "oracle";
  }
  return "";
}

/// Trajectory samples. `states[k]` is the state at `times[k]`. Controls are
/// either nodal (one row per time) or held constant on each interval (one
/// row per interval) when `interval_controls` is set.
struct SampledTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> controls;
  bool interval_controls = false;

  const std::vector<double>& control_at_node(std::size_t k) const {
    if (!interval_controls) return controls[k];
    return controls[std::min(k, controls.size() - 1)];
  }
};

struct Diagnostics {
  double dyn_residual = 0.0;
  double bc_residual = 0.0;
  std::vector<double> parameter_values;
  std::vector<std::string> notes;
};

/// Optimal (or candidate) trajectory. The closed form, when present, is
/// authoritative; samples are a view of it or the only data (oracle).
struct Solution {
  Status status = Status::Candidate;
  Method method = Method::Noether;
  std::vector<Expr> states;
  std::vector<Expr> controls;
  std::optional<SampledTrajectory> samples;
  double cost = std::numeric_limits<double>::quiet_NaN();
  std::optional<Expr> exact_cost;
  Diagnostics diagnostics;

  bool has_closed_form() const noexcept { return !states.empty(); }
};

namespace detail {

/// Evaluates a Solution at arbitrary times for a numeric problem.
class TrajectoryEval {
 public:
  TrajectoryEval(const ProblemSpec& p, const Solution& sol) : sol_(sol), n_(p.space.n()), m_(p.space.m()) {
    if (sol.has_closed_form()) {
      const std::vector<std::string> slot{p.space.time};
      for (const auto& e : sol.states) xs_.emplace_back(e, slot);
      for (const auto& e : sol.controls) us_.emplace_back(e, slot);
    } else if (!sol.samples || sol.samples->times.size() < 2) {
      throw EvalError("solution has neither a closed form nor samples");
    }
  }

  bool closed() const { return sol_.has_closed_form(); }

  void state(double t, std::vector<double>& out) const {
    out.resize(n_);
    const double tv[1] = {t};
    for (std::size_t i = 0; i < n_; ++i) out[i] = xs_[i](tv);
  }
  void control(double t, std::vector<double>& out) const {
    out.resize(m_);
    const double tv[1] = {t};
    for (std::size_t j = 0; j < m_; ++j) out[j] = us_[j](tv);
  }

 private:
  const Solution& sol_;
  std::size_t n_, m_;
  std::vector<CompiledExpr> xs_, us_;
};

inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int k = 1; k < intervals; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return acc * h / 3.0;
}

}  // namespace detail

/// Composite Simpson quadrature of L along the solution. Sampled
/// trajectories are integrated interval by interval with linearly
/// interpolated states and the interval's control.
inline double cost_of(const ProblemSpec& p, const Solution& sol, int mesh) {
  if (mesh < 2) throw ValidationError("cost_of requires mesh >= 2");
  const CompiledExpr L(p.lagrangian, p.slots());
  const std::size_t n = p.space.n();
  const std::size_t m = p.space.m();
  std::vector<double> args(1 + n + m);
  if (sol.has_closed_form()) {
    detail::TrajectoryEval traj(p, sol);
    std::vector<double> x, u;
    auto integrand = [&](double t) {
      traj.state(t, x);
      traj.control(t, u);
      args[0] = t;
      std::copy(x.begin(), x.end(), args.begin() + 1);
      std::copy(u.begin(), u.end(), args.begin() + 1 + n);
      return L(args);
    };
    return detail::simpson(integrand, p.t0_value(), p.t1_value(), mesh);
  }
  const SampledTrajectory& s = *sol.samples;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < s.times.size(); ++k) {
    const double ta = s.times[k], tb = s.times[k + 1];
    auto integrand = [&](double t) {
      const double w = (t - ta) / (tb - ta);
      args[0] = t;
      for (std::size_t i = 0; i < n; ++i) args[1 + i] = (1 - w) * s.states[k][i] + w * s.states[k + 1][i];
      for (std::size_t j = 0; j < m; ++j) {
        const double ua = s.controls[k][j];
        const double ub = s.interval_controls ? s.controls[k][j] : s.controls[k + 1][j];
        args[1 + n + j] = (1 - w) * ua + w * ub;
      }
      return L(args);
    };
    total += detail::simpson(integrand, ta, tb, 2);
  }
  return total;
}

struct Residuals {
  double dynamics = 0.0;
  double boundary = 0.0;
};

/// Max-norm dynamics defect on a mesh of [t0, t1] and max pin violation.
/// Closed forms are differentiated symbolically; identically-zero defects
/// report exactly 0. Sampled trajectories use the midpoint difference of
/// each interval against the averaged dynamics.
inline Residuals residuals(const ProblemSpec& p, const Solution& sol, int mesh) {
  if (mesh < 2) throw ValidationError("residuals requires mesh >= 2");
  const std::size_t n = p.space.n();
  const std::size_t m = p.space.m();
  Residuals out;
  if (sol.has_closed_form()) {
    std::map<std::string, Expr> along;
    for (std::size_t i = 0; i < n; ++i) along.emplace(p.space.states[i], sol.states[i]);
    for (std::size_t j = 0; j < m; ++j) along.emplace(p.space.controls[j], sol.controls[j]);
    std::vector<Expr> defects;
    for (std::size_t i = 0; i < n; ++i) {
      Expr d = canonical(partial(sol.states[i], p.space.time) - substitute(p.dynamics[i], along));
      if (!is_zero(d)) defects.push_back(d);
    }
    if (!defects.empty()) {
      const double a = p.t0_value(), b = p.t1_value();
      for (const auto& d : defects) {
        CompiledExpr c(d, {p.space.time});
        for (int k = 0; k <= mesh; ++k) {
          const double tv[1] = {a + (b - a) * k / mesh};
          out.dynamics = std::max(out.dynamics, std::abs(c(tv)));
        }
      }
    }
    for (const auto& pin : p.boundary) {
      Expr r = canonical(substitute(sol.states[pin.state], {{p.space.time, p.time_of(pin.end)}}) - pin.value);
      if (is_zero(r)) continue;
      if (!is_constant(r)) throw ValidationError("boundary residual is symbolic; instantiate coefficients first");
      out.boundary = std::max(out.boundary, std::abs(r.rational().constant_value().get_d()));
    }
    return out;
  }

  const SampledTrajectory& s = *sol.samples;
  const auto slots = p.slots();
  std::vector<CompiledExpr> f;
  for (const auto& e : p.dynamics) f.emplace_back(e, slots);
  std::vector<double> a(1 + n + m), b(1 + n + m);
  for (std::size_t k = 0; k + 1 < s.times.size(); ++k) {
    const double h = s.times[k + 1] - s.times[k];
    a[0] = s.times[k];
    b[0] = s.times[k + 1];
    for (std::size_t i = 0; i < n; ++i) {
      a[1 + i] = s.states[k][i];
      b[1 + i] = s.states[k + 1][i];
    }
    for (std::size_t j = 0; j < m; ++j) {
      a[1 + n + j] = s.controls[k][j];
      b[1 + n + j] = s.interval_controls ? s.controls[k][j] : s.controls[k + 1][j];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double slope = (s.states[k + 1][i] - s.states[k][i]) / h;
      out.dynamics = std::max(out.dynamics, std::abs(slope - 0.5 * (f[i](a) + f[i](b))));
    }
  }
  for (const auto& pin : p.boundary) {
    const std::size_t k = pin.end == Endpoint::Initial ? 0 : s.times.size() - 1;
    const double target = pin.value.rational().constant_value().get_d();
    out.boundary = std::max(out.boundary, std::abs(s.states[k][pin.state] - target));
  }
  return out;
}

/// Exact cost of a closed-form solution when the integrand is polynomial in
/// t; nullopt otherwise.
inline std::optional<Expr> exact_cost(const ProblemSpec& p, const std::vector<Expr>& states,
                                      const std::vector<Expr>& controls) {
  std::map<std::string, Expr> along;
  for (std::size_t i = 0; i < p.space.n(); ++i) along.emplace(p.space.states[i], states[i]);
  for (std::size_t j = 0; j < p.space.m(); ++j) along.emplace(p.space.controls[j], controls[j]);
  const Expr integrand = substitute(p.lagrangian, along);
  if (integrand.rational().den().depends_on(p.space.time)) return std::nullopt;
  const Expr F = integrate(integrand, p.space.time);
  return canonical(substitute(F, {{p.space.time, p.t1}}) - substitute(F, {{p.space.time, p.t0}}));
}

/// Samples a closed-form solution on a uniform mesh with nodal controls.
inline SampledTrajectory sample(const ProblemSpec& p, const Solution& sol, int mesh) {
  detail::TrajectoryEval traj(p, sol);
  SampledTrajectory s;
  const double a = p.t0_value(), b = p.t1_value();
  std::vector<double> x, u;
  for (int k = 0; k <= mesh; ++k) {
    const double t = k == mesh ? b : a + (b - a) * k / mesh;
    traj.state(t, x);
    traj.control(t, u);
    s.times.push_back(t);
    s.states.push_back(x);
    s.controls.push_back(u);
  }
  return s;
}

}  // namespace symdirect

#endif
