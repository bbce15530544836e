#ifndef SYMDIRECT_TRANSFORM_HPP
#define SYMDIRECT_TRANSFORM_HPP

#include <optional>
#include <string>
#include <vector>

#include "expr.hpp"

namespace symdirect {

/// One-parameter family h^s = (t^s, x^s, u^s) with an optional gauge term
/// Phi^s(t, x). All maps are expressions in t, x, u and the parameter.
struct TransformFamily {
  Expr t_map;
  std::vector<Expr> x_maps;
  std::vector<Expr> u_maps;
  std::optional<Expr> gauge;

  static TransformFamily identity(const VarSpace& space) {
    TransformFamily f;
    f.t_map = Expr::symbol(space.time);
    for (const auto& x : space.states) f.x_maps.push_back(Expr::symbol(x));
    for (const auto& u : space.controls) f.u_maps.push_back(Expr::symbol(u));
    f.gauge = Expr(0);
    return f;
  }

  /// Bindings t -> t^s, x_i -> x_i^s, u_j -> u_j^s for composition L o h^s.
  std::map<std::string, Expr> bindings(const VarSpace& space) const {
    std::map<std::string, Expr> b{{space.time, t_map}};
    for (std::size_t i = 0; i < x_maps.size(); ++i) b.emplace(space.states[i], x_maps[i]);
    for (std::size_t j = 0; j < u_maps.size(); ++j) b.emplace(space.controls[j], u_maps[j]);
    return b;
  }
};

/// x_i^s = x_i + g_i(t, s) and u_j^s = u_j + d_j(t, s) with t^s = t.
struct ShiftForm {
  std::vector<Expr> state_shifts;
  std::vector<Expr> control_shifts;
};

inline void validate_family(const TransformFamily& f, const VarSpace& space) {
  if (f.x_maps.size() != space.n()) throw ValidationError("x_s must have one entry per state");
  if (f.u_maps.size() != space.m()) throw ValidationError("u_s must have one entry per control");
  auto check = [&](const Expr& e) {
    for (const auto& name : free_names(e))
      if (!space.declared(name)) throw ValidationError("transformation uses undeclared name '" + name + "'");
  };
  check(f.t_map);
  for (const auto& e : f.x_maps) check(e);
  for (const auto& e : f.u_maps) check(e);
  if (f.gauge) check(*f.gauge);
}

/// h^0 is the identity: every map reduces to its base variable at s = 0.
inline bool identity_at_zero(const TransformFamily& f, const VarSpace& space) {
  const std::map<std::string, Expr> zero{{space.parameter, Expr(0)}};
  if (!equal(substitute(f.t_map, zero), Expr::symbol(space.time))) return false;
  for (std::size_t i = 0; i < f.x_maps.size(); ++i)
    if (!equal(substitute(f.x_maps[i], zero), Expr::symbol(space.states[i]))) return false;
  for (std::size_t j = 0; j < f.u_maps.size(); ++j)
    if (!equal(substitute(f.u_maps[j], zero), Expr::symbol(space.controls[j]))) return false;
  return true;
}

/// Shift decomposition, or nullopt when t^s != t or some shift depends on
/// a state or control.
inline std::optional<ShiftForm> shift_form(const TransformFamily& f, const VarSpace& space) {
  if (!equal(f.t_map, Expr::symbol(space.time))) return std::nullopt;
  auto free_of_xu = [&](const Expr& e) {
    for (const auto& x : space.states)
      if (depends_on(e, x)) return false;
    for (const auto& u : space.controls)
      if (depends_on(e, u)) return false;
    return true;
  };
  ShiftForm out;
  for (std::size_t i = 0; i < f.x_maps.size(); ++i) {
    Expr g = canonical(f.x_maps[i] - Expr::symbol(space.states[i]));
    if (!free_of_xu(g)) return std::nullopt;
    out.state_shifts.push_back(g);
  }
  for (std::size_t j = 0; j < f.u_maps.size(); ++j) {
    Expr d = canonical(f.u_maps[j] - Expr::symbol(space.controls[j]));
    if (!free_of_xu(d)) return std::nullopt;
    out.control_shifts.push_back(d);
  }
  return out;
}

}  // namespace symdirect

#endif
