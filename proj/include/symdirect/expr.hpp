#ifndef SYMDIRECT_EXPR_HPP
#define SYMDIRECT_EXPR_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ratfunc.hpp"

namespace symdirect {

enum class SymbolKind { Time, State, Control, Parameter, Coefficient };

/// Names of the independent variable, states, controls, the transformation
/// parameter, and free coefficient symbols.
struct VarSpace {
  std::string time = "t";
  std::vector<std::string> states;
  std::vector<std::string> controls;
  std::string parameter = "s";
  std::set<std::string> coefficients;

  std::size_t n() const noexcept { return states.size(); }
  std::size_t m() const noexcept { return controls.size(); }

  std::optional<SymbolKind> kind_of(const std::string& name) const {
    if (name == time) return SymbolKind::Time;
    for (const auto& s : states)
      if (s == name) return SymbolKind::State;
    for (const auto& c : controls)
      if (c == name) return SymbolKind::Control;
    if (name == parameter) return SymbolKind::Parameter;
    if (coefficients.count(name)) return SymbolKind::Coefficient;
    return std::nullopt;
  }
  bool declared(const std::string& name) const { return kind_of(name).has_value(); }

  std::size_t state_index(const std::string& name) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i] == name) return i;
    throw ValidationError("unknown state '" + name + "'");
  }

  /// Throws ValidationError unless names are distinct and n, m >= 1.
  void validate() const {
    if (states.empty()) throw ValidationError("at least one state is required");
    if (controls.empty()) throw ValidationError("at least one control is required");
    std::set<std::string> seen;
    auto add = [&](const std::string& name) {
      if (name.empty()) throw ValidationError("empty name");
      if (!seen.insert(name).second) throw ValidationError("duplicate name '" + name + "'");
    };
    add(time);
    for (const auto& s : states) add(s);
    for (const auto& c : controls) add(c);
    add(parameter);
    for (const auto& c : coefficients) add(c);
  }

  /// A name not used by this space, built from `stem` (stem, stem_1, ...).
  std::string fresh_name(const std::string& stem, const std::set<std::string>& taken = {}) const {
    if (!declared(stem) && !taken.count(stem)) return stem;
    for (int k = 1;; ++k) {
      std::string candidate = stem + "_" + std::to_string(k);
      if (!declared(candidate) && !taken.count(candidate)) return candidate;
    }
  }
};

class Expr;

namespace detail {

enum class NodeKind { Constant, Symbol, Sum, Product, Power, Quotient, Negate };

struct Node {
  NodeKind kind = NodeKind::Constant;
  Rational value;
  std::string name;
  std::vector<Expr> children;
  int exponent = 1;

  mutable std::once_flag once;
  mutable std::optional<RatFunc> canon;
};

}  // namespace detail

/// Immutable symbolic expression. Arithmetic builds a structural tree;
/// `canonical()` and `rational()` give the exact normal form.
class Expr {
 public:
  using NodeKind = detail::NodeKind;

  Expr() : Expr(Rational(0)) {}
  Expr(int v) : Expr(Rational(v)) {}
  Expr(long v) : Expr(Rational(v)) {}
  Expr(const Rational& v) {
    auto n = std::make_shared<detail::Node>();
    n->kind = NodeKind::Constant;
    n->value = v;
    n->value.canonicalize();
    node_ = std::move(n);
  }

  static Expr symbol(const std::string& name) {
    auto n = std::make_shared<detail::Node>();
    n->kind = NodeKind::Symbol;
    n->name = name;
    return Expr(std::move(n));
  }

  /// Exact value of a double (every finite double is a dyadic rational).
  static Expr from_double(double v) {
    if (!std::isfinite(v)) throw EvalError("non-finite constant");
    Rational q(v);
    return Expr(q);
  }

  static Expr sum(std::vector<Expr> terms) {
    if (terms.empty()) return Expr(0);
    if (terms.size() == 1) return terms.front();
    return composite(NodeKind::Sum, std::move(terms));
  }
  static Expr product(std::vector<Expr> factors) {
    if (factors.empty()) return Expr(1);
    if (factors.size() == 1) return factors.front();
    return composite(NodeKind::Product, std::move(factors));
  }
  static Expr power(const Expr& base, int exponent) { return composite(NodeKind::Power, {base}, exponent); }
  static Expr quotient(const Expr& num, const Expr& den) { return composite(NodeKind::Quotient, {num, den}); }
  static Expr negate(const Expr& e) { return composite(NodeKind::Negate, {e}); }

  /// Tree for a canonical rational function; its canonical form is cached.
  static Expr from_rational(const RatFunc& r) {
    Expr e = r.is_polynomial() ? from_poly(r.num()) : quotient(from_poly(r.num()), from_poly(r.den()));
    std::call_once(e.node_->once, [&] { e.node_->canon = r; });
    return e;
  }

  NodeKind kind() const noexcept { return node_->kind; }
  const Rational& value() const noexcept { return node_->value; }
  const std::string& name() const noexcept { return node_->name; }
  const std::vector<Expr>& children() const noexcept { return node_->children; }
  int exponent() const noexcept { return node_->exponent; }

  /// Canonical rational-function form (computed once, then cached).
  const RatFunc& rational() const {
    std::call_once(node_->once, [this] { node_->canon = compute_rational(); });
    return *node_->canon;
  }

  friend Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
  friend Expr operator-(const Expr& a, const Expr& b) { return sum({a, negate(b)}); }
  friend Expr operator-(const Expr& a) { return negate(a); }
  friend Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
  friend Expr operator/(const Expr& a, const Expr& b) { return quotient(a, b); }

 private:
  explicit Expr(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}

  static Expr composite(NodeKind kind, std::vector<Expr> children, int exponent = 1) {
    auto n = std::make_shared<detail::Node>();
    n->kind = kind;
    n->children = std::move(children);
    n->exponent = exponent;
    return Expr(std::move(n));
  }

  static Expr from_poly(const Poly& p) {
    if (p.is_zero()) return Expr(0);
    std::vector<Expr> terms;
    for (const auto& [m, c] : p.terms()) {
      std::vector<Expr> factors;
      const bool negative = c < 0;
      Rational mag = negative ? Rational(-c) : c;
      if (m.is_one() || mag != 1) factors.emplace_back(mag);
      for (const auto& [v, e] : m.factors()) factors.push_back(e == 1 ? symbol(v) : power(symbol(v), e));
      Expr t = product(std::move(factors));
      terms.push_back(negative ? negate(t) : t);
    }
    return sum(std::move(terms));
  }

  RatFunc compute_rational() const {
    const auto& n = *node_;
    switch (n.kind) {
      case NodeKind::Constant:
        return RatFunc(n.value);
      case NodeKind::Symbol:
        return RatFunc::variable(n.name);
      case NodeKind::Sum: {
        RatFunc acc;
        for (const auto& c : n.children) acc += c.rational();
        return acc;
      }
      case NodeKind::Product: {
        RatFunc acc(1);
        for (const auto& c : n.children) acc *= c.rational();
        return acc;
      }
      case NodeKind::Power:
        return n.children[0].rational().pow(n.exponent);
      case NodeKind::Quotient:
        return n.children[0].rational() / n.children[1].rational();
      case NodeKind::Negate:
        return -n.children[0].rational();
    }
    return RatFunc{};
  }

  std::shared_ptr<const detail::Node> node_;
};

inline Expr pow(const Expr& base, int exponent) { return Expr::power(base, exponent); }

inline Expr canonical(const Expr& e) { return Expr::from_rational(e.rational()); }

inline bool equal(const Expr& a, const Expr& b) { return a.rational() == b.rational(); }
inline bool is_zero(const Expr& e) { return e.rational().is_zero(); }
inline bool is_constant(const Expr& e) { return e.rational().is_constant(); }

/// Structural rendering in the expression grammar; parse(to_string(e)) == e.
inline std::string to_string(const Expr& e);

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Sum:
      return 1;
    case NodeKind::Product:
    case NodeKind::Quotient:
      return 2;
    case NodeKind::Negate:
      return 3;
    case NodeKind::Power:
      return 4;
    case NodeKind::Constant:
      return e.value().get_den() != 1 ? 2 : (e.value() < 0 ? 3 : 5);
    case NodeKind::Symbol:
      return 5;
  }
  return 0;
}

inline std::string wrap(const Expr& e, int min_prec) {
  std::string s = to_string(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  using K = detail::NodeKind;
  switch (e.kind()) {
    case K::Constant:
      return rational_to_string(e.value());
    case K::Symbol:
      return e.name();
    case K::Sum: {
      std::string out;
      bool first = true;
      for (const auto& c : e.children()) {
        if (first) {
          out += detail::wrap(c, 1);
        } else if (c.kind() == K::Negate) {
          out += " - " + detail::wrap(c.children()[0], 2);
        } else {
          out += " + " + detail::wrap(c, 2);
        }
        first = false;
      }
      return out;
    }
    case K::Product: {
      std::string out;
      for (std::size_t i = 0; i < e.children().size(); ++i) {
        if (i) out += "*";
        out += detail::wrap(e.children()[i], i == 0 ? 2 : 3);
      }
      return out;
    }
    case K::Quotient:
      return detail::wrap(e.children()[0], 2) + "/" + detail::wrap(e.children()[1], 4);
    case K::Negate:
      return "-" + detail::wrap(e.children()[0], 2);
    case K::Power:
      return detail::wrap(e.children()[0], 5) + "^" + std::to_string(e.exponent());
  }
  return {};
}

/// Names occurring in the canonical form.
inline std::set<std::string> free_names(const Expr& e) { return e.rational().variables(); }

inline bool depends_on(const Expr& e, const std::string& name) { return e.rational().depends_on(name); }

inline Expr partial(const Expr& e, const std::string& var) { return Expr::from_rational(e.rational().partial(var)); }

inline Expr integrate(const Expr& e, const std::string& var) {
  return Expr::from_rational(e.rational().integrate(var));
}

inline int degree_in(const Expr& e, const std::string& var) { return e.rational().degree_in(var); }

inline Expr coeff_in(const Expr& e, const std::string& var, int k) {
  return Expr::from_rational(e.rational().coeff_in(var, k));
}

/// Simultaneous substitution; the result is canonical.
inline Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings) {
  std::map<std::string, RatFunc> rb;
  for (const auto& [k, v] : bindings) rb.emplace(k, v.rational());
  return Expr::from_rational(e.rational().substitute(rb));
}

/// Numeric evaluation of the tree as written. Throws EvalError on a missing
/// name or division by zero.
inline double eval(const Expr& e, const std::map<std::string, double>& assignment) {
  using K = detail::NodeKind;
  switch (e.kind()) {
    case K::Constant:
      return e.value().get_d();
    case K::Symbol: {
      auto it = assignment.find(e.name());
      if (it == assignment.end()) throw EvalError("no value for '" + e.name() + "'");
      return it->second;
    }
    case K::Sum: {
      double acc = 0.0;
      for (const auto& c : e.children()) acc += eval(c, assignment);
      return acc;
    }
    case K::Product: {
      double acc = 1.0;
      for (const auto& c : e.children()) acc *= eval(c, assignment);
      return acc;
    }
    case K::Power: {
      const double b = eval(e.children()[0], assignment);
      if (b == 0.0 && e.exponent() < 0) throw EvalError("division by zero");
      return std::pow(b, e.exponent());
    }
    case K::Quotient: {
      const double d = eval(e.children()[1], assignment);
      if (d == 0.0) throw EvalError("division by zero");
      return eval(e.children()[0], assignment) / d;
    }
    case K::Negate:
      return -eval(e.children()[0], assignment);
  }
  return 0.0;
}

/// d/dt of e(t, x(t)) along x' = dynamics. `e` must not mention a control.
inline Expr total_derivative(const Expr& e, const std::vector<Expr>& dynamics, const VarSpace& space) {
  if (dynamics.size() != space.n()) throw ValidationError("dynamics length differs from state count");
  for (const auto& u : space.controls)
    if (depends_on(e, u))
      throw Unsupported("total derivative of an expression depending on control '" + u + "'");
  RatFunc acc = e.rational().partial(space.time);
  for (std::size_t i = 0; i < space.n(); ++i) {
    RatFunc di = e.rational().partial(space.states[i]);
    if (!di.is_zero()) acc += di * dynamics[i].rational();
  }
  return Expr::from_rational(acc);
}

inline std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

}  // namespace symdirect

#endif
