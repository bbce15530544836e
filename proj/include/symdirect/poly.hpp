#ifndef SYMDIRECT_POLY_HPP
#define SYMDIRECT_POLY_HPP

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace symdirect {

using Rational = mpq_class;

/// Power product of named variables. Factors are kept sorted by name and
/// every stored exponent is positive, so equal monomials compare equal.
class Monomial {
 public:
  using Factor = std::pair<std::string, int>;

  Monomial() = default;

  static Monomial variable(const std::string& name, int exponent = 1) {
    Monomial m;
    if (exponent > 0) m.factors_.emplace_back(name, exponent);
    return m;
  }

  const std::vector<Factor>& factors() const noexcept { return factors_; }
  bool is_one() const noexcept { return factors_.empty(); }

  int total_degree() const noexcept {
    int d = 0;
    for (const auto& f : factors_) d += f.second;
    return d;
  }

  int degree_in(const std::string& name) const noexcept {
    for (const auto& f : factors_)
      if (f.first == name) return f.second;
    return 0;
  }

  /// Copy with the exponent of `name` replaced (0 removes the factor).
  Monomial with_exponent(const std::string& name, int exponent) const {
    Monomial m;
    bool placed = false;
    for (const auto& f : factors_) {
      if (!placed && name <= f.first) {
        if (exponent > 0) m.factors_.emplace_back(name, exponent);
        placed = true;
        if (f.first == name) continue;
      }
      m.factors_.push_back(f);
    }
    if (!placed && exponent > 0) m.factors_.emplace_back(name, exponent);
    return m;
  }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial m;
    m.factors_.reserve(a.factors_.size() + b.factors_.size());
    auto i = a.factors_.begin();
    auto j = b.factors_.begin();
    while (i != a.factors_.end() || j != b.factors_.end()) {
      if (j == b.factors_.end() || (i != a.factors_.end() && i->first < j->first)) {
        m.factors_.push_back(*i++);
      } else if (i == a.factors_.end() || j->first < i->first) {
        m.factors_.push_back(*j++);
      } else {
        m.factors_.emplace_back(i->first, i->second + j->second);
        ++i;
        ++j;
      }
    }
    return m;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) { return a.factors_ == b.factors_; }

 private:
  std::vector<Factor> factors_;
};

/// Graded lexicographic order, largest first. Variables compare by name.
struct MonomialGreater {
  bool operator()(const Monomial& a, const Monomial& b) const {
    const int da = a.total_degree();
    const int db = b.total_degree();
    if (da != db) return da > db;
    const auto& fa = a.factors();
    const auto& fb = b.factors();
    const std::size_t n = std::min(fa.size(), fb.size());
    for (std::size_t k = 0; k < n; ++k) {
      if (fa[k].first != fb[k].first) return fa[k].first < fb[k].first;
      if (fa[k].second != fb[k].second) return fa[k].second > fb[k].second;
    }
    return fa.size() < fb.size();
  }
};

inline std::string rational_to_string(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  return c.get_str();
}

/// Sparse multivariate polynomial with exact rational coefficients.
class Poly {
 public:
  using Terms = std::map<Monomial, Rational, MonomialGreater>;

  Poly() = default;
  explicit Poly(const Rational& c) { add_term(Monomial{}, c); }
  explicit Poly(long c) : Poly(Rational(c)) {}

  static Poly variable(const std::string& name, int exponent = 1) {
    return term(Monomial::variable(name, exponent), Rational(1));
  }
  static Poly term(const Monomial& m, const Rational& c) {
    Poly p;
    p.add_term(m, c);
    return p;
  }

  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const noexcept {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one());
  }
  Rational constant_term() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? Rational(0) : it->second;
  }
  Rational leading_coefficient() const { return terms_.empty() ? Rational(0) : terms_.begin()->second; }

  /// Largest exponent of `name`; -1 for the zero polynomial.
  int degree_in(const std::string& name) const {
    if (terms_.empty()) return -1;
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree_in(name));
    return d;
  }
  int total_degree() const {
    if (terms_.empty()) return -1;
    return terms_.begin()->first.total_degree();
  }
  /// Largest sum of exponents over the given names.
  int degree_in(const std::set<std::string>& names) const {
    if (terms_.empty()) return -1;
    int best = 0;
    for (const auto& [m, c] : terms_) {
      int d = 0;
      for (const auto& [v, e] : m.factors())
        if (names.count(v)) d += e;
      best = std::max(best, d);
    }
    return best;
  }

  /// Coefficient of name^k, as a polynomial free of `name`.
  Poly coeff_in(const std::string& name, int k) const {
    Poly out;
    for (const auto& [m, c] : terms_)
      if (m.degree_in(name) == k) out.add_term(m.with_exponent(name, 0), c);
    return out;
  }

  bool depends_on(const std::string& name) const {
    for (const auto& [m, c] : terms_)
      if (m.degree_in(name) > 0) return true;
    return false;
  }

  std::set<std::string> variables() const {
    std::set<std::string> out;
    for (const auto& [m, c] : terms_)
      for (const auto& f : m.factors()) out.insert(f.first);
    return out;
  }

  void add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Poly& operator+=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Poly& operator*=(const Rational& k) {
    if (k == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= k;
    return *this;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator-(Poly a) {
    for (auto& [m, c] : a.terms_) c = -c;
    return a;
  }
  friend Poly operator*(Poly a, const Rational& k) { return a *= k; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
    return out;
  }
  friend bool operator==(const Poly& a, const Poly& b) {
    return a.terms_.size() == b.terms_.size() && std::equal(a.terms_.begin(), a.terms_.end(), b.terms_.begin());
  }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  Poly pow(unsigned exponent) const {
    Poly result(1);
    Poly base = *this;
    while (exponent) {
      if (exponent & 1u) result = result * base;
      exponent >>= 1u;
      if (exponent) base = base * base;
    }
    return result;
  }

  Poly partial(const std::string& name) const {
    Poly out;
    for (const auto& [m, c] : terms_) {
      const int e = m.degree_in(name);
      if (e > 0) out.add_term(m.with_exponent(name, e - 1), c * e);
    }
    return out;
  }

  /// Antiderivative in `name` with zero constant of integration.
  Poly integrate(const std::string& name) const {
    Poly out;
    for (const auto& [m, c] : terms_) {
      const int e = m.degree_in(name);
      out.add_term(m.with_exponent(name, e + 1), c / Rational(e + 1));
    }
    return out;
  }

  /// Divide by the leading coefficient. Zero stays zero.
  Poly monic() const {
    if (terms_.empty()) return *this;
    Poly out = *this;
    out *= Rational(1) / leading_coefficient();
    return out;
  }

  double eval(const std::function<double(const std::string&)>& value_of) const {
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = c.get_d();
      for (const auto& [v, e] : m.factors()) t *= std::pow(value_of(v), e);
      sum += t;
    }
    return sum;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      Rational mag = abs(c);
      const bool negative = c < 0;
      if (first) {
        if (negative) out += "-";
      } else {
        out += negative ? " - " : " + ";
      }
      first = false;
      std::string body;
      if (m.is_one() || mag != 1) body = rational_to_string(mag);
      for (const auto& [v, e] : m.factors()) {
        if (!body.empty()) body += "*";
        body += v;
        if (e != 1) body += "^" + std::to_string(e);
      }
      out += body;
    }
    return out;
  }

 private:
  Terms terms_;
};

namespace detail {

inline std::string shared_variable(const Poly& a, const Poly& b) {
  const auto va = a.variables();
  for (const auto& v : b.variables())
    if (va.count(v)) return v;
  return {};
}

}  // namespace detail

/// Exact quotient a / b if b divides a, otherwise nullopt.
inline std::optional<Poly> exact_divide(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw EvalError("polynomial division by zero");
  if (a.is_zero()) return Poly{};
  if (b.is_constant()) return a * (Rational(1) / b.constant_term());
  const std::string x = *b.variables().begin();
  const int db = b.degree_in(x);
  const Poly lcb = b.coeff_in(x, db);
  Poly q;
  Poly r = a;
  while (!r.is_zero()) {
    const int dr = r.degree_in(x);
    if (dr < db) return std::nullopt;
    auto qc = exact_divide(r.coeff_in(x, dr), lcb);
    if (!qc) return std::nullopt;
    Poly t = *qc * Poly::variable(x, dr - db);
    q += t;
    r -= t * b;
  }
  return q;
}

inline Poly gcd(const Poly& a, const Poly& b);

namespace detail {

inline Poly content_in(const Poly& p, const std::string& x) {
  Poly g;
  const int d = p.degree_in(x);
  for (int k = d; k >= 0; --k) {
    Poly c = p.coeff_in(x, k);
    if (c.is_zero()) continue;
    g = gcd(g, c);
    if (g.is_constant()) break;
  }
  return g;
}

inline Poly primitive_part(const Poly& p, const std::string& x) {
  if (p.is_zero()) return p;
  Poly c = content_in(p, x);
  return *exact_divide(p, c);
}

inline Poly pseudo_remainder(const Poly& a, const Poly& b, const std::string& x) {
  const int db = b.degree_in(x);
  const Poly lcb = b.coeff_in(x, db);
  Poly r = a;
  while (!r.is_zero()) {
    const int dr = r.degree_in(x);
    if (dr < db) break;
    Poly lcr = r.coeff_in(x, dr);
    r = lcb * r - lcr * Poly::variable(x, dr - db) * b;
  }
  return r;
}

}  // namespace detail

/// Greatest common divisor, normalized to leading coefficient 1.
/// Recursive primitive PRS over Q[vars].
inline Poly gcd(const Poly& a, const Poly& b) {
  if (a.is_zero()) return b.monic();
  if (b.is_zero()) return a.monic();
  if (a.is_constant() || b.is_constant()) return Poly(1);

  const std::string x = detail::shared_variable(a, b);
  if (x.empty()) {
    // A variable present in only one argument cannot divide the other.
    const std::string y = *a.variables().begin();
    return gcd(detail::content_in(a, y), b);
  }
  const Poly ca = detail::content_in(a, x);
  const Poly cb = detail::content_in(b, x);
  const Poly c = gcd(ca, cb);
  Poly A = *exact_divide(a, ca);
  Poly B = *exact_divide(b, cb);
  if (A.degree_in(x) < B.degree_in(x)) std::swap(A, B);
  Poly g;
  for (;;) {
    Poly r = detail::pseudo_remainder(A, B, x);
    if (r.is_zero()) {
      g = B;
      break;
    }
    r = detail::primitive_part(r, x);
    if (r.degree_in(x) == 0) {
      g = Poly(1);
      break;
    }
    A = std::move(B);
    B = std::move(r);
  }
  return (c * detail::primitive_part(g, x)).monic();
}

}  // namespace symdirect

#endif
