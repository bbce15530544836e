#ifndef SYMDIRECT_RATFUNC_HPP
#define SYMDIRECT_RATFUNC_HPP

#include <map>
#include <string>

#include "poly.hpp"

namespace symdirect {

/// Quotient of polynomials in lowest terms. The denominator is monic
/// (leading coefficient 1 in graded-lex order), which makes the
/// representation unique.
class RatFunc {
 public:
  RatFunc() : den_(1) {}
  explicit RatFunc(const Rational& c) : num_(c), den_(1) {}
  explicit RatFunc(long c) : num_(c), den_(1) {}
  explicit RatFunc(Poly p) : num_(std::move(p)), den_(1) {}
  RatFunc(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }

  static RatFunc variable(const std::string& name) { return RatFunc(Poly::variable(name)); }

  const Poly& num() const noexcept { return num_; }
  const Poly& den() const noexcept { return den_; }

  bool is_zero() const noexcept { return num_.is_zero(); }
  bool is_polynomial() const noexcept { return den_.is_constant(); }
  bool is_constant() const noexcept { return num_.is_constant() && den_.is_constant(); }
  Rational constant_value() const { return num_.constant_term() / den_.constant_term(); }

  bool depends_on(const std::string& name) const { return num_.depends_on(name) || den_.depends_on(name); }
  std::set<std::string> variables() const {
    auto v = num_.variables();
    auto d = den_.variables();
    v.insert(d.begin(), d.end());
    return v;
  }

  /// Degree in `name`; the denominator must be free of it.
  int degree_in(const std::string& name) const {
    if (den_.depends_on(name)) throw NotPolynomial(name);
    return num_.degree_in(name);
  }
  RatFunc coeff_in(const std::string& name, int k) const {
    if (den_.depends_on(name)) throw NotPolynomial(name);
    return RatFunc(num_.coeff_in(name, k), den_);
  }

  RatFunc partial(const std::string& name) const {
    if (!den_.depends_on(name)) return RatFunc(num_.partial(name), den_);
    return RatFunc(num_.partial(name) * den_ - num_ * den_.partial(name), den_ * den_);
  }

  /// Antiderivative in `name` (zero constant); requires polynomial dependence.
  RatFunc integrate(const std::string& name) const {
    if (den_.depends_on(name)) throw NotPolynomial(name);
    return RatFunc(num_.integrate(name), den_);
  }

  RatFunc& operator+=(const RatFunc& o) { return *this = *this + o; }
  RatFunc& operator-=(const RatFunc& o) { return *this = *this - o; }
  RatFunc& operator*=(const RatFunc& o) { return *this = *this * o; }
  RatFunc& operator/=(const RatFunc& o) { return *this = *this / o; }

  friend RatFunc operator+(const RatFunc& a, const RatFunc& b) {
    if (a.den_ == b.den_) return RatFunc(a.num_ + b.num_, a.den_);
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const Poly g = gcd(a.den_, b.den_);
    const Poly da = *exact_divide(a.den_, g);
    const Poly db = *exact_divide(b.den_, g);
    return RatFunc(a.num_ * db + b.num_ * da, a.den_ * db);
  }
  friend RatFunc operator-(const RatFunc& a) {
    RatFunc r = a;
    r.num_ = -r.num_;
    return r;
  }
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b) { return a + (-b); }
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b) {
    if (a.is_zero() || b.is_zero()) return RatFunc{};
    if (a.is_polynomial() && b.is_polynomial()) return RatFunc(a.num_ * b.num_);
    // Cross-cancel before multiplying to keep intermediate sizes small.
    const Poly g1 = gcd(a.num_, b.den_);
    const Poly g2 = gcd(b.num_, a.den_);
    return RatFunc(*exact_divide(a.num_, g1) * *exact_divide(b.num_, g2),
                   *exact_divide(a.den_, g2) * *exact_divide(b.den_, g1));
  }
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b) {
    if (b.is_zero()) throw EvalError("division by zero");
    RatFunc inv;
    inv.num_ = b.den_;
    inv.den_ = b.num_;
    inv.fix_sign();
    return a * inv;
  }
  friend bool operator==(const RatFunc& a, const RatFunc& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend bool operator!=(const RatFunc& a, const RatFunc& b) { return !(a == b); }

  RatFunc pow(int exponent) const {
    if (exponent < 0) return RatFunc(1) / pow(-exponent);
    RatFunc r;
    r.num_ = num_.pow(static_cast<unsigned>(exponent));
    r.den_ = den_.pow(static_cast<unsigned>(exponent));
    return r;
  }

  /// Simultaneous substitution of names by rational functions.
  RatFunc substitute(const std::map<std::string, RatFunc>& bindings) const {
    return substitute_poly(num_, bindings) / substitute_poly(den_, bindings);
  }

  double eval(const std::function<double(const std::string&)>& value_of) const {
    const double d = den_.eval(value_of);
    if (d == 0.0) throw EvalError("division by zero");
    return num_.eval(value_of) / d;
  }

  std::string to_string() const {
    if (den_.is_constant()) return num_.to_string();
    std::string n = num_.terms().size() == 1 ? num_.to_string() : "(" + num_.to_string() + ")";
    if (num_.terms().size() == 1 && num_.leading_coefficient() < 0) n = "(" + num_.to_string() + ")";
    const auto& dt = den_.terms();
    const bool bare = dt.size() == 1 && dt.begin()->second == 1 && dt.begin()->first.factors().size() == 1;
    return n + "/" + (bare ? den_.to_string() : "(" + den_.to_string() + ")");
  }

 private:
  static RatFunc substitute_poly(const Poly& p, const std::map<std::string, RatFunc>& bindings) {
    RatFunc acc;
    std::map<std::pair<std::string, int>, RatFunc> powers;
    for (const auto& [m, c] : p.terms()) {
      Poly direct = Poly::term(Monomial{}, c);
      RatFunc term(direct);
      Monomial kept;
      for (const auto& [v, e] : m.factors()) {
        auto it = bindings.find(v);
        if (it == bindings.end()) {
          kept = kept * Monomial::variable(v, e);
          continue;
        }
        auto key = std::make_pair(v, e);
        auto pit = powers.find(key);
        if (pit == powers.end()) pit = powers.emplace(key, it->second.pow(e)).first;
        term = term * pit->second;
      }
      acc += term * RatFunc(Poly::term(kept, Rational(1)));
    }
    return acc;
  }

  void fix_sign() {
    if (num_.is_zero()) throw EvalError("division by zero");
    if (den_.is_zero()) throw EvalError("division by zero");
    normalize();
  }

  void normalize() {
    if (den_.is_zero()) throw EvalError("division by zero");
    if (num_.is_zero()) {
      den_ = Poly(1);
      return;
    }
    if (!den_.is_constant()) {
      const Poly g = gcd(num_, den_);
      if (!g.is_constant()) {
        num_ = *exact_divide(num_, g);
        den_ = *exact_divide(den_, g);
      }
    }
    const Rational lc = den_.leading_coefficient();
    if (lc != 1) {
      const Rational inv = Rational(1) / lc;
      num_ *= inv;
      den_ *= inv;
    }
  }

  Poly num_;
  Poly den_;
};

}  // namespace symdirect

#endif
