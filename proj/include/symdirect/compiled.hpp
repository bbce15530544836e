#ifndef SYMDIRECT_COMPILED_HPP
#define SYMDIRECT_COMPILED_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "expr.hpp"

namespace symdirect {

/// Canonical form flattened for repeated double evaluation: each name is
/// bound to a slot of the input vector at compile time.
class CompiledExpr {
 public:
  CompiledExpr() = default;

  CompiledExpr(const Expr& e, const std::vector<std::string>& slots) {
    const RatFunc& r = e.rational();
    num_ = flatten(r.num(), slots);
    if (!r.den().is_constant()) den_ = flatten(r.den(), slots);
    else scale_ = 1.0 / r.den().constant_term().get_d();
  }

  double operator()(std::span<const double> values) const {
    const double n = sum(num_, values);
    if (den_.empty()) return n * scale_;
    const double d = sum(den_, values);
    if (d == 0.0) throw EvalError("division by zero");
    return n / d;
  }

  bool is_zero() const noexcept { return num_.empty(); }

 private:
  struct Term {
    double coefficient;
    std::vector<std::pair<std::size_t, int>> powers;
  };

  static std::vector<Term> flatten(const Poly& p, const std::vector<std::string>& slots) {
    std::vector<Term> out;
    for (const auto& [m, c] : p.terms()) {
      Term t{c.get_d(), {}};
      for (const auto& [v, e] : m.factors()) {
        std::size_t k = 0;
        while (k < slots.size() && slots[k] != v) ++k;
        if (k == slots.size()) throw EvalError("no slot for '" + v + "'");
        t.powers.emplace_back(k, e);
      }
      out.push_back(std::move(t));
    }
    return out;
  }

  static double sum(const std::vector<Term>& terms, std::span<const double> values) {
    double acc = 0.0;
    for (const auto& t : terms) {
      double v = t.coefficient;
      for (const auto& [k, e] : t.powers) {
        const double x = values[k];
        switch (e) {
          case 1:
            v *= x;
            break;
          case 2:
            v *= x * x;
            break;
          default:
            v *= std::pow(x, e);
        }
      }
      acc += v;
    }
    return acc;
  }

  std::vector<Term> num_;
  std::vector<Term> den_;
  double scale_ = 1.0;
};

}  // namespace symdirect

#endif
