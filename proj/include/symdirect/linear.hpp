#ifndef SYMDIRECT_LINEAR_HPP
#define SYMDIRECT_LINEAR_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "expr.hpp"

namespace symdirect {

/// Coefficients of `e` as a polynomial in `vars`, keyed by monomial.
/// Everything else (parameters, coefficient symbols) stays in the
/// coefficients. e vanishes identically in vars iff every entry is zero.
inline std::map<Monomial, RatFunc, MonomialGreater> coefficients_in(const RatFunc& e,
                                                                   const std::set<std::string>& vars) {
  for (const auto& v : vars)
    if (e.den().depends_on(v)) throw NotPolynomial(v);
  std::map<Monomial, Poly, MonomialGreater> grouped;
  for (const auto& [m, c] : e.num().terms()) {
    Monomial key, rest;
    for (const auto& [v, k] : m.factors()) {
      if (vars.count(v)) key = key * Monomial::variable(v, k);
      else rest = rest * Monomial::variable(v, k);
    }
    grouped[key].add_term(rest, c);
  }
  std::map<Monomial, RatFunc, MonomialGreater> out;
  for (auto& [k, p] : grouped)
    if (!p.is_zero()) out.emplace(k, RatFunc(std::move(p), e.den()));
  return out;
}

/// Result of solving equations (each "== 0") linear in a set of unknowns.
struct LinearSolution {
  std::vector<std::string> unknowns;
  std::size_t rank = 0;
  /// Unknowns left undetermined; they appear symbolically in `values`.
  std::vector<std::string> free;
  /// Every unknown expressed through the free ones.
  std::map<std::string, Expr> values;
  /// Left-over conditions not involving any unknown; each must vanish.
  /// Empty iff the system is consistent over the coefficient field.
  std::vector<Expr> conditions;

  bool consistent() const noexcept { return conditions.empty(); }
};

namespace detail {

struct LinearRow {
  std::vector<RatFunc> coeffs;
  RatFunc rhs;
};

inline LinearRow linear_row(const RatFunc& eq, const std::vector<std::string>& unknowns) {
  const std::set<std::string> names(unknowns.begin(), unknowns.end());
  for (const auto& v : unknowns)
    if (eq.den().depends_on(v)) throw Unsupported("equation is not linear in '" + v + "'");
  if (eq.num().degree_in(names) > 1) throw Unsupported("equation is not linear in the unknowns");
  LinearRow row;
  std::map<std::string, RatFunc> zero;
  for (const auto& v : unknowns) {
    row.coeffs.push_back(eq.coeff_in(v, 1));
    zero.emplace(v, RatFunc{});
  }
  row.rhs = -eq.substitute(zero);
  return row;
}

}  // namespace detail

/// Gauss-Jordan elimination over the field of rational functions in every
/// name that is not an unknown. Pivots are taken column by column, so
/// unknowns listed first are preferred as pivots and later ones stay free.
inline LinearSolution solve_linear(const std::vector<Expr>& equations, const std::vector<std::string>& unknowns) {
  std::vector<detail::LinearRow> rows;
  rows.reserve(equations.size());
  for (const auto& e : equations) {
    auto row = detail::linear_row(e.rational(), unknowns);
    bool empty = row.rhs.is_zero();
    for (const auto& c : row.coeffs) empty = empty && c.is_zero();
    if (!empty) rows.push_back(std::move(row));
  }

  const std::size_t n = unknowns.size();
  std::vector<int> pivot_row(n, -1);
  std::size_t r = 0;
  for (std::size_t col = 0; col < n && r < rows.size(); ++col) {
    std::size_t p = r;
    while (p < rows.size() && rows[p].coeffs[col].is_zero()) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[r], rows[p]);
    const RatFunc inv = RatFunc(1) / rows[r].coeffs[col];
    for (auto& c : rows[r].coeffs) c = c * inv;
    rows[r].rhs = rows[r].rhs * inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i].coeffs[col].is_zero()) continue;
      const RatFunc f = rows[i].coeffs[col];
      for (std::size_t j = 0; j < n; ++j)
        if (!rows[r].coeffs[j].is_zero()) rows[i].coeffs[j] -= f * rows[r].coeffs[j];
      rows[i].rhs -= f * rows[r].rhs;
    }
    pivot_row[col] = static_cast<int>(r);
    ++r;
  }

  LinearSolution out;
  out.unknowns = unknowns;
  out.rank = r;
  for (std::size_t i = r; i < rows.size(); ++i)
    if (!rows[i].rhs.is_zero()) out.conditions.push_back(Expr::from_rational(rows[i].rhs));
  for (std::size_t col = 0; col < n; ++col)
    if (pivot_row[col] < 0) {
      out.free.push_back(unknowns[col]);
      out.values.emplace(unknowns[col], Expr::symbol(unknowns[col]));
    }
  for (std::size_t col = 0; col < n; ++col) {
    if (pivot_row[col] < 0) continue;
    const auto& row = rows[pivot_row[col]];
    RatFunc v = row.rhs;
    for (std::size_t j = 0; j < n; ++j)
      if (j != col && !row.coeffs[j].is_zero()) v -= row.coeffs[j] * RatFunc::variable(unknowns[j]);
    out.values.emplace(unknowns[col], Expr::from_rational(v));
  }
  return out;
}

}  // namespace symdirect

#endif
