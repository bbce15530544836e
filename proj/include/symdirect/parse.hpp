#ifndef SYMDIRECT_PARSE_HPP
#define SYMDIRECT_PARSE_HPP

#include <cctype>
#include <string>
#include <string_view>

#include "expr.hpp"

namespace symdirect {

/// Exact value of a decimal literal such as "12", "-0.25" or "3.".
inline Rational parse_decimal(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
  std::string digits;
  int frac = 0;
  bool seen_point = false;
  bool any = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
      any = true;
      if (seen_point) ++frac;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      throw ParseError("malformed number '" + std::string(text) + "'", i);
    }
  }
  if (!any) throw ParseError("malformed number '" + std::string(text) + "'", 0);
  mpz_class n(digits, 10);
  mpz_class d = 1;
  for (int k = 0; k < frac; ++k) d *= 10;
  Rational q(negative ? mpz_class(-n) : n, d);
  q.canonicalize();
  return q;
}

namespace detail {

class ExprParser {
 public:
  ExprParser(std::string_view text, const VarSpace* space) : text_(text), space_(space) {}

  Expr run() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  Expr expr() {
    std::vector<Expr> terms{term()};
    for (;;) {
      if (peek('+')) {
        ++pos_;
        terms.push_back(term());
      } else if (peek('-')) {
        ++pos_;
        terms.push_back(Expr::negate(term()));
      } else {
        break;
      }
    }
    return Expr::sum(std::move(terms));
  }

  Expr term() {
    Expr acc = factor();
    for (;;) {
      if (peek('*')) {
        ++pos_;
        acc = Expr::product({acc, factor()});
      } else if (peek('/')) {
        ++pos_;
        acc = Expr::quotient(acc, factor());
      } else {
        return acc;
      }
    }
  }

  Expr factor() {
    skip_ws();
    if (peek('-')) {
      ++pos_;
      return Expr::negate(factor());
    }
    Expr b = base();
    if (peek('^')) {
      ++pos_;
      skip_ws();
      const std::size_t start = pos_;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
      const std::size_t digits = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == digits) throw ParseError("expected integer exponent", start);
      return Expr::power(b, std::stoi(std::string(text_.substr(start, pos_ - start))));
    }
    return b;
  }

  Expr base() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!peek(')')) throw ParseError("expected ')'", pos_);
      ++pos_;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
        ++pos_;
      return Expr(parse_decimal(text_.substr(start, pos_ - start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      if (space_ && !space_->declared(name)) throw UnknownIdentifier(name);
      return Expr::symbol(name);
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  std::string_view text_;
  const VarSpace* space_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse `text`; every identifier must be declared in `space`.
inline Expr parse(std::string_view text, const VarSpace& space) { return detail::ExprParser(text, &space).run(); }

/// Parse without identifier checks (tests, internal tables).
inline Expr parse_unchecked(std::string_view text) { return detail::ExprParser(text, nullptr).run(); }

}  // namespace symdirect

#endif
