#pragma once

/* Infix grammar:
 *
 *   equation := expr ( "=" expr )?
 *   expr     := term ( ("+" | "-") term )*
 *   term     := factor ( ("*" | "/") factor )*
 *   factor   := "-" factor | base ( "^" int )?
 *   base     := number | ident | "u" | "u(x,t)" | "[?]" | deriv
 *             | "(" expr ")" suffix? | func "(" expr ")"
 *   deriv    := "u_" ("t"+ | "x"+)
 *   suffix   := "_" ("t"+ | "x"+)
 *   func     := "sin" | "cos"
 *   ident    := "x" | "t" | "y" | "z" | "x_" digits
 *
 * Chains of "*" are nested to the right (a*b*c = a*(b*c)); "+", "-" and "/"
 * associate to the left.
 */

#include <cctype>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pdesym/error.hpp"
#include "pdesym/expr.hpp"

namespace pdesym {

namespace detail {

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

/// Parses "t", "tt", "x", "xxx"...; returns false on mixed or empty letters.
inline bool parse_diff_suffix(std::string_view s, DiffVar& var, int& order) {
  if (s.empty() || (s[0] != 'x' && s[0] != 't')) return false;
  for (char c : s)
    if (c != s[0]) return false;
  var = s[0] == 'x' ? DiffVar::X : DiffVar::T;
  order = static_cast<int>(s.size());
  return true;
}

inline bool is_generic_var(std::string_view s) {
  if (s == "x" || s == "t" || s == "y" || s == "z") return true;
  if (s.size() < 3 || s.substr(0, 2) != "x_") return false;
  for (char c : s.substr(2))
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Equation equation() {
    Expr lhs = expr();
    skip_ws();
    if (peek() == '=') {
      ++pos_;
      Expr rhs = expr();
      expect_end();
      bool zero_rhs = rhs.is(NodeKind::Const) && rhs.value() == 0.0;
      return {zero_rhs ? lhs : sub(lhs, rhs)};
    }
    expect_end();
    return {lhs};
  }

  Expr expression() {
    Expr e = expr();
    expect_end();
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw Error(ErrorKind::Syntax, msg + " at offset " + std::to_string(at), at);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  void expect_end() {
    if (peek() != '\0') fail(std::string("unexpected '") + src_[pos_] + "'", pos_);
  }

  Expr expr() {
    Expr acc = term();
    for (;;) {
      char c = peek();
      if (c != '+' && c != '-') return acc;
      ++pos_;
      Expr rhs = term();
      acc = c == '+' ? add(acc, rhs) : sub(acc, rhs);
    }
  }

  // A maximal run f1*f2*...*fn, nested to the right.
  Expr product_run() {
    std::vector<Expr> run{factor()};
    while (peek() == '*') {
      ++pos_;
      run.push_back(factor());
    }
    Expr acc = run.back();
    for (auto it = run.rbegin() + 1; it != run.rend(); ++it) acc = mul(*it, acc);
    return acc;
  }

  Expr term() {
    Expr acc = product_run();
    while (peek() == '/') {
      ++pos_;
      acc = div(acc, factor());
      if (peek() == '*') {
        ++pos_;
        acc = mul(acc, product_run());
      }
    }
    return acc;
  }

  Expr factor() {
    if (peek() == '-') {
      ++pos_;
      std::size_t save = pos_;
      skip_ws();
      if (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
        Expr n = number();
        if (peek() != '^') return Expr::constant(-n.value());
        pos_ = save;
      } else {
        pos_ = save;
      }
      return neg(factor());
    }
    Expr b = base();
    if (peek() == '^') {
      ++pos_;
      b = Expr::binary(BinaryOp::Pow, b, exponent());
    }
    return b;
  }

  Expr exponent() {
    if (peek() == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      if (e.is(NodeKind::Const) && e.value() == static_cast<double>(static_cast<std::int64_t>(e.value())))
        return Expr::integer(static_cast<std::int64_t>(e.value()));
      return e;
    }
    std::size_t start = pos_;
    bool negative = false;
    if (peek() == '-') {
      negative = true;
      ++pos_;
    }
    skip_ws();
    std::size_t digits = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (digits == pos_) fail("expected integer exponent", start);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(src_.data() + digits, src_.data() + pos_, v);
    if (ec != std::errc{}) fail("exponent out of range", digits);
    return Expr::integer(negative ? -v : v);
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc{} || p != src_.data() + pos_) fail("malformed number", start);
    return Expr::constant(v);
  }

  Expr base() {
    char c = peek();
    std::size_t start = pos_;
    if (c == '\0') fail("unexpected end of input", pos_);
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      Expr inner = expr();
      expect(')');
      // "(f(u))_x" style derivative suffix; no whitespace allowed before '_'.
      if (pos_ < src_.size() && src_[pos_] == '_') {
        std::size_t s = ++pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        DiffVar v{};
        int order = 0;
        if (!parse_diff_suffix(src_.substr(s, pos_ - s), v, order))
          fail("bad derivative suffix", s);
        return d(inner, v, order);
      }
      return inner;
    }
    if (c == '[') {
      if (src_.substr(pos_, 3) != "[?]") fail("expected '[?]'", pos_);
      pos_ += 3;
      return Expr::placeholder();
    }
    if (!is_ident_start(c)) fail(std::string("unexpected '") + c + "'", pos_);
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    std::string_view id = src_.substr(start, pos_ - start);
    if (id == "sin" || id == "cos") {
      expect('(');
      Expr arg = expr();
      expect(')');
      return id == "sin" ? sin(arg) : cos(arg);
    }
    if (id == "u") {
      if (peek() == '(') {
        // u(x,t)
        std::size_t save = pos_;
        ++pos_;
        bool ok = peek() == 'x' && (++pos_, peek() == ',') && (++pos_, peek() == 't') && (++pos_, peek() == ')');
        if (!ok) fail("expected u(x,t)", save);
        ++pos_;
      }
      return field();
    }
    if (id.substr(0, 2) == "u_") {
      DiffVar v{};
      int order = 0;
      if (!parse_diff_suffix(id.substr(2), v, order))
        throw Error(ErrorKind::UnknownSymbol, "unknown symbol '" + std::string(id) + "'", start);
      return d(field(), v, order);
    }
    if (is_generic_var(id)) return var(std::string(id));
    throw Error(ErrorKind::UnknownSymbol, "unknown symbol '" + std::string(id) + "'", start);
  }
};

}  // namespace detail

/// Parses "lhs = rhs" (or a bare expression) into residual form lhs - rhs.
/// A literal zero right-hand side is dropped rather than subtracted.
inline Equation parse_equation(std::string_view src) { return detail::Parser(src).equation(); }

/// Parses an expression; "=" is a syntax error.
inline Expr parse_expr(std::string_view src) { return detail::Parser(src).expression(); }

/// Inserts explicit "*" where the source uses juxtaposition, e.g.
/// "0.955 cos(u)u_x" becomes "0.955*cos(u)*u_x".
inline std::string insert_implicit_mul(std::string_view src) {
  enum class Last { None, Operand, Func };
  std::string out;
  Last last = Last::None;
  std::size_t i = 0;
  auto emit_mul_if = [&](bool cond) {
    if (cond) out += '*';
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      out += c;
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      emit_mul_if(last == Last::Operand);
      std::size_t s = i;
      while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.')) ++i;
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E') && i + 1 < src.size() &&
          (std::isdigit(static_cast<unsigned char>(src[i + 1])) ||
           ((src[i + 1] == '-' || src[i + 1] == '+') && i + 2 < src.size() &&
            std::isdigit(static_cast<unsigned char>(src[i + 2]))))) {
        i += 2;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      out.append(src.substr(s, i - s));
      last = Last::Operand;
      continue;
    }
    if (detail::is_ident_start(c)) {
      emit_mul_if(last == Last::Operand);
      std::size_t s = i;
      while (i < src.size() && detail::is_ident_char(src[i])) ++i;
      std::string_view id = src.substr(s, i - s);
      out.append(id);
      if (id == "u" && src.substr(i, 5) == "(x,t)") {
        out.append("(x,t)");
        i += 5;
      }
      last = (id == "sin" || id == "cos") ? Last::Func : Last::Operand;
      continue;
    }
    if (c == '[' && src.substr(i, 3) == "[?]") {
      emit_mul_if(last == Last::Operand);
      out.append("[?]");
      i += 3;
      last = Last::Operand;
      continue;
    }
    if (c == '(') {
      emit_mul_if(last == Last::Operand);
      out += c;
      ++i;
      last = Last::None;
      continue;
    }
    if (c == ')') {
      out += c;
      ++i;
      // derivative suffix stays attached
      if (i < src.size() && src[i] == '_') {
        std::size_t s = i++;
        while (i < src.size() && detail::is_ident_char(src[i])) ++i;
        out.append(src.substr(s, i - s));
      }
      last = Last::Operand;
      continue;
    }
    if (c == '^') {
      // exponent: copy sign and digits verbatim
      out += c;
      ++i;
      while (i < src.size() && std::isspace(static_cast<unsigned char>(src[i]))) out += src[i++];
      if (i < src.size() && src[i] == '-') out += src[i++];
      bool digits = false;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
        out += src[i++];
        digits = true;
      }
      last = digits ? Last::Operand : Last::None;
      continue;
    }
    out += c;
    ++i;
    last = Last::None;
  }
  return out;
}

}  // namespace pdesym
