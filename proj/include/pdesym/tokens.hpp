#pragma once

// Prefix (Polish) token sequences in two dialects.
//
// ManualOrder serializes the tree exactly as stored, with the shorthand
// derivative tokens u_t, u_x, u_xx, u_xxx:
//     cos(1.5*x_1) + (x_2^2 - 2.6)   ->   + cos × 1.5 x_1 − pow x_2 2 2.6
//
// Canonical serializes the canonical form. Each top-level term carries an
// explicit coefficient and derivatives use a bracketed group:
//     u*u_x + u_t   ->   + × 1 × u(x,t) ∂ ( u(x,t) , x ) × 1 ∂ ( u(x,t) , t )
//     u_xxx         ->   × 1 ∂ ( u(x,t) , ( x , 3 ) )

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdesym/canon.hpp"
#include "pdesym/error.hpp"
#include "pdesym/expr.hpp"
#include "pdesym/parse.hpp"

namespace pdesym {

enum class Dialect { ManualOrder, Canonical };

constexpr std::string_view to_string(Dialect d) {
  return d == Dialect::ManualOrder ? "manual" : "canonical";
}

struct TokenSeq {
  Dialect dialect = Dialect::Canonical;
  std::vector<std::string> tokens;

  /// Space-separated rendering.
  std::string str() const {
    std::string s;
    for (const auto& t : tokens) {
      if (!s.empty()) s += ' ';
      s += t;
    }
    return s;
  }

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

namespace tok {
inline constexpr std::string_view kAdd = "+";
inline constexpr std::string_view kSub = "−";
inline constexpr std::string_view kMul = "×";
inline constexpr std::string_view kDiv = "÷";
inline constexpr std::string_view kPow = "pow";
inline constexpr std::string_view kSin = "sin";
inline constexpr std::string_view kCos = "cos";
inline constexpr std::string_view kNeg = "neg";
inline constexpr std::string_view kPartial = "∂";
inline constexpr std::string_view kLParen = "(";
inline constexpr std::string_view kRParen = ")";
inline constexpr std::string_view kComma = ",";
inline constexpr std::string_view kField = "u(x,t)";
inline constexpr std::string_view kBareField = "u";
inline constexpr std::string_view kPlaceholder = "[?]";
}  // namespace tok

enum class TokenClass {
  Add, Sub, Mul, Div, Pow, Sin, Cos, Neg,
  Partial, LParen, RParen, Comma,
  Field, BareField, Shorthand, Var, Number, Placeholder,
};

namespace detail {

inline bool is_number_token(std::string_view s) {
  if (s.empty() || s.front() == '+') return false;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && p == s.data() + s.size() && std::isfinite(v);
}

inline bool is_var_token(std::string_view s) { return is_generic_var(s); }

}  // namespace detail

/// Classifies a token; nullopt if it is outside the vocabulary. ASCII
/// spellings (- * /) and names (add, sub, mul, div) are accepted as aliases.
inline std::optional<TokenClass> classify_token(std::string_view s) {
  using TC = TokenClass;
  if (s == tok::kAdd || s == "add") return TC::Add;
  if (s == tok::kSub || s == "-" || s == "sub") return TC::Sub;
  if (s == tok::kMul || s == "*" || s == "mul") return TC::Mul;
  if (s == tok::kDiv || s == "/" || s == "div") return TC::Div;
  if (s == tok::kPow) return TC::Pow;
  if (s == tok::kSin) return TC::Sin;
  if (s == tok::kCos) return TC::Cos;
  if (s == tok::kNeg) return TC::Neg;
  if (s == tok::kPartial) return TC::Partial;
  if (s == tok::kLParen) return TC::LParen;
  if (s == tok::kRParen) return TC::RParen;
  if (s == tok::kComma) return TC::Comma;
  if (s == tok::kField) return TC::Field;
  if (s == tok::kBareField) return TC::BareField;
  if (s == "u_t" || s == "u_x" || s == "u_xx" || s == "u_xxx") return TC::Shorthand;
  if (s == tok::kPlaceholder) return TC::Placeholder;
  if (detail::is_var_token(s)) return TC::Var;
  if (detail::is_number_token(s)) return TC::Number;
  return std::nullopt;
}

/// True if `s` is a number token with at most three significant digits.
inline bool has_at_most_3_sig_digits(std::string_view s) {
  if (!detail::is_number_token(s)) return false;
  std::string_view mant = s.substr(0, s.find_first_of("eE"));
  int digits = 0;
  bool leading = true;
  for (char c : mant) {
    if (c < '0' || c > '9') continue;
    if (leading && c == '0') continue;
    leading = false;
    ++digits;
  }
  return digits <= 3;
}

namespace detail {

inline std::string_view op_token(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return tok::kAdd;
    case BinaryOp::Sub: return tok::kSub;
    case BinaryOp::Mul: return tok::kMul;
    case BinaryOp::Div: return tok::kDiv;
    case BinaryOp::Pow: return tok::kPow;
  }
  return "?";
}

inline void emit_leaf(const Expr& e, std::vector<std::string>& out) {
  switch (e.kind()) {
    case NodeKind::Const: out.push_back(format_sig3(e.value())); break;
    case NodeKind::Int: out.push_back(std::to_string(e.int_value())); break;
    case NodeKind::Var: out.push_back(e.name()); break;
    case NodeKind::Placeholder: out.emplace_back(tok::kPlaceholder); break;
    default: break;
  }
}

inline void emit_manual(const Expr& e, std::vector<std::string>& out) {
  switch (e.kind()) {
    case NodeKind::Field: out.emplace_back(tok::kBareField); return;
    case NodeKind::Unary:
      out.emplace_back(to_string(e.fn()));
      emit_manual(e.child(), out);
      return;
    case NodeKind::Binary:
      out.emplace_back(op_token(e.op()));
      emit_manual(e.lhs(), out);
      emit_manual(e.rhs(), out);
      return;
    case NodeKind::Deriv: {
      bool ok = e.child().is(NodeKind::Field) &&
                (e.diff_var() == DiffVar::X ? e.order() <= 3 : e.order() == 1);
      if (!ok)
        throw Error(ErrorKind::UnsupportedNode,
                    "derivative has no shorthand token (supported: u_t, u_x, u_xx, u_xxx)");
      out.push_back("u_" + std::string(static_cast<std::size_t>(e.order()), to_char(e.diff_var())));
      return;
    }
    default: emit_leaf(e, out);
  }
}

inline void emit_canonical(const Expr& e, std::vector<std::string>& out) {
  switch (e.kind()) {
    case NodeKind::Field: out.emplace_back(tok::kField); return;
    case NodeKind::Unary:
      out.emplace_back(to_string(e.fn()));
      emit_canonical(e.child(), out);
      return;
    case NodeKind::Binary:
      out.emplace_back(op_token(e.op()));
      emit_canonical(e.lhs(), out);
      emit_canonical(e.rhs(), out);
      return;
    case NodeKind::Deriv: {
      if (!e.child().is(NodeKind::Field))
        throw Error(ErrorKind::UnsupportedNode, "derivative of a compound expression in canonical form");
      std::string v(1, to_char(e.diff_var()));
      out.emplace_back(tok::kPartial);
      out.emplace_back(tok::kLParen);
      out.emplace_back(tok::kField);
      out.emplace_back(tok::kComma);
      if (e.order() == 1) {
        out.push_back(v);
      } else {
        out.emplace_back(tok::kLParen);
        out.push_back(v);
        out.emplace_back(tok::kComma);
        out.push_back(std::to_string(e.order()));
        out.emplace_back(tok::kRParen);
      }
      out.emplace_back(tok::kRParen);
      return;
    }
    default: emit_leaf(e, out);
  }
}

// Top-level terms get an explicit coefficient; a term whose coefficient is
// an implicit 1 is emitted as × 1 <term>.
inline void emit_canonical_top(const Expr& e, std::vector<std::string>& out) {
  if (e.is_binary(BinaryOp::Add)) {
    out.emplace_back(tok::kAdd);
    emit_canonical_top(e.lhs(), out);
    emit_canonical_top(e.rhs(), out);
    return;
  }
  TermParts parts = split_term(e);
  if (!parts.coefficient) {
    out.emplace_back(tok::kMul);
    out.emplace_back("1");
  }
  emit_canonical(e, out);
}

class Decoder {
 public:
  Decoder(const TokenSeq& ts) : ts_(ts) {}

  Expr run() {
    Expr e = node(false);
    if (pos_ != ts_.tokens.size()) fail("trailing tokens");
    if (ts_.dialect == Dialect::Canonical) e = strip_unit_coefficients(e);
    return e;
  }

 private:
  const TokenSeq& ts_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Decode, msg + " at token " + std::to_string(pos_), pos_);
  }

  const std::string& next() {
    if (pos_ >= ts_.tokens.size()) fail("truncated sequence");
    return ts_.tokens[pos_++];
  }

  TokenClass next_class(const std::string& t) {
    auto c = classify_token(t);
    if (!c) fail("out-of-vocabulary token '" + t + "'");
    return *c;
  }

  void expect(TokenClass want, std::string_view what) {
    const std::string& t = next();
    if (classify_token(t) != want) fail("expected '" + std::string(what) + "', got '" + t + "'");
  }

  bool manual() const { return ts_.dialect == Dialect::ManualOrder; }

  Expr number(const std::string& t, bool exponent) {
    double v = 0.0;
    std::from_chars(t.data(), t.data() + t.size(), v);
    if (exponent) {
      if (v != std::trunc(v) || std::abs(v) > 1e9) fail("non-integer exponent '" + t + "'");
      return Expr::integer(static_cast<std::int64_t>(v));
    }
    return Expr::constant(v);
  }

  Expr node(bool exponent) {
    const std::string& t = next();
    TokenClass c = next_class(t);
    switch (c) {
      case TokenClass::Add:
      case TokenClass::Sub:
      case TokenClass::Mul:
      case TokenClass::Div: {
        Expr l = node(false);
        Expr r = node(false);
        BinaryOp op = c == TokenClass::Add   ? BinaryOp::Add
                      : c == TokenClass::Sub ? BinaryOp::Sub
                      : c == TokenClass::Mul ? BinaryOp::Mul
                                             : BinaryOp::Div;
        return Expr::binary(op, l, r);
      }
      case TokenClass::Pow: {
        Expr b = node(false);
        Expr n = node(true);
        return Expr::binary(BinaryOp::Pow, b, n);
      }
      case TokenClass::Sin: return Expr::unary(UnaryFn::Sin, node(false));
      case TokenClass::Cos: return Expr::unary(UnaryFn::Cos, node(false));
      case TokenClass::Neg: return Expr::unary(UnaryFn::Neg, node(false));
      case TokenClass::Number: return number(t, exponent);
      case TokenClass::Var: return Expr::var(t);
      case TokenClass::Placeholder: return Expr::placeholder();
      case TokenClass::BareField:
        if (!manual()) fail("bare 'u' is not a canonical token");
        return Expr::field();
      case TokenClass::Field:
        if (manual()) fail("'u(x,t)' is not a manual-order token");
        return Expr::field();
      case TokenClass::Shorthand: {
        if (!manual()) fail("shorthand derivative '" + t + "' is not a canonical token");
        if (t == "u_t") return Expr::deriv(Expr::field(), DiffVar::T, 1);
        return Expr::deriv(Expr::field(), DiffVar::X, static_cast<int>(t.size() - 2));
      }
      case TokenClass::Partial: {
        if (manual()) fail("'∂' is not a manual-order token");
        expect(TokenClass::LParen, "(");
        expect(TokenClass::Field, "u(x,t)");
        expect(TokenClass::Comma, ",");
        const std::string& v = next();
        int order = 1;
        std::string var = v;
        if (classify_token(v) == TokenClass::LParen) {
          var = next();
          expect(TokenClass::Comma, ",");
          const std::string& n = next();
          if (next_class(n) != TokenClass::Number) fail("expected derivative order");
          Expr o = number(n, true);
          if (o.int_value() < 1 || o.int_value() > 64) fail("bad derivative order");
          order = static_cast<int>(o.int_value());
          expect(TokenClass::RParen, ")");
        }
        if (var != "x" && var != "t") fail("expected x or t in derivative");
        expect(TokenClass::RParen, ")");
        return Expr::deriv(Expr::field(), var == "x" ? DiffVar::X : DiffVar::T, order);
      }
      case TokenClass::LParen:
      case TokenClass::RParen:
      case TokenClass::Comma: fail("unexpected bracket token '" + t + "'");
    }
    fail("unexpected token");
  }

  static Expr strip_unit_coefficients(const Expr& e) {
    if (e.is_binary(BinaryOp::Add))
      return Expr::binary(BinaryOp::Add, strip_unit_coefficients(e.lhs()), strip_unit_coefficients(e.rhs()));
    if (e.is_binary(BinaryOp::Mul) && e.lhs().is(NodeKind::Const) && e.lhs().value() == 1.0) return e.rhs();
    return e;
  }
};

}  // namespace detail

inline TokenSeq to_manual_tokens(const Expr& e) {
  TokenSeq ts{Dialect::ManualOrder, {}};
  detail::emit_manual(e, ts.tokens);
  return ts;
}
inline TokenSeq to_manual_tokens(const Equation& eq) { return to_manual_tokens(eq.residual); }

/// Canonicalizes, then serializes.
inline TokenSeq to_canonical_tokens(const Expr& e) {
  TokenSeq ts{Dialect::Canonical, {}};
  detail::emit_canonical_top(canonicalize(e), ts.tokens);
  return ts;
}
inline TokenSeq to_canonical_tokens(const Equation& eq) { return to_canonical_tokens(eq.residual); }

inline TokenSeq to_tokens(const Equation& eq, Dialect d) {
  return d == Dialect::ManualOrder ? to_manual_tokens(eq) : to_canonical_tokens(eq);
}

/// Throws DecodeError on malformed input.
inline Equation from_tokens(const TokenSeq& ts) { return {detail::Decoder(ts).run()}; }

/// Splits a whitespace-separated token string.
inline TokenSeq tokenize(std::string_view s, Dialect d) {
  TokenSeq ts{d, {}};
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !space(s[j])) ++j;
    if (j > i) ts.tokens.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return ts;
}

}  // namespace pdesym
