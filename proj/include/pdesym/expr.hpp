#pragma once

// Immutable expression trees for time-dependent PDE residuals.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "pdesym/error.hpp"

namespace pdesym {

enum class NodeKind : std::uint8_t { Const, Int, Var, Field, Placeholder, Unary, Binary, Deriv };
enum class UnaryFn : std::uint8_t { Sin, Cos, Neg };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };
/// Differentiation variable. `T` is declared first so it sorts first.
enum class DiffVar : std::uint8_t { T, X };

constexpr std::string_view to_string(UnaryFn f) {
  switch (f) {
    case UnaryFn::Sin: return "sin";
    case UnaryFn::Cos: return "cos";
    case UnaryFn::Neg: return "neg";
  }
  return "?";
}

constexpr char to_char(DiffVar v) { return v == DiffVar::T ? 't' : 'x'; }

class Expr {
 public:
  static Expr constant(double v);
  static Expr integer(std::int64_t v);
  static Expr var(std::string name);
  static Expr field();
  static Expr placeholder();
  static Expr unary(UnaryFn fn, Expr child);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  /// Throws UnsupportedNode if order < 1.
  static Expr deriv(Expr child, DiffVar var, int order = 1);

  NodeKind kind() const noexcept;
  bool is(NodeKind k) const noexcept { return kind() == k; }
  bool is_binary(BinaryOp op) const noexcept;
  bool is_unary(UnaryFn fn) const noexcept;

  double value() const noexcept;        // Const
  std::int64_t int_value() const noexcept;  // Int
  const std::string& name() const noexcept; // Var
  UnaryFn fn() const noexcept;
  BinaryOp op() const noexcept;
  DiffVar diff_var() const noexcept;
  int order() const noexcept;
  const Expr& child() const noexcept;   // Unary, Deriv
  const Expr& lhs() const noexcept;     // Binary
  const Expr& rhs() const noexcept;     // Binary

  std::size_t size() const;  // node count

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  NodeKind kind{};
  std::uint8_t tag = 0;  // UnaryFn / BinaryOp / DiffVar
  int order = 0;
  double value = 0.0;
  std::int64_t ival = 0;
  std::string name;
  Expr a{nullptr};
  Expr b{nullptr};
};

inline Expr Expr::constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Const;
  n->value = v == 0.0 ? 0.0 : v;  // no negative zero
  return Expr(std::move(n));
}

inline Expr Expr::integer(std::int64_t v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Int;
  n->ival = v;
  return Expr(std::move(n));
}

inline Expr Expr::var(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Var;
  n->name = std::move(name);
  return Expr(std::move(n));
}

inline Expr Expr::field() {
  static const Expr u = [] {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Field;
    return Expr(std::move(n));
  }();
  return u;
}

inline Expr Expr::placeholder() {
  static const Expr p = [] {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Placeholder;
    return Expr(std::move(n));
  }();
  return p;
}

inline Expr Expr::unary(UnaryFn fn, Expr child) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Unary;
  n->tag = static_cast<std::uint8_t>(fn);
  n->a = std::move(child);
  return Expr(std::move(n));
}

inline Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Binary;
  n->tag = static_cast<std::uint8_t>(op);
  n->a = std::move(lhs);
  n->b = std::move(rhs);
  return Expr(std::move(n));
}

inline Expr Expr::deriv(Expr child, DiffVar var, int order) {
  if (order < 1) throw Error(ErrorKind::UnsupportedNode, "derivative order must be >= 1");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Deriv;
  n->tag = static_cast<std::uint8_t>(var);
  n->order = order;
  n->a = std::move(child);
  return Expr(std::move(n));
}

inline NodeKind Expr::kind() const noexcept { return node_->kind; }
inline bool Expr::is_binary(BinaryOp op) const noexcept {
  return node_->kind == NodeKind::Binary && static_cast<BinaryOp>(node_->tag) == op;
}
inline bool Expr::is_unary(UnaryFn fn) const noexcept {
  return node_->kind == NodeKind::Unary && static_cast<UnaryFn>(node_->tag) == fn;
}
inline double Expr::value() const noexcept { return node_->value; }
inline std::int64_t Expr::int_value() const noexcept { return node_->ival; }
inline const std::string& Expr::name() const noexcept { return node_->name; }
inline UnaryFn Expr::fn() const noexcept { return static_cast<UnaryFn>(node_->tag); }
inline BinaryOp Expr::op() const noexcept { return static_cast<BinaryOp>(node_->tag); }
inline DiffVar Expr::diff_var() const noexcept { return static_cast<DiffVar>(node_->tag); }
inline int Expr::order() const noexcept { return node_->order; }
inline const Expr& Expr::child() const noexcept { return node_->a; }
inline const Expr& Expr::lhs() const noexcept { return node_->a; }
inline const Expr& Expr::rhs() const noexcept { return node_->b; }

inline std::size_t Expr::size() const {
  switch (kind()) {
    case NodeKind::Unary:
    case NodeKind::Deriv: return 1 + child().size();
    case NodeKind::Binary: return 1 + lhs().size() + rhs().size();
    default: return 1;
  }
}

inline bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case NodeKind::Const: return x.value == y.value;
    case NodeKind::Int: return x.ival == y.ival;
    case NodeKind::Var: return x.name == y.name;
    case NodeKind::Field:
    case NodeKind::Placeholder: return true;
    case NodeKind::Unary: return x.tag == y.tag && x.a == y.a;
    case NodeKind::Binary: return x.tag == y.tag && x.a == y.a && x.b == y.b;
    case NodeKind::Deriv: return x.tag == y.tag && x.order == y.order && x.a == y.a;
  }
  return false;
}

// Builders.
inline Expr num(double v) { return Expr::constant(v); }
inline Expr var(std::string name) { return Expr::var(std::move(name)); }
inline Expr field() { return Expr::field(); }
inline Expr add(Expr a, Expr b) { return Expr::binary(BinaryOp::Add, std::move(a), std::move(b)); }
inline Expr sub(Expr a, Expr b) { return Expr::binary(BinaryOp::Sub, std::move(a), std::move(b)); }
inline Expr mul(Expr a, Expr b) { return Expr::binary(BinaryOp::Mul, std::move(a), std::move(b)); }
inline Expr div(Expr a, Expr b) { return Expr::binary(BinaryOp::Div, std::move(a), std::move(b)); }
inline Expr pow(Expr base, std::int64_t n) {
  return Expr::binary(BinaryOp::Pow, std::move(base), Expr::integer(n));
}
inline Expr sin(Expr a) { return Expr::unary(UnaryFn::Sin, std::move(a)); }
inline Expr cos(Expr a) { return Expr::unary(UnaryFn::Cos, std::move(a)); }
inline Expr neg(Expr a) { return Expr::unary(UnaryFn::Neg, std::move(a)); }
inline Expr d(Expr a, DiffVar v, int order = 1) { return Expr::deriv(std::move(a), v, order); }
inline Expr u_t() { return d(field(), DiffVar::T); }
inline Expr u_x(int order = 1) { return d(field(), DiffVar::X, order); }

/// An equation stored as `residual = 0`.
struct Equation {
  Expr residual;
  friend bool operator==(const Equation&, const Equation&) = default;
};

// ---------------------------------------------------------------------------
// Number formatting

/// Shortest decimal string that round-trips to the same double.
inline std::string format_exact(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

/// Rounds to `digits` significant digits.
inline double round_sig(double v, int digits = 3) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, digits - 1);
  double out = 0.0;
  std::from_chars(buf, p, out);
  return out;
}

/// Token spelling of a float: the value rounded to 3 significant digits, trailing zeros dropped.
inline std::string format_sig3(double v) {
  double r = round_sig(v, 3);
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, r, std::chars_format::general, 3);
  return std::string(buf, p);
}

/// Replaces every Const leaf by its 3-significant-digit rounding.
inline Expr round_constants(const Expr& e, int digits = 3) {
  switch (e.kind()) {
    case NodeKind::Const: return Expr::constant(round_sig(e.value(), digits));
    case NodeKind::Unary: return Expr::unary(e.fn(), round_constants(e.child(), digits));
    case NodeKind::Binary:
      return Expr::binary(e.op(), round_constants(e.lhs(), digits), round_constants(e.rhs(), digits));
    case NodeKind::Deriv: return Expr::deriv(round_constants(e.child(), digits), e.diff_var(), e.order());
    default: return e;
  }
}

// ---------------------------------------------------------------------------
// Infix printing. The output re-parses to a structurally identical tree for
// trees whose Int nodes only occur as exponents.

namespace detail {

inline bool is_atom(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Const: return e.value() >= 0.0;
    case NodeKind::Int: return e.int_value() >= 0;
    case NodeKind::Binary: return false;
    case NodeKind::Unary: return e.fn() != UnaryFn::Neg;
    default: return true;
  }
}

inline std::string infix(const Expr& e);

inline std::string paren(const Expr& e) { return "(" + infix(e) + ")"; }

inline std::string infix(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Const: {
      auto s = format_exact(e.value());
      return e.value() < 0.0 ? "(" + s + ")" : s;
    }
    case NodeKind::Int: return e.int_value() < 0 ? "(" + std::to_string(e.int_value()) + ")"
                                                 : std::to_string(e.int_value());
    case NodeKind::Var: return e.name();
    case NodeKind::Field: return "u";
    case NodeKind::Placeholder: return "[?]";
    case NodeKind::Unary: {
      if (e.fn() == UnaryFn::Neg) {
        const Expr& c = e.child();
        // "-2" would read back as a negative literal
        bool bare = (is_atom(c) && !c.is(NodeKind::Const) && !c.is(NodeKind::Int)) || c.is_binary(BinaryOp::Pow);
        return "-" + (bare ? infix(c) : paren(c));
      }
      return std::string(to_string(e.fn())) + "(" + infix(e.child()) + ")";
    }
    case NodeKind::Deriv: {
      const Expr& c = e.child();
      bool shorthand = c.is(NodeKind::Field) &&
                       (e.diff_var() == DiffVar::X ? e.order() <= 3 : e.order() == 1);
      std::string suffix(static_cast<std::size_t>(e.order()), to_char(e.diff_var()));
      return shorthand ? "u_" + suffix : paren(c) + "_" + suffix;
    }
    case NodeKind::Binary: {
      const Expr& l = e.lhs();
      const Expr& r = e.rhs();
      auto sum_like = [](const Expr& x) { return x.is_binary(BinaryOp::Add) || x.is_binary(BinaryOp::Sub); };
      switch (e.op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub: {
          std::string rs = sum_like(r) ? paren(r) : infix(r);
          return infix(l) + (e.op() == BinaryOp::Add ? " + " : " - ") + rs;
        }
        case BinaryOp::Mul: {
          // a*b*c parses right-nested, so a product on the left needs parentheses.
          std::string ls = (sum_like(l) || l.is_binary(BinaryOp::Mul)) ? paren(l) : infix(l);
          bool rdiv = r.is_binary(BinaryOp::Div) || (r.is_binary(BinaryOp::Mul) && r.lhs().is_binary(BinaryOp::Div));
          std::string rs = (sum_like(r) || rdiv) ? paren(r) : infix(r);
          return ls + "*" + rs;
        }
        case BinaryOp::Div: {
          std::string ls = sum_like(l) ? paren(l) : infix(l);
          std::string rs = (is_atom(r) || r.is_binary(BinaryOp::Pow)) ? infix(r) : paren(r);
          return ls + "/" + rs;
        }
        case BinaryOp::Pow: {
          std::string bs = is_atom(l) ? infix(l) : paren(l);
          std::string es = r.is(NodeKind::Int) ? std::to_string(r.int_value()) : paren(r);
          return bs + "^" + es;
        }
      }
    }
  }
  return "?";
}

}  // namespace detail

inline std::string to_infix(const Expr& e) { return detail::infix(e); }
inline std::string to_infix(const Equation& eq) { return detail::infix(eq.residual) + " = 0"; }

}  // namespace pdesym
