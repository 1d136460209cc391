#pragma once

// Canonical forms for PDE residuals.
//
// A residual is normalized into a sum of terms, each a coefficient times a
// multiset of (base, integer exponent) factors:
//   1. sub(a,b) -> a + (-1)*b, neg(a) -> (-1)*a, a/b -> a*b^-1
//   2. derivatives of composite expressions are expanded (product and chain
//      rule) until every derivative acts on the bare field
//   3. nested sums and products are flattened; constants fold into the
//      coefficient, repeated bases merge their exponents
//   4. terms with identical factor multisets are collected; zero terms drop
//   5. factors and terms are sorted by a fixed total order and rebuilt as a
//      left-nested binary tree, coefficient first
//
// Coefficient arithmetic only happens on sorted multisets of operands, so
// the result does not depend on the operand order of the input tree.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "pdesym/error.hpp"
#include "pdesym/expr.hpp"

namespace pdesym {

namespace detail {

constexpr int kind_rank(NodeKind k) {
  switch (k) {
    case NodeKind::Field: return 0;
    case NodeKind::Var: return 1;
    case NodeKind::Unary: return 2;
    case NodeKind::Binary: return 3;
    case NodeKind::Deriv: return 4;
    case NodeKind::Placeholder: return 5;
    case NodeKind::Int: return 6;
    case NodeKind::Const: return 7;
  }
  return 8;
}

inline std::strong_ordering compare_doubles(double a, double b) {
  if (a < b) return std::strong_ordering::less;
  if (b < a) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace detail

/// Total order over expression trees used to sort canonical factors and terms.
/// Field < variables < functions < compound < derivatives < constants; among
/// derivatives t sorts before x and higher order before lower.
inline std::strong_ordering canonical_compare(const Expr& a, const Expr& b) {
  if (auto c = detail::kind_rank(a.kind()) <=> detail::kind_rank(b.kind()); c != 0) return c;
  switch (a.kind()) {
    case NodeKind::Field:
    case NodeKind::Placeholder: return std::strong_ordering::equal;
    case NodeKind::Var: return a.name() <=> b.name();
    case NodeKind::Int: return a.int_value() <=> b.int_value();
    case NodeKind::Const: return detail::compare_doubles(a.value(), b.value());
    case NodeKind::Unary:
      if (auto c = a.fn() <=> b.fn(); c != 0) return c;
      return canonical_compare(a.child(), b.child());
    case NodeKind::Binary:
      if (auto c = a.op() <=> b.op(); c != 0) return c;
      if (auto c = canonical_compare(a.lhs(), b.lhs()); c != 0) return c;
      return canonical_compare(a.rhs(), b.rhs());
    case NodeKind::Deriv:
      if (auto c = a.diff_var() <=> b.diff_var(); c != 0) return c;
      if (auto c = b.order() <=> a.order(); c != 0) return c;
      return canonical_compare(a.child(), b.child());
  }
  return std::strong_ordering::equal;
}

struct CanonicalLess {
  bool operator()(const Expr& a, const Expr& b) const { return canonical_compare(a, b) < 0; }
};

namespace detail {

struct Coef {
  bool placeholder = false;
  std::vector<double> operands;  // product of these

  double value() const {
    std::vector<double> v = operands;
    std::sort(v.begin(), v.end());
    double p = 1.0;
    for (double x : v) p *= x;
    return p;
  }
};

struct Factor {
  Expr base;
  std::int64_t exp;
};

struct Term {
  Coef coef;
  std::vector<Factor> factors;  // sorted, bases distinct, exponents nonzero
};

using Sum = std::vector<Term>;

inline std::strong_ordering compare_factors(const Factor& a, const Factor& b) {
  if (auto c = canonical_compare(a.base, b.base); c != 0) return c;
  return b.exp <=> a.exp;
}

// Lexicographic over factor lists; pure constants sort last.
inline std::strong_ordering compare_terms(const Term& a, const Term& b) {
  if (a.factors.empty() || b.factors.empty()) return a.factors.empty() <=> b.factors.empty();
  std::size_t n = std::min(a.factors.size(), b.factors.size());
  for (std::size_t i = 0; i < n; ++i)
    if (auto c = compare_factors(a.factors[i], b.factors[i]); c != 0) return c;
  return a.factors.size() <=> b.factors.size();
}

inline bool same_factors(const Term& a, const Term& b) {
  if (a.factors.size() != b.factors.size()) return false;
  for (std::size_t i = 0; i < a.factors.size(); ++i)
    if (a.factors[i].exp != b.factors[i].exp || !(a.factors[i].base == b.factors[i].base)) return false;
  return true;
}

inline void merge_factors(std::vector<Factor>& fs) {
  std::sort(fs.begin(), fs.end(),
            [](const Factor& a, const Factor& b) { return canonical_compare(a.base, b.base) < 0; });
  std::vector<Factor> out;
  for (auto& f : fs) {
    if (!out.empty() && out.back().base == f.base)
      out.back().exp += f.exp;
    else
      out.push_back(f);
    if (out.back().exp == 0) out.pop_back();
  }
  fs = std::move(out);
}

inline Term constant_term(double c) { return Term{Coef{false, {c}}, {}}; }
inline Term unit_term() { return Term{Coef{}, {}}; }
inline Term factor_term(Expr base, std::int64_t exp = 1) {
  return Term{Coef{}, {Factor{std::move(base), exp}}};
}

inline bool is_pure_coefficient(const Term& t) { return t.factors.empty(); }

inline Term multiply(const Term& a, const Term& b) {
  Term r;
  r.coef.placeholder = a.coef.placeholder || b.coef.placeholder;
  r.coef.operands = a.coef.operands;
  r.coef.operands.insert(r.coef.operands.end(), b.coef.operands.begin(), b.coef.operands.end());
  r.factors = a.factors;
  r.factors.insert(r.factors.end(), b.factors.begin(), b.factors.end());
  merge_factors(r.factors);
  return r;
}

inline Sum scale(Sum s, const Coef& c) {
  for (auto& t : s) {
    t.coef.placeholder = t.coef.placeholder || c.placeholder;
    t.coef.operands.insert(t.coef.operands.end(), c.operands.begin(), c.operands.end());
  }
  return s;
}

inline Term power(const Term& t, std::int64_t n) {
  Term r;
  r.coef.placeholder = t.coef.placeholder;
  std::int64_t reps = n < 0 ? -n : n;
  for (double c : t.coef.operands) {
    if (n < 0 && c == 0.0) throw Error(ErrorKind::DivisionByZero, "division by zero constant");
    double v = n < 0 ? 1.0 / c : c;
    for (std::int64_t k = 0; k < reps; ++k) r.coef.operands.push_back(v);
  }
  for (const auto& f : t.factors) r.factors.push_back(Factor{f.base, f.exp * n});
  merge_factors(r.factors);
  return r;
}

inline Sum normalize(const Expr& e);
inline Sum collect(const Sum& s);
inline Expr build(const Sum& collected);

inline Expr canonical_of(const Sum& s) { return build(collect(s)); }

inline Term as_term(const Sum& collected) {
  if (collected.empty()) return constant_term(0.0);
  if (collected.size() == 1) return collected.front();
  return factor_term(build(collected));
}

// Product of two uncollected sums. A multi-term operand becomes a single
// factor unless the other operand is a pure coefficient.
inline Sum multiply_sums(const Sum& a, const Sum& b) {
  // Keep raw coefficient operands when one side is already a single constant
  // term, so re-association of constant products does not change rounding.
  if (a.size() == 1 && is_pure_coefficient(a.front())) return scale(b, a.front().coef);
  if (b.size() == 1 && is_pure_coefficient(b.front())) return scale(a, b.front().coef);
  Sum ca = collect(a);
  Sum cb = collect(b);
  if (ca.empty() || cb.empty()) return {};
  if (ca.size() == 1 && is_pure_coefficient(ca.front())) return scale(b, ca.front().coef);
  if (cb.size() == 1 && is_pure_coefficient(cb.front())) return scale(a, cb.front().coef);
  return {multiply(as_term(ca), as_term(cb))};
}

inline Sum power_sum(const Sum& a, std::int64_t n) {
  Sum ca = collect(a);
  if (n == 0) return {unit_term()};
  if (ca.empty()) {
    if (n < 0) throw Error(ErrorKind::DivisionByZero, "division by zero");
    return {};
  }
  if (ca.size() == 1) return {power(ca.front(), n)};
  return {factor_term(build(ca), n)};
}

inline Sum differentiate(const Sum& s, DiffVar v);

inline Sum differentiate_base(const Expr& base, DiffVar v) {
  switch (base.kind()) {
    case NodeKind::Field: return {factor_term(Expr::deriv(base, v, 1))};
    case NodeKind::Deriv:
      if (base.diff_var() != v)
        throw Error(ErrorKind::UnsupportedNode, "mixed space-time derivatives are not supported");
      return {factor_term(Expr::deriv(base.child(), v, base.order() + 1))};
    case NodeKind::Var:
      if ((base.name() == "x" && v == DiffVar::X) || (base.name() == "t" && v == DiffVar::T))
        return {unit_term()};
      return {};
    case NodeKind::Unary: {
      Sum darg = differentiate(collect(normalize(base.child())), v);
      if (base.fn() == UnaryFn::Sin)
        return multiply_sums({factor_term(Expr::unary(UnaryFn::Cos, base.child()))}, darg);
      if (base.fn() == UnaryFn::Cos)
        return multiply_sums({Term{Coef{false, {-1.0}}, {Factor{Expr::unary(UnaryFn::Sin, base.child()), 1}}}},
                             darg);
      break;
    }
    case NodeKind::Binary:
      return differentiate(collect(normalize(base)), v);
    default:
      break;
  }
  throw Error(ErrorKind::UnsupportedNode, "cannot differentiate node");
}

// Product rule over every factor, distributing over the derivative of the base.
inline Sum differentiate(const Sum& s, DiffVar v) {
  Sum out;
  for (const auto& t : s) {
    for (std::size_t i = 0; i < t.factors.size(); ++i) {
      const Factor& f = t.factors[i];
      Sum dbase = differentiate_base(f.base, v);
      if (dbase.empty()) continue;
      Term rest;
      rest.coef = t.coef;
      rest.coef.operands.push_back(static_cast<double>(f.exp));
      for (std::size_t j = 0; j < t.factors.size(); ++j)
        if (j != i) rest.factors.push_back(t.factors[j]);
      if (f.exp != 1) rest.factors.push_back(Factor{f.base, f.exp - 1});
      merge_factors(rest.factors);
      for (const auto& dt : dbase) out.push_back(multiply(rest, dt));
    }
  }
  return out;
}

inline Sum normalize(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Const: return {constant_term(e.value())};
    case NodeKind::Int: return {constant_term(static_cast<double>(e.int_value()))};
    case NodeKind::Placeholder: return {Term{Coef{true, {}}, {}}};
    case NodeKind::Var:
    case NodeKind::Field: return {factor_term(e)};
    case NodeKind::Unary: {
      if (e.fn() == UnaryFn::Neg) return scale(normalize(e.child()), Coef{false, {-1.0}});
      Sum arg = collect(normalize(e.child()));
      Expr a = build(arg);
      if (arg.empty() || (arg.size() == 1 && is_pure_coefficient(arg.front()) && !arg.front().coef.placeholder)) {
        double c = arg.empty() ? 0.0 : arg.front().coef.value();
        return {constant_term(e.fn() == UnaryFn::Sin ? std::sin(c) : std::cos(c))};
      }
      return {factor_term(Expr::unary(e.fn(), a))};
    }
    case NodeKind::Deriv: {
      Sum s = collect(normalize(e.child()));
      for (int k = 0; k < e.order(); ++k) s = collect(differentiate(s, e.diff_var()));
      return s;
    }
    case NodeKind::Binary: {
      switch (e.op()) {
        case BinaryOp::Add: {
          Sum s = normalize(e.lhs());
          Sum r = normalize(e.rhs());
          s.insert(s.end(), r.begin(), r.end());
          return s;
        }
        case BinaryOp::Sub: {
          Sum s = normalize(e.lhs());
          Sum r = scale(normalize(e.rhs()), Coef{false, {-1.0}});
          s.insert(s.end(), r.begin(), r.end());
          return s;
        }
        case BinaryOp::Mul: return multiply_sums(normalize(e.lhs()), normalize(e.rhs()));
        case BinaryOp::Div: {
          Sum den = collect(normalize(e.rhs()));
          if (den.empty()) throw Error(ErrorKind::DivisionByZero, "division by zero");
          return multiply_sums(normalize(e.lhs()), power_sum(den, -1));
        }
        case BinaryOp::Pow: {
          Sum ex = collect(normalize(e.rhs()));
          double p = 0.0;
          if (ex.size() == 1 && is_pure_coefficient(ex.front()) && !ex.front().coef.placeholder)
            p = ex.front().coef.value();
          else if (!ex.empty())
            throw Error(ErrorKind::UnsupportedNode, "non-constant exponent");
          if (p == std::trunc(p) && std::abs(p) < 1e9)
            return power_sum(normalize(e.lhs()), static_cast<std::int64_t>(p));
          Sum b = collect(normalize(e.lhs()));
          if (b.size() == 1 && is_pure_coefficient(b.front()) && !b.front().coef.placeholder)
            return {constant_term(std::pow(b.front().coef.value(), p))};
          throw Error(ErrorKind::UnsupportedNode, "non-integer exponent");
        }
      }
    }
  }
  throw Error(ErrorKind::UnsupportedNode, "unknown node");
}

inline Sum collect(const Sum& s) {
  // A lone sum-valued factor with exponent 1 is expanded back into its terms.
  Sum flat;
  for (const auto& t : s) {
    if (t.factors.size() == 1 && t.factors.front().exp == 1 && t.factors.front().base.is_binary(BinaryOp::Add)) {
      Sum inner = scale(normalize(t.factors.front().base), t.coef);
      flat.insert(flat.end(), inner.begin(), inner.end());
    } else {
      flat.push_back(t);
    }
  }
  std::stable_sort(flat.begin(), flat.end(), [](const Term& a, const Term& b) { return compare_terms(a, b) < 0; });
  Sum out;
  for (std::size_t i = 0; i < flat.size();) {
    std::size_t j = i;
    bool placeholder = false;
    std::vector<double> values;
    while (j < flat.size() && same_factors(flat[i], flat[j])) {
      placeholder = placeholder || flat[j].coef.placeholder;
      values.push_back(flat[j].coef.value());
      ++j;
    }
    std::sort(values.begin(), values.end());
    double total = 0.0;
    for (double v : values) total += v;
    if (placeholder || total != 0.0) {
      Term t;
      t.coef.placeholder = placeholder;
      if (!placeholder) t.coef.operands = {total};
      t.factors = flat[i].factors;
      out.push_back(std::move(t));
    }
    i = j;
  }
  return out;
}

inline Expr build_factor(const Factor& f) {
  return f.exp == 1 ? f.base : Expr::binary(BinaryOp::Pow, f.base, Expr::integer(f.exp));
}

inline Expr build_term(const Term& t) {
  std::optional<Expr> product;
  for (const auto& f : t.factors) {
    Expr fe = build_factor(f);
    product = product ? Expr::binary(BinaryOp::Mul, *product, fe) : fe;
  }
  if (t.coef.placeholder)
    return product ? Expr::binary(BinaryOp::Mul, Expr::placeholder(), *product) : Expr::placeholder();
  double c = t.coef.value();
  if (!product) return Expr::constant(c);
  if (c == 1.0) return *product;
  return Expr::binary(BinaryOp::Mul, Expr::constant(c), *product);
}

inline Expr build(const Sum& collected) {
  if (collected.empty()) return Expr::constant(0.0);
  Expr acc = build_term(collected.front());
  for (std::size_t i = 1; i < collected.size(); ++i)
    acc = Expr::binary(BinaryOp::Add, acc, build_term(collected[i]));
  return acc;
}

}  // namespace detail

/// Unique representative of `e`'s equivalence class under reordering,
/// subtraction rewriting, constant folding and like-term collection.
inline Expr canonicalize(const Expr& e) { return detail::canonical_of(detail::normalize(e)); }

inline Equation canonicalize(const Equation& eq) { return {canonicalize(eq.residual)}; }

inline bool equivalent(const Expr& a, const Expr& b) { return canonicalize(a) == canonicalize(b); }
inline bool equivalent(const Equation& a, const Equation& b) { return equivalent(a.residual, b.residual); }

/// Top-level additive terms of a canonical residual, in order.
inline std::vector<Expr> canonical_terms(const Expr& canonical) {
  std::vector<Expr> out;
  auto walk = [&](auto&& self, const Expr& e) -> void {
    if (e.is_binary(BinaryOp::Add)) {
      self(self, e.lhs());
      self(self, e.rhs());
    } else {
      out.push_back(e);
    }
  };
  walk(walk, canonical);
  return out;
}

/// Splits a canonical term into (coefficient node or nothing, factor product).
struct TermParts {
  std::optional<Expr> coefficient;  // Const or Placeholder; absent means 1
  std::optional<Expr> product;      // absent for a pure constant
};

inline TermParts split_term(const Expr& term) {
  if (term.is(NodeKind::Const) || term.is(NodeKind::Placeholder)) return {term, std::nullopt};
  if (term.is_binary(BinaryOp::Mul) &&
      (term.lhs().is(NodeKind::Const) || term.lhs().is(NodeKind::Placeholder)))
    return {term.lhs(), term.rhs()};
  return {std::nullopt, term};
}

}  // namespace pdesym
