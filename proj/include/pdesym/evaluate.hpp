#pragma once

// Pointwise evaluation of residuals with a known field u(x,t).
//
// Derivative nodes over arbitrary subexpressions are evaluated with
// truncated bivariate Taylor series ("jets"), so evaluation never goes
// through canonicalization and can serve as an independent check of it.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pdesym/error.hpp"
#include "pdesym/expr.hpp"

namespace pdesym {

/// Truncated Taylor expansion in (dx, dt) around a point: coefficient (i, j)
/// is d^i/dx^i d^j/dt^j f / (i! j!), for i <= ox, j <= ot.
class Jet {
 public:
  Jet(int ox, int ot, double value = 0.0) : ox_(ox), ot_(ot), c_((ox + 1) * (ot + 1), 0.0) { c_[0] = value; }

  int ox() const { return ox_; }
  int ot() const { return ot_; }
  double& at(int i, int j) { return c_[i * (ot_ + 1) + j]; }
  double at(int i, int j) const { return c_[i * (ot_ + 1) + j]; }
  double value() const { return c_[0]; }

  /// Partial derivative d^i/dx^i d^j/dt^j at the expansion point.
  double partial(int i, int j) const {
    double f = at(i, j);
    for (int k = 2; k <= i; ++k) f *= k;
    for (int k = 2; k <= j; ++k) f *= k;
    return f;
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) {
    for (std::size_t k = 0; k < a.c_.size(); ++k) a.c_[k] -= b.c_[k];
    return a;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.ox_, a.ot_);
    for (int i1 = 0; i1 <= a.ox_; ++i1)
      for (int j1 = 0; j1 <= a.ot_; ++j1) {
        double av = a.at(i1, j1);
        if (av == 0.0) continue;
        for (int i2 = 0; i1 + i2 <= a.ox_; ++i2)
          for (int j2 = 0; j1 + j2 <= a.ot_; ++j2) r.at(i1 + i2, j1 + j2) += av * b.at(i2, j2);
      }
    return r;
  }

  /// Nilpotent part (constant term removed).
  Jet tail() const {
    Jet r = *this;
    r.c_[0] = 0.0;
    return r;
  }

  /// d/dx (or d/dt); the result has one order less in that variable.
  Jet differentiate(DiffVar v) const {
    if (v == DiffVar::X) {
      if (ox_ == 0) throw Error(ErrorKind::UnsupportedNode, "jet order exhausted");
      Jet r(ox_ - 1, ot_);
      for (int i = 0; i < ox_; ++i)
        for (int j = 0; j <= ot_; ++j) r.at(i, j) = (i + 1) * at(i + 1, j);
      return r;
    }
    if (ot_ == 0) throw Error(ErrorKind::UnsupportedNode, "jet order exhausted");
    Jet r(ox_, ot_ - 1);
    for (int i = 0; i <= ox_; ++i)
      for (int j = 0; j < ot_; ++j) r.at(i, j) = (j + 1) * at(i, j + 1);
    return r;
  }

  /// Truncates to lower orders.
  Jet truncate(int ox, int ot) const {
    Jet r(ox, ot);
    for (int i = 0; i <= ox; ++i)
      for (int j = 0; j <= ot; ++j) r.at(i, j) = at(i, j);
    return r;
  }

 private:
  int ox_, ot_;
  std::vector<double> c_;
};

namespace detail {

// f(a0 + h) = sum_k f^(k)(a0) h^k / k!, with h nilpotent of degree ox+ot+1.
template <class Deriv>
Jet compose(const Jet& a, Deriv&& fk) {
  Jet h = a.tail();
  int n = a.ox() + a.ot();
  Jet result(a.ox(), a.ot(), fk(0));
  Jet hk(a.ox(), a.ot(), 1.0);
  double fact = 1.0;
  for (int k = 1; k <= n; ++k) {
    hk = hk * h;
    fact *= k;
    Jet term = hk;
    term *= fk(k) / fact;
    result += term;
  }
  return result;
}

inline Jet reciprocal(const Jet& a) {
  double a0 = a.value();
  if (a0 == 0.0) throw Error(ErrorKind::DivisionByZero, "division by zero during evaluation");
  return compose(a, [a0](int k) {
    double v = 1.0 / a0;
    for (int i = 1; i <= k; ++i) v *= -static_cast<double>(i) / a0;
    return v;
  });
}

inline Jet int_power(const Jet& a, std::int64_t n) {
  if (n < 0) return int_power(reciprocal(a), -n);
  Jet r(a.ox(), a.ot(), 1.0);
  Jet b = a;
  while (n > 0) {
    if (n & 1) r = r * b;
    b = b * b;
    n >>= 1;
  }
  return r;
}

inline int max_order(const Expr& e, DiffVar v) {
  switch (e.kind()) {
    case NodeKind::Deriv: return (e.diff_var() == v ? e.order() : 0) + max_order(e.child(), v);
    case NodeKind::Unary: return max_order(e.child(), v);
    case NodeKind::Binary: return std::max(max_order(e.lhs(), v), max_order(e.rhs(), v));
    default: return 0;
  }
}

}  // namespace detail

/// Supplies the Taylor jet of u at (x, t) to the requested orders.
using FieldJetFn = std::function<Jet(double x, double t, int ox, int ot)>;

struct EvalPoint {
  double x = 0.0;
  double t = 0.0;
  std::map<std::string, double, std::less<>> vars;  // values of other variables
};

inline Jet evaluate_jet(const Expr& e, const EvalPoint& p, const FieldJetFn& u, int ox, int ot) {
  switch (e.kind()) {
    case NodeKind::Const: return Jet(ox, ot, e.value());
    case NodeKind::Int: return Jet(ox, ot, static_cast<double>(e.int_value()));
    case NodeKind::Placeholder:
      throw Error(ErrorKind::UnsupportedNode, "cannot evaluate a placeholder coefficient");
    case NodeKind::Field: return u(p.x, p.t, ox, ot);
    case NodeKind::Var: {
      if (e.name() == "x") {
        Jet j(ox, ot, p.x);
        if (ox > 0) j.at(1, 0) = 1.0;
        return j;
      }
      if (e.name() == "t") {
        Jet j(ox, ot, p.t);
        if (ot > 0) j.at(0, 1) = 1.0;
        return j;
      }
      auto it = p.vars.find(e.name());
      if (it == p.vars.end()) throw Error(ErrorKind::UnknownSymbol, "no value for variable " + e.name());
      return Jet(ox, ot, it->second);
    }
    case NodeKind::Unary: {
      Jet a = evaluate_jet(e.child(), p, u, ox, ot);
      switch (e.fn()) {
        case UnaryFn::Neg: a *= -1.0; return a;
        case UnaryFn::Sin: {
          double a0 = a.value();
          return detail::compose(a, [a0](int k) {
            switch (k % 4) {
              case 0: return std::sin(a0);
              case 1: return std::cos(a0);
              case 2: return -std::sin(a0);
              default: return -std::cos(a0);
            }
          });
        }
        case UnaryFn::Cos: {
          double a0 = a.value();
          return detail::compose(a, [a0](int k) {
            switch (k % 4) {
              case 0: return std::cos(a0);
              case 1: return -std::sin(a0);
              case 2: return -std::cos(a0);
              default: return std::sin(a0);
            }
          });
        }
      }
      break;
    }
    case NodeKind::Binary: {
      if (e.op() == BinaryOp::Pow) {
        Jet b = evaluate_jet(e.lhs(), p, u, ox, ot);
        if (e.rhs().is(NodeKind::Int)) return detail::int_power(b, e.rhs().int_value());
        Jet ex = evaluate_jet(e.rhs(), p, u, ox, ot);
        double n = ex.value();
        if (n == std::trunc(n)) return detail::int_power(b, static_cast<std::int64_t>(n));
        if (ox + ot == 0) return Jet(0, 0, std::pow(b.value(), n));
        throw Error(ErrorKind::UnsupportedNode, "non-integer exponent");
      }
      Jet l = evaluate_jet(e.lhs(), p, u, ox, ot);
      Jet r = evaluate_jet(e.rhs(), p, u, ox, ot);
      switch (e.op()) {
        case BinaryOp::Add: return l + r;
        case BinaryOp::Sub: return l - r;
        case BinaryOp::Mul: return l * r;
        case BinaryOp::Div: return l * detail::reciprocal(r);
        default: break;
      }
      break;
    }
    case NodeKind::Deriv: {
      int n = e.order();
      bool in_x = e.diff_var() == DiffVar::X;
      Jet c = evaluate_jet(e.child(), p, u, ox + (in_x ? n : 0), ot + (in_x ? 0 : n));
      for (int k = 0; k < n; ++k) c = c.differentiate(e.diff_var());
      return c;
    }
  }
  throw Error(ErrorKind::UnsupportedNode, "cannot evaluate node");
}

inline double evaluate(const Expr& e, const EvalPoint& p, const FieldJetFn& u) {
  return evaluate_jet(e, p, u, 0, 0).value();
}

/// Randomized-coefficient polynomial surrogate
///   P(x,t) = (c0 + c1 t + c2 t^2)(c3 + c4 x + c5 x^2 + c6 x^3 + c7 x^4).
struct PolySurrogate {
  std::array<double, 8> c{};

  double operator()(double x, double t) const {
    return (c[0] + c[1] * t + c[2] * t * t) * (c[3] + x * (c[4] + x * (c[5] + x * (c[6] + x * c[7]))));
  }

  /// Exact Taylor jet of P at (x, t).
  Jet jet(double x, double t, int ox, int ot) const {
    std::array<double, 3> tp{c[0], c[1], c[2]};
    std::array<double, 5> xp{c[3], c[4], c[5], c[6], c[7]};
    auto shifted = [](const auto& poly, double at, int k) {
      // k-th Taylor coefficient of poly around `at`: sum_m poly[m] C(m,k) at^(m-k)
      double s = 0.0;
      for (std::size_t m = static_cast<std::size_t>(k); m < poly.size(); ++m) {
        double binom = 1.0;
        for (int i = 0; i < k; ++i) binom = binom * static_cast<double>(m - i) / (i + 1);
        s += poly[m] * binom * std::pow(at, static_cast<double>(m) - k);
      }
      return s;
    };
    Jet j(ox, ot);
    for (int i = 0; i <= ox; ++i)
      for (int k = 0; k <= ot; ++k) j.at(i, k) = shifted(xp, x, i) * shifted(tp, t, k);
    return j;
  }

  FieldJetFn as_field() const {
    return [s = *this](double x, double t, int ox, int ot) { return s.jet(x, t, ox, ot); };
  }
};

}  // namespace pdesym
