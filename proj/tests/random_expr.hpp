#pragma once

// Random expression trees for property tests.

#include <cmath>
#include <random>

#include "pdesym/expr.hpp"
#include "pdesym/random.hpp"

namespace pdesym::gen {

/// A constant with at most three significant digits, nonzero.
inline double random_coefficient(Rng& rng) {
  std::uniform_int_distribution<int> mant(1, 999);
  std::uniform_int_distribution<int> scale(0, 3);
  double v = mant(rng) / std::pow(10.0, scale(rng));
  return std::bernoulli_distribution(0.3)(rng) ? -v : v;
}

/// Smooth field expressions, safe to differentiate in x.
inline Expr random_field_expr(Rng& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 6 : 2);
  switch (pick(rng)) {
    case 0: return field();
    case 1: return u_x();
    case 2: return num(random_coefficient(rng));
    case 3: return add(random_field_expr(rng, depth - 1), random_field_expr(rng, depth - 1));
    case 4: return mul(random_field_expr(rng, depth - 1), random_field_expr(rng, depth - 1));
    case 5: return sin(random_field_expr(rng, depth - 1));
    default: return pow(random_field_expr(rng, depth - 1), 2);
  }
}

/// General residual-like expressions over u, its derivatives, x and constants.
inline Expr random_expr(Rng& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 16 : 6);
  switch (pick(rng)) {
    case 0: return field();
    case 1: return u_t();
    case 2: return u_x();
    case 3: return u_x(2);
    case 4: return u_x(3);
    case 5: return var("x");
    case 6: return num(random_coefficient(rng));
    case 7:
    case 8: return add(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 9: return sub(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 10:
    case 11: return mul(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 12: return div(random_expr(rng, depth - 1), num(random_coefficient(rng)));
    case 13: return std::bernoulli_distribution(0.5)(rng) ? sin(random_expr(rng, depth - 1))
                                                          : cos(random_expr(rng, depth - 1));
    case 14: return pow(random_expr(rng, depth - 1), std::uniform_int_distribution<int>(2, 3)(rng));
    case 15: return neg(random_expr(rng, depth - 1));
    default: return d(random_field_expr(rng, 2), DiffVar::X);
  }
}

}  // namespace pdesym::gen
