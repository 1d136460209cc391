#pragma once

// Test-time perturbations of symbolic inputs: branch swapping, erroneous
// term injection and coefficient masking.

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "pdesym/canon.hpp"
#include "pdesym/error.hpp"
#include "pdesym/expr.hpp"
#include "pdesym/random.hpp"

namespace pdesym {

inline std::vector<Expr> default_noise_terms() {
  return {field(), mul(field(), u_x()), u_x(2), sin(field())};
}

struct PerturbConfig {
  double swap_prob = 0.5;
  double noise_prob = 0.5;
  std::vector<Expr> noise_term_library = default_noise_terms();
  double noise_coeff_lo = 0.1;
  double noise_coeff_hi = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(swap_prob) || !prob(noise_prob))
      throw Error(ErrorKind::Syntax, "probabilities must lie in [0, 1]");
    if (!(noise_coeff_lo <= noise_coeff_hi)) throw Error(ErrorKind::Syntax, "empty noise coefficient range");
    if (noise_term_library.empty()) throw Error(ErrorKind::Syntax, "empty noise term library");
  }
};

namespace detail {

inline Expr swap_rec(const Expr& e, double p, Rng& rng) {
  std::bernoulli_distribution coin(p);
  switch (e.kind()) {
    case NodeKind::Unary: return Expr::unary(e.fn(), swap_rec(e.child(), p, rng));
    case NodeKind::Deriv: return Expr::deriv(swap_rec(e.child(), p, rng), e.diff_var(), e.order());
    case NodeKind::Binary: {
      bool flip = (e.op() == BinaryOp::Add || e.op() == BinaryOp::Mul || e.op() == BinaryOp::Sub) && coin(rng);
      Expr l = swap_rec(e.lhs(), p, rng);
      Expr r = swap_rec(e.rhs(), p, rng);
      if (!flip) return Expr::binary(e.op(), l, r);
      // a - b becomes (-1)*b + a
      if (e.op() == BinaryOp::Sub) return add(mul(num(-1.0), r), l);
      return Expr::binary(e.op(), r, l);
    }
    default: return e;
  }
}

inline Expr mask_rec(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Unary: return Expr::unary(e.fn(), mask_rec(e.child()));
    case NodeKind::Deriv: return Expr::deriv(mask_rec(e.child()), e.diff_var(), e.order());
    case NodeKind::Binary: {
      if (e.op() == BinaryOp::Mul) {
        auto side = [](const Expr& x) { return x.is(NodeKind::Const) ? Expr::placeholder() : mask_rec(x); };
        return mul(side(e.lhs()), side(e.rhs()));
      }
      return Expr::binary(e.op(), mask_rec(e.lhs()), mask_rec(e.rhs()));
    }
    default: return e;
  }
}

}  // namespace detail

/// Visits the tree once in pre-order; each add, mul and sub node has its
/// operands exchanged with probability `cfg.swap_prob`. A swapped
/// subtraction a - b is written as (-1)*b + a.
inline Expr swap_branches(const Expr& e, const PerturbConfig& cfg) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, {tag("swap")});
  return detail::swap_rec(e, cfg.swap_prob, rng);
}

inline Equation swap_branches(const Equation& eq, const PerturbConfig& cfg) {
  return {swap_branches(eq.residual, cfg)};
}

struct NoisyEquation {
  Equation equation;
  std::optional<Expr> injected;  // the added c*T term, if any
};

/// With probability `noise_prob` appends c*T, T uniform over the library and
/// c uniform over the coefficient range (rounded to 3 significant digits).
inline NoisyEquation inject_noise_term(const Equation& eq, const PerturbConfig& cfg) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, {tag("noise")});
  if (!std::bernoulli_distribution(cfg.noise_prob)(rng)) return {eq, std::nullopt};
  std::uniform_int_distribution<std::size_t> pick(0, cfg.noise_term_library.size() - 1);
  const Expr& t = cfg.noise_term_library[pick(rng)];
  double c = round_sig(uniform(rng, cfg.noise_coeff_lo, cfg.noise_coeff_hi), 3);
  Expr term = mul(num(c), t);
  return {{add(eq.residual, term)}, term};
}

enum class MaskMode {
  ExplicitConstants,  // constant operands of products become [?], tree otherwise untouched
  AllTerms,           // canonicalize, then every top-level term gets a [?] coefficient
};

inline Expr mask_coefficients(const Expr& e, MaskMode mode = MaskMode::ExplicitConstants) {
  if (mode == MaskMode::ExplicitConstants) return detail::mask_rec(e);
  std::optional<Expr> acc;
  for (const Expr& term : canonical_terms(canonicalize(e))) {
    TermParts parts = split_term(term);
    Expr masked = parts.product ? mul(Expr::placeholder(), *parts.product) : Expr::placeholder();
    acc = acc ? add(*acc, masked) : masked;
  }
  return *acc;
}

inline Equation mask_coefficients(const Equation& eq, MaskMode mode = MaskMode::ExplicitConstants) {
  return {mask_coefficients(eq.residual, mode)};
}

}  // namespace pdesym
