#include <gtest/gtest.h>

#include <cmath>

#include "pdesym/canon.hpp"
#include "pdesym/evaluate.hpp"
#include "pdesym/parse.hpp"
#include "random_expr.hpp"

using namespace pdesym;

namespace {

// Evaluates both expressions at scattered points with a random polynomial
// field; canonicalization must not change the value.
void expect_same_function(const Expr& a, const Expr& b, Rng& rng) {
  PolySurrogate s;
  for (auto& c : s.c) c = uniform(rng, -1.0, 1.0);
  auto u = s.as_field();
  for (int k = 0; k < 5; ++k) {
    EvalPoint p{uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0), {}};
    double va = evaluate(a, p, u);
    double vb = evaluate(b, p, u);
    ASSERT_NEAR(va, vb, 1e-9 * (1.0 + std::abs(va))) << to_infix(a) << "  vs  " << to_infix(b);
  }
}

Expr P(const char* s) { return parse_expr(s); }

}  // namespace

TEST(Canon, CancellationAndReordering) {
  EXPECT_EQ(canonicalize(P("x - 1 + 1 + y")), canonicalize(P("y + x")));
  EXPECT_EQ(canonicalize(P("u - u")), num(0));
  EXPECT_EQ(canonicalize(P("2*u + 3*u")), mul(num(5), field()));
}

TEST(Canon, BurgersTermOrder) {
  // 0.5 (u^2)_x = u u_x; terms ordered u*u_x, u_t, u_xx.
  auto c = canonicalize(P("u_t + 0.5*(u^2)_x - 0.01*u_xx"));
  auto want = add(add(mul(field(), u_x()), u_t()), mul(num(-0.01), u_x(2)));
  EXPECT_EQ(c, want) << to_infix(c);
}

TEST(Canon, KdVTermOrder) {
  auto c = canonicalize(P("u_t + 0.0484*u_xxx + u*u_x"));
  auto want = add(add(mul(field(), u_x()), u_t()), mul(num(0.0484), u_x(3)));
  EXPECT_EQ(c, want) << to_infix(c);
}

TEST(Canon, SineFluxTermOrder) {
  auto c = canonicalize(P("u_t + 0.955*(sin(u))_x"));
  auto want = add(mul(num(0.955), mul(cos(field()), u_x())), u_t());
  EXPECT_EQ(c, want) << to_infix(c);
}

TEST(Canon, ManualAndSwappedTreesAgree) {
  // Viscous Burgers in hand-ordered form and with branches swapped.
  auto left = add(u_t(), sub(mul(num(1.0), mul(field(), u_x())), mul(num(0.00318), u_x(2))));
  auto right = add(add(mul(num(-1.0), mul(u_x(2), num(0.00318))), mul(mul(u_x(), field()), num(1.0))), u_t());
  EXPECT_TRUE(equivalent(left, right));
}

TEST(Canon, CoefficientProductsIgnoreOperandOrder) {
  EXPECT_EQ(canonicalize(P("0.1*(0.7*(0.3*u))")), canonicalize(P("0.3*(0.1*(0.7*u))")));
  EXPECT_EQ(canonicalize(P("(0.1*0.7)*u + (0.2*0.3)*u")), canonicalize(P("(0.3*0.2)*u + (0.7*0.1)*u")));
}

TEST(Canon, DivisionAndPowers) {
  EXPECT_EQ(canonicalize(P("u/2")), canonicalize(P("0.5*u")));
  EXPECT_EQ(canonicalize(P("(1+u)*(u+1)")), canonicalize(P("(u+1)^2")));
  EXPECT_EQ(to_infix(canonicalize(P("1 + 2*u + u^2"))), "u^2 + 2*u + 1");
  EXPECT_EQ(canonicalize(P("u*u*u")), pow(field(), 3));
}

TEST(Canon, Errors) {
  auto kind = [](const char* s) {
    try {
      canonicalize(P(s));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  EXPECT_EQ(kind("u/0"), ErrorKind::DivisionByZero);
  EXPECT_EQ(kind("(u_t)_x"), ErrorKind::UnsupportedNode);
}

TEST(Canon, Idempotent) {
  auto rng = make_rng(11, {tag("idem")});
  for (int i = 0; i < 1000; ++i) {
    Expr e = gen::random_expr(rng, 4);
    Expr c = canonicalize(e);
    EXPECT_EQ(canonicalize(c), c) << to_infix(e) << " -> " << to_infix(c);
  }
}

TEST(Canon, PreservesValue) {
  auto rng = make_rng(12, {tag("value")});
  for (int i = 0; i < 500; ++i) {
    Expr e = gen::random_expr(rng, 3);
    Expr c = canonicalize(e);
    expect_same_function(e, c, rng);
    if (HasFatalFailure()) return;
  }
}

TEST(Canon, CommutedOperandsAgree) {
  auto rng = make_rng(13, {tag("commute")});
  for (int i = 0; i < 500; ++i) {
    Expr a = gen::random_expr(rng, 3), b = gen::random_expr(rng, 3);
    EXPECT_EQ(canonicalize(add(a, b)), canonicalize(add(b, a)));
    EXPECT_EQ(canonicalize(mul(a, b)), canonicalize(mul(b, a)));
    EXPECT_EQ(canonicalize(sub(a, b)), canonicalize(add(mul(num(-1), b), a)));
  }
}

TEST(Canon, TermSplitting) {
  auto terms = canonical_terms(canonicalize(P("u_t + 0.5*u*u_x")));
  ASSERT_EQ(terms.size(), 2u);
  auto parts = split_term(terms[0]);
  ASSERT_TRUE(parts.coefficient.has_value());
  EXPECT_EQ(*parts.coefficient, num(0.5));
  EXPECT_FALSE(split_term(terms[1]).coefficient.has_value());
}

TEST(Evaluate, PolynomialJetMatchesFiniteDifferences) {
  PolySurrogate s{{0.3, -0.7, 0.2, 0.5, 0.1, -0.9, 0.4, 0.6}};
  auto u = s.as_field();
  double x = 0.37, t = 0.61, h = 1e-4;
  Jet j = s.jet(x, t, 3, 1);
  EXPECT_NEAR(j.partial(1, 0), (s(x + h, t) - s(x - h, t)) / (2 * h), 1e-7);
  EXPECT_NEAR(j.partial(0, 1), (s(x, t + h) - s(x, t - h)) / (2 * h), 1e-7);
  EXPECT_NEAR(j.partial(2, 0), (s(x + h, t) - 2 * s(x, t) + s(x - h, t)) / (h * h), 1e-5);
  // (u^2)_x = 2 u u_x
  EvalPoint p{x, t, {}};
  EXPECT_NEAR(evaluate(P("(u^2)_x"), p, u), 2 * s(x, t) * j.partial(1, 0), 1e-12);
  EXPECT_NEAR(evaluate(P("(sin(u))_xx"), p, u),
              -std::sin(s(x, t)) * std::pow(j.partial(1, 0), 2) + std::cos(s(x, t)) * j.partial(2, 0), 1e-12);
}
