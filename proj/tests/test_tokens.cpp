#include <gtest/gtest.h>

#include "pdesym/canon.hpp"
#include "pdesym/parse.hpp"
#include "pdesym/tokens.hpp"
#include "random_expr.hpp"

using namespace pdesym;

namespace {

Equation E(const char* s) { return parse_equation(s); }

ErrorKind decode_error(const char* s, Dialect d) {
  try {
    from_tokens(tokenize(s, d));
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

}  // namespace

TEST(Tokens, ManualGolden) {
  Expr e = add(cos(mul(num(1.5), var("x_1"))), sub(pow(var("x_2"), 2), num(2.6)));
  EXPECT_EQ(to_manual_tokens(e).str(), "+ cos × 1.5 x_1 − pow x_2 2 2.6");
}

TEST(Tokens, ManualBurgersTree) {
  // u_t + k u u_x - (eps/pi) u_xx in hand-ordered form
  Expr e = add(u_t(), sub(mul(num(1.0), mul(field(), u_x())), mul(num(0.01 / 3.141592653589793), u_x(2))));
  EXPECT_EQ(to_manual_tokens(e).str(), "+ u_t − × 1 × u u_x × 0.00318 u_xx");
}

TEST(Tokens, CanonicalKdV) {
  auto ts = to_canonical_tokens(E("u*u_x + u_t + 0.0484*u_xxx = 0"));
  EXPECT_EQ(ts.str(),
            "+ + × 1 × u(x,t) ∂ ( u(x,t) , x ) × 1 ∂ ( u(x,t) , t ) "
            "× 0.0484 ∂ ( u(x,t) , ( x , 3 ) )");
}

TEST(Tokens, CanonicalBurgers) {
  auto ts = to_canonical_tokens(E("u_t + 0.5*(u^2)_x = 0.01*u_xx"));
  EXPECT_EQ(ts.str(),
            "+ + × 1 × u(x,t) ∂ ( u(x,t) , x ) × 1 ∂ ( u(x,t) , t ) "
            "× -0.01 ∂ ( u(x,t) , ( x , 2 ) )");
}

TEST(Tokens, CanonicalIsOrderFree) {
  EXPECT_EQ(to_canonical_tokens(E("x - 1 + 1 + y = 0")), to_canonical_tokens(E("y + x = 0")));
  EXPECT_EQ(to_canonical_tokens(E("u_t + 0.955*cos(u)*u_x = 0")),
            to_canonical_tokens(E("u_x*cos(u)*0.955 + u_t = 0")));
}

TEST(Tokens, ManualRoundTrip) {
  auto rng = make_rng(21, {tag("manual")});
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    Expr e = gen::random_expr(rng, 4);
    TokenSeq ts;
    try {
      ts = to_manual_tokens(e);
    } catch (const Error& err) {
      ASSERT_EQ(err.kind(), ErrorKind::UnsupportedNode);
      continue;
    }
    ++checked;
    EXPECT_EQ(from_tokens(ts).residual, e) << ts.str();
  }
  EXPECT_GT(checked, 1000);
}

TEST(Tokens, CanonicalRoundTripIsFixedPoint) {
  auto rng = make_rng(22, {tag("canonical")});
  for (int i = 0; i < 1000; ++i) {
    Expr e = gen::random_expr(rng, 4);
    TokenSeq ts = to_canonical_tokens(e);
    Equation back = from_tokens(ts);
    EXPECT_EQ(to_canonical_tokens(back), ts) << ts.str();
  }
}

TEST(Tokens, DecodeStripsUnitCoefficient) {
  auto back = from_tokens(tokenize("+ × 1 ∂ ( u(x,t) , t ) × 0.5 u(x,t)", Dialect::Canonical));
  EXPECT_EQ(back.residual, add(u_t(), mul(num(0.5), field())));
}

TEST(Tokens, DecodeErrors) {
  EXPECT_EQ(decode_error("+ u", Dialect::ManualOrder), ErrorKind::Decode);
  EXPECT_EQ(decode_error("u u", Dialect::ManualOrder), ErrorKind::Decode);
  EXPECT_EQ(decode_error("+ u foo", Dialect::ManualOrder), ErrorKind::Decode);
  EXPECT_EQ(decode_error("", Dialect::ManualOrder), ErrorKind::Decode);
  EXPECT_EQ(decode_error("+ u_x u", Dialect::Canonical), ErrorKind::Decode);
  EXPECT_EQ(decode_error("∂ ( u(x,t) , x )", Dialect::ManualOrder), ErrorKind::Decode);
  EXPECT_EQ(decode_error("∂ ( u(x,t) , x", Dialect::Canonical), ErrorKind::Decode);
  EXPECT_EQ(decode_error("∂ ( u(x,t) , ( x , 0 ) )", Dialect::Canonical), ErrorKind::Decode);
}

TEST(Tokens, AliasesAccepted) {
  EXPECT_EQ(from_tokens(tokenize("add u_t mul 0.5 u_x", Dialect::ManualOrder)).residual,
            add(u_t(), mul(num(0.5), u_x())));
}

TEST(Tokens, SignificantDigitCheck) {
  EXPECT_TRUE(has_at_most_3_sig_digits("0.955"));
  EXPECT_TRUE(has_at_most_3_sig_digits("-0.00318"));
  EXPECT_TRUE(has_at_most_3_sig_digits("2"));
  EXPECT_FALSE(has_at_most_3_sig_digits("0.9549"));
}
