#include <random>

#include <gtest/gtest.h>

#include "bethe3/field.hpp"

using namespace bethe3;

TEST(Rational, ParsesAndCanonicalizes) {
  EXPECT_EQ(Rational::parse("3/6"), Rational(1, 2));
  EXPECT_EQ(Rational::parse("-4"), Rational(-4));
  EXPECT_EQ(Rational(2, -4).str(), "-1/2");
  EXPECT_DOUBLE_EQ(Rational(3, 8).to_double(), 0.375);
}

TEST(Rational, DivisionByZeroIsAPole) {
  EXPECT_THROW(Rational(1) / Rational(0), PoleError);
}

TEST(RateKernel, HandValues) {
  const RateKernel<Rational> k2(Rational(2)), k1(Rational(1));
  EXPECT_EQ(k2.g(3, 1), Rational(1));
  EXPECT_EQ(k2.f(1, 3), Rational(0));
  EXPECT_EQ(k1.t(2, 0), Rational(1, 6));
  EXPECT_EQ(k1.h(2, 0), Rational(3));
  EXPECT_EQ(k1(RateKind::g, Rational(2), Rational(0)), Rational(1, 2));
}

TEST(RateKernel, PoleNamesTheFactor) {
  const RateKernel<Rational> k(Rational(1));
  try {
    k.g(Rational(5, 3), Rational(5, 3));
    FAIL() << "expected a pole";
  } catch (const PoleError& e) {
    EXPECT_EQ(e.factor(), "g(x,y)");
  }
  EXPECT_THROW(k.t(Rational(0), Rational(1)), PoleError);
  EXPECT_THROW(k.f_inv(Rational(0), Rational(1)), PoleError);
  EXPECT_EQ(k.h(Rational(4), Rational(4)), Rational(1));
}

TEST(RateKernel, IdentitiesOverRandomSamples) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> num(-50, 50), den(1, 12);
  const RateKernel<Rational> k(Rational(3, 2));
  int checked = 0;
  while (checked < 200) {
    const Rational x(num(rng), den(rng)), y(num(rng), den(rng));
    if (x == y || x - y + k.c() == Rational(0)) continue;
    EXPECT_EQ(k.f(x, y) - Rational(1), k.g(x, y));
    EXPECT_EQ(k.g(x, y) * k.h(x, y), k.f(x, y));
    EXPECT_EQ(k.t(x, y) * k.h(x, y), k.g(x, y));
    EXPECT_EQ(k.g(x, y), -k.g(y, x));
    EXPECT_EQ(k.f_inv(x, y) * k.f(x, y), Rational(1));
    ++checked;
  }
}

TEST(RateKernel, FloatLogDerivative) {
  const RateKernel<Complex> k(Complex(0.7));
  const Complex x(0.4, 0.3), y(-0.2, 0.1), eps(1e-6);
  const Complex fd = (std::log(k.f(x + eps, y)) - std::log(k.f(x - eps, y))) / (2.0 * eps);
  EXPECT_LT(std::abs(fd - k.dlog_f(x, y)), 1e-8);
}

TEST(SetProduct, HandValues) {
  const RateKernel<Rational> k1(Rational(1)), k2(Rational(2));
  const std::vector<Rational> none, five{5}, three{3}, one{1}, pair{4, 6};
  EXPECT_EQ(set_product<Rational>(k1, RateKind::f, none, five), Rational(1));
  EXPECT_EQ(set_product<Rational>(k2, RateKind::g, three, one), Rational(1));
  EXPECT_EQ(set_product<Rational>(k1, RateKind::f, pair, one), Rational(8, 5));
}

TEST(SetProduct, PoleReportsPair) {
  const RateKernel<Rational> k(Rational(1));
  const std::vector<Rational> A{2, 7}, B{7};
  try {
    set_product<Rational>(k, RateKind::g, A, B);
    FAIL() << "expected a pole";
  } catch (const PoleError& e) {
    EXPECT_NE(std::string(e.what()).find("A[1]"), std::string::npos);
  }
}

TEST(FieldTraits, FloatComparisons) {
  EXPECT_TRUE(nearly_equal(Complex(1.0), Complex(1.0 + 1e-12)));
  EXPECT_FALSE(nearly_equal(Complex(1.0), Complex(1.0 + 1e-6)));
  EXPECT_TRUE(nearly_equal(Rational(1, 3), Rational(2, 6)));
  EXPECT_EQ(field_traits<Complex>::from_fraction(1, 4), Complex(0.25));
  EXPECT_THROW(checked_div(Complex(1.0), Complex(0.0)), PoleError);
}
