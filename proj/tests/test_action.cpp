#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace bethe3;
using testing_support::chain;
using testing_support::rationals;
using testing_support::slice;

TEST(MultipleAction, T13OnVacuumIsOneTerm) {
  const auto m = chain<Rational>({Rational(1, 3), Rational(-2)}, Rational(1), "fd");
  const Rational x(5, 2);
  const auto sum = multiple_action(ActionKind::T13, ParamSet<Rational>{x}, BetheLabel<Rational>{}, m);
  ASSERT_EQ(sum.terms.size(), 1u);
  EXPECT_EQ(sum.terms[0].coeff, m.lambda2(x));
  EXPECT_EQ(sum.terms[0].label, (BetheLabel<Rational>{ParamSet<Rational>{x}, ParamSet<Rational>{x}}));
}

TEST(MultipleAction, T12OnVacuumHasUnitCoefficient) {
  // -lambda2(x) K_1(x | x+c) with K_1(x | x+c) = g(x, x+c) = -1.
  const auto m = chain<Rational>({Rational(1, 3), Rational(-2)}, Rational(1), "fd");
  const Rational x(5, 2);
  const auto sum = multiple_action(ActionKind::T12, ParamSet<Rational>{x}, BetheLabel<Rational>{}, m);
  ASSERT_EQ(sum.terms.size(), 1u);
  EXPECT_EQ(sum.terms[0].coeff, m.lambda2(x));
  EXPECT_EQ(sum.terms[0].label, (BetheLabel<Rational>{ParamSet<Rational>{x}, {}}));
  EXPECT_EQ(materialize(sum, m), m.apply(1, 2, x, m.vacuum()));
}

TEST(MultipleAction, T23OnSingleUHasTwoPartitions) {
  const auto m = chain<Rational>({Rational(1, 3), Rational(-2)}, Rational(1), "fd");
  const BetheLabel<Rational> base{ParamSet<Rational>{Rational(7, 4)}, {}};
  const ParamSet<Rational> x{Rational(-11, 3)};
  const auto sum = multiple_action(ActionKind::T23, x, base, m);
  EXPECT_EQ(sum.terms.size(), 2u);
  EXPECT_EQ(materialize(sum, m), apply_action_oracle(ActionKind::T23, x, m, build_bethe_vector(m, base).coords));
}

TEST(MultipleAction, MatchesOperatorProducts) {
  std::mt19937_64 rng(31);
  for (const std::string kinds : {"fd", "dfd"}) {
    const auto xi = rationals(rng, kinds.size());
    const auto m = chain<Rational>(xi, Rational(1), kinds);
    for (ActionKind kind : {ActionKind::T13, ActionKind::T12, ActionKind::T23})
      for (std::size_t n = 1; n <= 2; ++n)
        for (auto [a, b] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{1, 1}, std::pair{2, 1}}) {
          const auto p = rationals(rng, a + b + n, xi);
          const BetheLabel<Rational> base{slice(p, 0, a), slice(p, a, b)};
          const auto x = slice(p, a + b, n);
          const auto want = apply_action_oracle(kind, x, m, build_bethe_vector(m, base).coords);
          EXPECT_EQ(materialize(multiple_action(kind, x, base, m), m), want)
              << to_string(kind) << " n=" << n << " a=" << a << " b=" << b << " " << kinds;
        }
  }
}

TEST(MultipleAction, Errors) {
  const auto m = chain<Rational>({Rational(1, 3), Rational(-2)}, Rational(1), "fd");
  const BetheLabel<Rational> base{ParamSet<Rational>{Rational(7, 4)}, ParamSet<Rational>{Rational(9)}};
  EXPECT_THROW(multiple_action(ActionKind::T12, ParamSet<Rational>{Rational(9)}, base, m), OverlapError);
  EXPECT_THROW(multiple_action(ActionKind::T23, ParamSet<Rational>{Rational(7, 4)}, base, m), OverlapError);
  EXPECT_THROW(multiple_action(ActionKind::T13, ParamSet<Rational>{}, base, m), CardinalityError);
}

TEST(WeightedStateSum, MergesAndPrunes) {
  WeightedStateSum<Rational> s;
  const BetheLabel<Rational> l{ParamSet<Rational>{Rational(1)}, {}};
  s.add(Rational(2), l);
  s.add(Rational(-2), l);
  EXPECT_TRUE(s.terms.empty());
  s.add(Rational(0), l);
  EXPECT_TRUE(s.terms.empty());
  s.add(Rational(1, 2), l);
  s.add(Rational(1, 2), l);
  ASSERT_EQ(s.terms.size(), 1u);
  EXPECT_EQ(s.terms[0].coeff, Rational(1));
}
