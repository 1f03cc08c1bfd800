#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace bethe3;
using testing_support::chain;
using testing_support::rationals;
using testing_support::slice;

TEST(IzerginKorepin, HandValues) {
  const RateKernel<Rational> k(Rational(1));
  EXPECT_EQ(ik_determinant(k, ParamSet<Rational>{}, ParamSet<Rational>{}), Rational(1));
  EXPECT_EQ(ik_determinant(k, ParamSet<Rational>{Rational(2)}, ParamSet<Rational>{Rational(0)}), Rational(1, 2));
  // Delta'(x) Delta(y) h(x,y) det t(x_i,y_j) = (1/2)(-1)(360)(-1/720).
  const ParamSet<Rational> x{Rational(3), Rational(5)}, y{Rational(0), Rational(1)};
  EXPECT_EQ(ik_determinant(k, x, y), Rational(1, 4));
  EXPECT_EQ(ik_determinant_literal(k, x, y), Rational(1, 4));
}

TEST(IzerginKorepin, SymmetricAndMatchesLiteralForm) {
  std::mt19937_64 rng(2);
  const RateKernel<Rational> k(Rational(1));
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto p = rationals(rng, 2 * n);
    const auto x = slice(p, 0, n), y = slice(p, n, n);
    const Rational K = ik_determinant(k, x, y);
    EXPECT_EQ(K, ik_determinant_literal(k, x, y));
    std::vector<Rational> xr(x.begin(), x.end());
    std::reverse(xr.begin(), xr.end());
    EXPECT_EQ(ik_determinant(k, ParamSet<Rational>(xr), y), K);
  }
  EXPECT_THROW(ik_determinant(k, ParamSet<Rational>{Rational(1)}, ParamSet<Rational>{}), DimensionError);
}

TEST(BetheVector, EmptyLabelIsTheVacuum) {
  std::mt19937_64 rng(1);
  const auto m = testing_support::rational_chain(rng, "fd");
  for (auto var : kAllVariants) EXPECT_EQ(build_bethe_vector(m, BetheLabel<Rational>{}, var).coords, m.vacuum());
  EXPECT_EQ(build_dual_bethe_vector(m, BetheLabel<Rational>{}).coords, m.vacuum());
}

TEST(BetheVector, SingleUIsOneCreationOperator) {
  std::mt19937_64 rng(6);
  const auto xi = rationals(rng, 2);
  const auto m = chain<Rational>(xi, Rational(1), "fd");
  const Rational u = rationals(rng, 1, xi)[0];
  const BetheLabel<Rational> label{ParamSet<Rational>{u}, {}};
  const auto want = scaled(Rational(1) / m.lambda2(u), m.apply(1, 2, u, m.vacuum()));
  EXPECT_EQ(build_bethe_vector(m, label).coords, want);
  const auto dual = scaled(Rational(1) / m.lambda2(u), m.apply_left(2, 1, u, m.vacuum()));
  EXPECT_EQ(build_dual_bethe_vector(m, label).coords, dual);
}

TEST(BetheVector, AllRepresentationsAgree) {
  std::mt19937_64 rng(9);
  for (const std::string kinds : {"fd", "ffd", "fdfd"}) {
    const auto xi = rationals(rng, kinds.size());
    const auto m = chain<Rational>(xi, Rational(1), kinds);
    for (auto [a, b] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{1, 2}, std::pair{2, 2}}) {
      const auto p = rationals(rng, a + b, xi);
      const BetheLabel<Rational> label{slice(p, 0, a), slice(p, a, b)};
      const auto ref = build_bethe_vector(m, label, BetheVariant::explicit1);
      for (auto var : kAllVariants)
        EXPECT_EQ(build_bethe_vector(m, label, var).coords, ref.coords) << to_string(var) << " " << kinds;
    }
  }
}

TEST(BetheVector, SymmetricInEachSet) {
  std::mt19937_64 rng(12);
  const auto xi = rationals(rng, 3);
  const auto m = chain<Rational>(xi, Rational(1), "fdf");
  const auto p = rationals(rng, 4, xi);
  const BetheLabel<Rational> l1{slice(p, 0, 2), slice(p, 2, 2)};
  const BetheLabel<Rational> l2{ParamSet<Rational>{p[1], p[0]}, ParamSet<Rational>{p[3], p[2]}};
  EXPECT_EQ(build_bethe_vector(m, l1).coords, build_bethe_vector(m, l2).coords);
}

TEST(BetheVector, ParallelBuildIsIdentical) {
  std::mt19937_64 rng(13);
  const auto xi = rationals(rng, 4);
  const auto m = chain<Rational>(xi, Rational(1), "fdfd");
  const auto p = rationals(rng, 4, xi);
  const BetheLabel<Rational> label{slice(p, 0, 2), slice(p, 2, 2)};
  EXPECT_EQ(build_bethe_vector(m, label, BetheVariant::explicit2, 1).coords,
            build_bethe_vector(m, label, BetheVariant::explicit2, 4).coords);
}

TEST(BetheVector, FlagsTrivialWeightSpaces) {
  const auto m = chain<Rational>({Rational(1, 2)}, Rational(1), "f");
  const BetheLabel<Rational> only_v{{}, ParamSet<Rational>{Rational(7)}};
  const auto s = build_bethe_vector(m, only_v);
  EXPECT_TRUE(s.representation_too_small);
  EXPECT_TRUE(is_zero_vector(s.coords));
  const BetheLabel<Rational> uv{ParamSet<Rational>{Rational(-3)}, ParamSet<Rational>{Rational(7)}};
  EXPECT_FALSE(build_bethe_vector(m, uv).representation_too_small);
}

TEST(BetheVector, Errors) {
  const auto m = chain<Rational>({Rational(1, 2), Rational(-9, 2)}, Rational(1), "fd");
  const BetheLabel<Rational> dup{ParamSet<Rational>{Rational(3), Rational(3)}, {}};
  EXPECT_THROW(build_bethe_vector(m, dup), DegenerateLabelError);
  const BetheLabel<Rational> ok{ParamSet<Rational>{Rational(3)}, {}};
  EXPECT_THROW(build_dual_bethe_vector(m, ok, BetheVariant::recursionA), NotApplicableError);
  const BetheLabel<Rational> pole{ParamSet<Rational>{Rational(1, 2)}, {}};
  EXPECT_THROW(build_bethe_vector(m, pole), PoleError);
}
