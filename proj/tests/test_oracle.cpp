#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace bethe3;
using testing_support::chain;
using testing_support::rationals;

namespace {

Matrix<Rational> swap9() {
  Matrix<Rational> P(9, 9);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) P(3 * a + b, 3 * b + a) = Rational(1);
  return P;
}

Coords<Rational> basis(std::size_t dim, std::size_t i) {
  Coords<Rational> e(dim, Rational(0));
  e[i] = Rational(1);
  return e;
}

}  // namespace

TEST(RMatrix, Entries) {
  const RateKernel<Rational> k(Rational(1));
  const Rational x(5, 2), y(-1, 3);
  const auto R = build_r_matrix(k, x, y);
  EXPECT_EQ(R(0, 0), Rational(1) + k.g(x, y));
  EXPECT_EQ(R(3, 1), k.g(x, y));  // e1 (x) e2 -> e2 (x) e1
  EXPECT_EQ(R(1, 1), Rational(1));
  const auto I = build_r_matrix(RateKernel<Rational>(Rational(0)), x, y);
  EXPECT_EQ(I, Matrix<Rational>::identity(9));
  EXPECT_THROW(build_r_matrix(k, x, x), PoleError);
}

TEST(RMatrix, YangBaxterAtRandomPoints) {
  std::mt19937_64 rng(11);
  const RateKernel<Rational> k(Rational(1));
  const auto I3 = Matrix<Rational>::identity(3);
  const auto P23 = kron(I3, swap9());
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = rationals(rng, 3);
    const auto R12 = kron(build_r_matrix(k, p[0], p[1]), I3);
    const auto R13 = P23 * kron(build_r_matrix(k, p[0], p[2]), I3) * P23;
    const auto R23 = kron(I3, build_r_matrix(k, p[1], p[2]));
    EXPECT_EQ(R12 * R13 * R23, R23 * R13 * R12);
  }
}

TEST(Monodromy, SingleSiteIsTheRMatrixBlock) {
  const Rational xi(1, 3), x(7, 2);
  const auto m = chain<Rational>({xi}, Rational(1), "f");
  const RateKernel<Rational> k(Rational(1));
  const auto R = build_r_matrix(k, x, xi);
  // T_ij(x) on one site equals the auxiliary (i,j) block of R(x, xi).
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      const auto T = monodromy_entry(m, i, j, x).to_dense();
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) EXPECT_EQ(T(a, b), R(3 * (i - 1) + a, 3 * (j - 1) + b));
    }
  EXPECT_EQ(m.apply(1, 1, x, m.vacuum()), scaled(k.f(x, xi), m.vacuum()));
}

TEST(Monodromy, LoweringEntriesAnnihilateTheVacuum) {
  std::mt19937_64 rng(5);
  const auto m = chain<Rational>(rationals(rng, 3), Rational(1), "fdf");
  const Rational x(13, 7);
  for (auto [i, j] : {std::pair{2, 1}, std::pair{3, 1}, std::pair{3, 2}})
    EXPECT_TRUE(is_zero_vector(m.apply(i, j, x, m.vacuum())));
  for (auto [i, j] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}})
    EXPECT_FALSE(is_zero_vector(m.apply(i, j, x, m.vacuum())));
}

TEST(Monodromy, PoleNamesTheSite) {
  const auto m = chain<Rational>({Rational(0), Rational(5)}, Rational(1), "ff");
  try {
    m.apply(1, 2, Rational(5), m.vacuum());
    FAIL() << "expected a pole";
  } catch (const PoleError& e) {
    EXPECT_NE(std::string(e.what()).find("site 1"), std::string::npos);
  }
}

TEST(Monodromy, RttComponentsAtRandomPoints) {
  std::mt19937_64 rng(21);
  for (const std::string kinds : {"fd", "ffd"}) {
    const auto xi = rationals(rng, kinds.size());
    const auto m = chain<Rational>(xi, Rational(1), kinds);
    for (int trial = 0; trial < 3; ++trial) {
      const auto p = rationals(rng, 2, xi);
      const Rational g = m.kernel().g(p[0], p[1]);
      auto T = [&](int i, int j, const Rational& x) { return monodromy_entry(m, i, j, x); };
      for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j)
          for (int k = 1; k <= 3; ++k)
            for (int l = 1; l <= 3; ++l) {
              const auto lhs = T(i, k, p[0]) * T(j, l, p[1]) + g * (T(j, k, p[0]) * T(i, l, p[1]));
              const auto rhs = T(j, l, p[1]) * T(i, k, p[0]) + g * (T(j, k, p[1]) * T(i, l, p[0]));
              EXPECT_TRUE((lhs - rhs).is_zero_operator());
            }
    }
  }
}

TEST(Transfer, CommutesAtDifferentPoints) {
  std::mt19937_64 rng(8);
  const auto xi = rationals(rng, 3);
  const auto m = chain<Rational>(xi, Rational(1), "fdd");
  const TwistVector<Rational> tw{Rational(3), Rational(1, 2), Rational(-2)};
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = rationals(rng, 2, xi);
    EXPECT_TRUE(commutator(transfer_matrix(m, p[0]), transfer_matrix(m, p[1])).is_zero_operator());
    EXPECT_TRUE(commutator(transfer_matrix(m, p[0], tw), transfer_matrix(m, p[1], tw)).is_zero_operator());
  }
}

TEST(Vacuum, WeightsMatchProducts) {
  const Rational xi(2, 5), x(-7, 3);
  const auto one = chain<Rational>({xi}, Rational(1), "f");
  const auto w = vacuum_weights(one);
  EXPECT_EQ(w.lambda1(x) / w.lambda2(x), RateKernel<Rational>(Rational(1)).f(x, xi));
  EXPECT_EQ(w.r3(x), Rational(1));

  const auto two = chain<Rational>({Rational(0), Rational(7, 2)}, Rational(1), "df");
  const auto w2 = vacuum_weights(two);
  EXPECT_EQ(w2.r3(x), two.kernel().f(Rational(0), x));
  EXPECT_EQ(w2.r1(x), two.kernel().f(x, Rational(7, 2)));

  const auto free = chain<Rational>({Rational(0), Rational(1, 2)}, Rational(0), "fd");
  const auto w0 = vacuum_weights(free);
  EXPECT_EQ(w0.lambda1(x), Rational(1));
  EXPECT_EQ(w0.lambda3(x), Rational(1));
}

TEST(ChainModel, RejectsDegenerateInhomogeneities) {
  EXPECT_THROW(chain<Rational>({Rational(1), Rational(2)}, Rational(1), "ff"), ModelError);
  EXPECT_THROW(chain<Rational>({Rational(1), Rational(1)}, Rational(1), "ff"), ModelError);
  EXPECT_THROW(ChainModel<Rational>(ParamSet<Rational>{Rational(0), Rational(0)}, Rational(1), {}, true), ModelError);
  EXPECT_NO_THROW(ChainModel<Complex>(ParamSet<Complex>{Complex(0), Complex(0)}, Complex(1), {}, true));
}

TEST(ChainModel, LeftActionIsTheTranspose) {
  std::mt19937_64 rng(4);
  const auto m = chain<Rational>(rationals(rng, 2), Rational(1), "fd");
  const Rational x(9, 4);
  for (std::size_t a = 0; a < m.dim(); a += 2)
    for (std::size_t b = 0; b < m.dim(); b += 3)
      for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j)
          EXPECT_EQ(dot(basis(m.dim(), a), m.apply(i, j, x, basis(m.dim(), b))),
                    dot(m.apply_left(i, j, x, basis(m.dim(), a)), basis(m.dim(), b)));
}

TEST(LocalOperator, SingleSite) {
  const auto m = chain<Rational>({Rational(3, 7)}, Rational(1), "f");
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j)
      EXPECT_TRUE((local_operator(m, 0, i, j) - elementary_at_site<Rational>(1, 0, i, j)).is_zero_operator());
}

TEST(LocalOperator, ReconstructsEverySite) {
  std::mt19937_64 rng(17);
  for (std::size_t L : {2u, 3u}) {
    const auto m = chain<Rational>(rationals(rng, L), Rational(1), std::string(L, 'f'));
    for (std::size_t site = 0; site < L; ++site) {
      auto sum = OperatorMatrix<Rational>(m.dim());
      for (int i = 1; i <= 3; ++i) {
        for (int j = 1; j <= 3; ++j) {
          const auto e = local_operator(m, site, i, j);
          EXPECT_TRUE((e - elementary_at_site<Rational>(L, site, i, j)).is_zero_operator());
          if (i == j) sum = sum + e;
        }
      }
      EXPECT_TRUE((sum - OperatorMatrix<Rational>::identity(m.dim())).is_zero_operator());
    }
  }
  // The second site of two carries I (x) e_12.
  const auto m2 = chain<Rational>({Rational(1, 4), Rational(-5, 3)}, Rational(1), "ff");
  const auto I3 = Matrix<Rational>::identity(3);
  Matrix<Rational> e12(3, 3);
  e12(0, 1) = Rational(1);
  EXPECT_EQ(local_operator(m2, 1, 1, 2).to_dense(), kron(I3, e12));
}

TEST(LocalOperator, NotApplicableOutsideFundamentalChains) {
  const auto d = chain<Rational>({Rational(0), Rational(5, 2)}, Rational(1), "fd");
  EXPECT_THROW(local_operator(d, 0, 1, 1), NotApplicableError);
  const ChainModel<Complex> h(ParamSet<Complex>{Complex(0), Complex(0)}, Complex(1), {}, true);
  EXPECT_THROW(local_operator(h, 0, 1, 1), NotApplicableError);
}
