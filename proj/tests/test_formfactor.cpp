#include <cmath>
#include <optional>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace bethe3;
using testing_support::chain;
using testing_support::desk_chain;
using testing_support::scaled_deviation;

namespace {

const Complex kZ(0.37, 0.21);

/// A second certified solution in the sector of `B`, drawn from other seeds.
std::optional<BaeSolution> partner(const ChainModel<Complex>& m, const BaeSolution& B) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    SolverOptions opt;
    opt.seed = 7919 * seed;
    BaeSolution C;
    try {
      C = solve_bae(m, B.label.a(), B.label.b(), {}, opt);
    } catch (const NoConvergence&) {
      continue;
    }
    bool apart = true;
    for (std::size_t i = 0; i < B.label.a(); ++i)
      for (std::size_t j = 0; j < B.label.a(); ++j)
        if (std::abs(C.label.u[i] - B.label.u[j]) < 1e-4) apart = false;
    for (std::size_t i = 0; i < B.label.b(); ++i)
      for (std::size_t j = 0; j < B.label.b(); ++j)
        if (std::abs(C.label.v[i] - B.label.v[j]) < 1e-4) apart = false;
    if (apart && std::abs(transfer_eigenvalue(m, kZ, C.label) - transfer_eigenvalue(m, kZ, B.label)) > 1e-6)
      return C;
  }
  return std::nullopt;
}

double oracle_scale(const Coords<Complex>& cv, const Coords<Complex>& tb) { return norm2(cv) * norm2(tb); }

}  // namespace

TEST(FormFactor, VacuumGivesTheWeight) {
  const auto m = desk_chain();
  const BaeSolution vac = solve_bae(m, 0, 0);
  for (int s = 1; s <= 3; ++s)
    EXPECT_LT(std::abs(form_factor_same_state(m, vac, s, kZ) - m.lambda(s, kZ)), 1e-13) << s;
}

TEST(FormFactor, SameStateMatchesExplicitVectors) {
  const auto m = desk_chain();
  for (auto [a, b] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{1, 1}, std::pair{2, 1}}) {
    const BaeSolution B = solve_bae(m, a, b);
    const auto cv = build_dual_bethe_vector(m, B.label).coords;
    const auto bv = build_bethe_vector(m, B.label).coords;
    Complex total = 0;
    for (int s = 1; s <= 3; ++s) {
      const auto tb = m.apply(s, s, kZ, bv);
      const Complex got = form_factor_same_state(m, B, s, kZ);
      EXPECT_LT(scaled_deviation(got, dot(cv, tb), oracle_scale(cv, tb)), 1e-7) << a << "," << b << " s=" << s;
      total += got;
    }
    const Complex rule = transfer_eigenvalue(m, kZ, B.label) * dot(cv, bv);
    EXPECT_LT(scaled_deviation(total, rule, norm2(cv) * norm2(bv) * std::abs(transfer_eigenvalue(m, kZ, B.label))), 1e-7);
  }
}

TEST(FormFactor, ThetaDependsOnSOnlyThroughTheLastColumn) {
  const auto m = desk_chain();
  const BaeSolution B = solve_bae(m, 1, 1);
  const auto t1 = theta_matrix(m, B, 1, kZ), t2 = theta_matrix(m, B, 2, kZ), t3 = theta_matrix(m, B, 3, kZ);
  const std::size_t n = t1.rows() - 1;
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_EQ(t1(j, k), t2(j, k));
      EXPECT_EQ(t1(j, k), t3(j, k));
    }
  EXPECT_THROW(theta_matrix(m, B, 4, kZ), DimensionError);
}

TEST(FormFactor, DistinctStatesOnThreeFundamentalSites) {
  // a = 1: prod (u - xi_l + c) = prod (u - xi_l), i.e.
  // 3c u^2 + (3c^2 - 2c S1) u + (c^3 - c^2 S1 + c S2) = 0.
  const std::vector<Complex> xi{0.3, -0.45, 1.1};
  const auto m = chain<Complex>(xi, Complex(1), "fff");
  const double S1 = 0.95, S2 = 0.3 * -0.45 + 0.3 * 1.1 - 0.45 * 1.1;
  const double A = 3, Bq = 3 - 2 * S1, Cq = 1 - S1 + S2;
  const double disc = std::sqrt(Bq * Bq - 4 * A * Cq);
  const auto root = [&](double r) {
    auto s = refine_bae(m, 1, {Complex(r)}, {}, {});
    EXPECT_TRUE(s.has_value());
    EXPECT_LT(std::abs(s->label.u[0] - r), 1e-12);
    return *s;
  };
  const BaeSolution B = root((-Bq + disc) / (2 * A)), C = root((-Bq - disc) / (2 * A));
  const auto cv = build_dual_bethe_vector(m, C.label).coords;
  const auto bv = build_bethe_vector(m, B.label).coords;
  EXPECT_LT(std::abs(dot(cv, bv)) / (norm2(cv) * norm2(bv)), 1e-12);
  Complex total = 0;
  for (int s = 1; s <= 3; ++s) {
    const auto tb = m.apply(s, s, kZ, bv);
    const Complex got = form_factor_distinct_states(m, C, B, s, kZ);
    EXPECT_LT(scaled_deviation(got, dot(cv, tb), oracle_scale(cv, tb)), 1e-9) << s;
    total += got;
  }
  EXPECT_LT(std::abs(total) / (norm2(cv) * norm2(bv)), 1e-9);
}

TEST(FormFactor, DistinctStatesIndependentOfTheSpecialRow) {
  const auto m = desk_chain();
  const BaeSolution B = solve_bae(m, 1, 1);
  const auto C = partner(m, B);
  ASSERT_TRUE(C.has_value());
  const auto cv = build_dual_bethe_vector(m, C->label).coords;
  const auto bv = build_bethe_vector(m, B.label).coords;
  Complex total = 0;
  for (int s = 1; s <= 3; ++s) {
    const auto tb = m.apply(s, s, kZ, bv);
    const Complex want = dot(cv, tb);
    const double scale = oracle_scale(cv, tb);
    const Complex p0 = form_factor_distinct_states(m, *C, B, s, kZ, 0);
    const Complex p1 = form_factor_distinct_states(m, *C, B, s, kZ, 1);
    EXPECT_LT(scaled_deviation(p0, want, scale), 1e-7) << s;
    EXPECT_LT(scaled_deviation(p1, p0, scale), 1e-9) << s;
    total += p0;
  }
  EXPECT_LT(std::abs(total) / (norm2(cv) * norm2(bv)), 1e-7);
}

TEST(FormFactor, KappaDerivativeCrossCheck) {
  const auto m = desk_chain();
  const BaeSolution B = solve_bae(m, 1, 1);
  const auto cv = build_dual_bethe_vector(m, B.label).coords;
  const auto bv = build_bethe_vector(m, B.label).coords;
  for (int s = 1; s <= 3; ++s) {
    const auto tb = m.apply(s, s, kZ, bv);
    const Complex q = q_kappa_cross_check(m, B, s, kZ);
    EXPECT_LT(scaled_deviation(q, dot(cv, tb), oracle_scale(cv, tb)), 1e-5) << s;
  }
  const auto C = partner(m, B);
  ASSERT_TRUE(C.has_value());
  const auto cw = build_dual_bethe_vector(m, C->label).coords;
  const auto tb = m.apply(2, 2, kZ, bv);
  const Complex q = q_kappa_cross_check(m, B, 2, kZ, *C);
  EXPECT_LT(scaled_deviation(q, dot(cw, tb), oracle_scale(cw, tb)), 1e-5);
}

TEST(FormFactor, Failures) {
  const auto m = desk_chain();
  const BaeSolution B = solve_bae(m, 1, 1);
  EXPECT_THROW(form_factor_distinct_states(m, B, B, 1, kZ), OmegaAllZero);
  BaeSolution off = B;
  std::vector<Complex> u = off.label.u.elems();
  u[0] += 0.05;
  off.label.u = ParamSet<Complex>(u);
  EXPECT_THROW(form_factor_same_state(m, off, 1, kZ), NotOnShellError);
  EXPECT_THROW(form_factor_distinct_states(m, off, B, 1, kZ), NotOnShellError);
}

TEST(FormFactor, OracleFormFactorIsExact) {
  const auto m = chain<Rational>({Rational(1, 2), Rational(-7, 3)}, Rational(1), "fd");
  const BetheLabel<Rational> l{ParamSet<Rational>{Rational(9, 4)}, {}};
  const Rational z(11, 5);
  const auto bv = build_bethe_vector(m, l).coords;
  const auto cv = build_dual_bethe_vector(m, l).coords;
  EXPECT_EQ(oracle_form_factor(m, l, l, 2, z), dot(cv, m.apply(2, 2, z, bv)));
}
