#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace bethe3;
using testing_support::chain;
using testing_support::desk_chain;

namespace {

BetheLabel<Complex> perturbed(BetheLabel<Complex> l, std::size_t k, Complex h) {
  std::vector<Complex> u = l.u.elems(), v = l.v.elems();
  (k < u.size() ? u[k] : v[k - u.size()]) += h;
  return {ParamSet<Complex>(u), ParamSet<Complex>(v)};
}

}  // namespace

TEST(TransferEigenvalue, VacuumIsTheSumOfWeights) {
  const auto m = desk_chain();
  const Complex x(0.37, 0.21);
  EXPECT_LT(std::abs(transfer_eigenvalue(m, x, BetheLabel<Complex>{}) - (m.r1(x) + 1.0 + m.r3(x))), 1e-14);
  const auto tw = TwistVector<Complex>{Complex(2), Complex(3), Complex(5)};
  EXPECT_LT(std::abs(transfer_eigenvalue(m, x, BetheLabel<Complex>{}, tw) - (2.0 * m.r1(x) + 3.0 + 5.0 * m.r3(x))), 1e-13);
}

TEST(BetheEquations, OffShellLabelsHaveResiduals) {
  const auto m = desk_chain();
  const BetheLabel<Complex> off{ParamSet<Complex>{Complex(0.1, 0.2)}, ParamSet<Complex>{Complex(-0.3, 0.5)}};
  EXPECT_GT(detail::folded_norm(bae_residuals(m, off)), 1e-3);
  double prod = 0;
  for (const auto& r : bae_product_residuals(m, off)) prod = std::max(prod, std::abs(r));
  EXPECT_GT(prod, 1e-3);
}

TEST(BetheEquations, HomogeneousRoot) {
  const ChainModel<Complex> m(ParamSet<Complex>{Complex(0), Complex(0)}, Complex(1), {}, true);
  const BaeSolution s = solve_bae(m, 1, 0);
  ASSERT_EQ(s.label.a(), 1u);
  EXPECT_LT(std::abs(s.label.u[0] + 0.5), 1e-12);
  EXPECT_LT(s.certificate, 1e-10);
}

TEST(BetheEquations, SingleDualRootIsTheMidpoint) {
  // Two dual sites, b = 1: (xi2 - v + c)(xi3 - v + c) = (xi2 - v)(xi3 - v).
  const auto m = chain<Complex>({0.3, -0.45, 1.1}, Complex(1), "fdd");
  const BaeSolution s = solve_bae(m, 0, 1);
  EXPECT_LT(std::abs(s.label.v[0] - 0.825), 1e-12);
  EXPECT_LT(s.residual, 1e-12);
  EXPECT_LT(s.certificate, 1e-8);
}

TEST(BetheEquations, SolutionsAreCertified) {
  const auto m = desk_chain();
  for (auto [a, b] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{1, 1}, std::pair{2, 1}}) {
    const BaeSolution s = solve_bae(m, a, b);
    EXPECT_LT(s.residual, 1e-12) << a << "," << b;
    EXPECT_LT(s.certificate, 1e-8) << a << "," << b;
    double prod = 0;
    for (const auto& r : bae_product_residuals(m, s.label)) prod = std::max(prod, std::abs(r));
    EXPECT_LT(prod, 1e-8);
    EXPECT_LT(bae_partition_form_defect(m, s.label), 1e-8);
  }
}

TEST(BetheEquations, JacobianMatchesFiniteDifferences) {
  const auto m = desk_chain();
  const BetheLabel<Complex> l{ParamSet<Complex>{Complex(0.1, 0.2), Complex(-0.7, 0.4)},
                              ParamSet<Complex>{Complex(-0.3, 0.5)}};
  const auto J = bae_jacobian(m, l);
  const double h = 1e-6;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto up = bae_phi(m, perturbed(l, k, h)), dn = bae_phi(m, perturbed(l, k, -h));
    for (std::size_t j = 0; j < 3; ++j) {
      const Complex fd = (up[j] - dn[j]) / (2 * h);
      EXPECT_LT(std::abs(fd - J(j, k)), 1e-6 * std::max(1.0, std::abs(J(j, k)))) << j << "," << k;
    }
  }
}

TEST(BetheEquations, ContinuationInTheTwist) {
  const auto m = desk_chain();
  const BaeSolution s = solve_bae(m, 1, 1);
  const auto target = TwistVector<Complex>::scalar(Complex(1.1));
  const BaeSolution t = continue_bae(m, s, target);
  EXPECT_LT(t.residual, 1e-12);
  EXPECT_LT(t.certificate, 1e-8);
  double prod = 0;
  for (const auto& r : bae_product_residuals(m, t.label, target)) prod = std::max(prod, std::abs(r));
  EXPECT_LT(prod, 1e-8);
}

TEST(BetheEquations, CoreJacobianOfOneRoot) {
  const auto m = desk_chain();
  const BaeSolution s = solve_bae(m, 1, 0);
  const auto th = theta_core(m, s);
  EXPECT_LT(std::abs(th(0, 0) - m.dlog_r1(s.label.u[0])), 1e-12);
}

TEST(BetheEquations, Failures) {
  const auto m = desk_chain();
  SolverOptions opt;
  opt.restarts = 4;
  EXPECT_THROW(solve_bae(m, 1, 0, {}, opt, std::vector<Complex>{Complex(1), Complex(2)}), CardinalityError);
  const auto tiny = chain<Complex>({0.3}, Complex(1), "f");
  EXPECT_THROW(solve_bae(tiny, 0, 1, {}, opt), NoConvergence);
}
