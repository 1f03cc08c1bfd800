#pragma once

// Form factors of T_ss(z) between on-shell Bethe vectors: the same-state
// determinant with Theta^(s), the distinct-state determinant with N^(s,p),
// and the numeric d/dkappa_s cross-check of Q_kappa.

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bethe3/bethe.hpp"
#include "bethe3/errors.hpp"
#include "bethe3/field.hpp"
#include "bethe3/linalg.hpp"
#include "bethe3/onshell.hpp"
#include "bethe3/scalar.hpp"

namespace bethe3 {

namespace detail {

inline void require_on_shell(const ChainModel<Complex>& model, const BaeSolution& sol, double tol) {
  const auto r = bae_residuals(model, sol.label, TwistVector<Complex>::untwisted(), sol.branch);
  for (const auto& x : r)
    if (std::abs(x) > tol) throw NotOnShellError("state is not on-shell (residual " + std::to_string(std::abs(x)) + ")");
}

inline int kdelta(int i, int j) { return i == j ? 1 : 0; }

}  // namespace detail

/// theta_{j,k} = d Phi_j / d(u_k, v_k) at the roots.
inline Matrix<Complex> theta_core(const ChainModel<Complex>& model, const BaeSolution& sol,
                                  double onshell_tol = 1e-8) {
  detail::require_on_shell(model, sol, onshell_tol);
  return bae_jacobian(model, sol.label);
}

/// Theta^(s)(z): theta bordered by the gradient of tau(z) (last row), the
/// column delta_{s1}-delta_{s2} / delta_{s3}-delta_{s2}, and d tau_kappa / d kappa_s.
inline Matrix<Complex> theta_matrix(const ChainModel<Complex>& model, const BaeSolution& sol, int s,
                                    const Complex& z, double onshell_tol = 1e-8) {
  if (s < 1 || s > 3) throw DimensionError("s must be 1, 2 or 3");
  const std::size_t a = sol.label.a(), b = sol.label.b(), n = a + b;
  const Matrix<Complex> core = theta_core(model, sol, onshell_tol);
  Matrix<Complex> th(n + 1, n + 1);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) th(j, k) = core(j, k);
  const auto grad = transfer_eigenvalue_gradient(model, z, sol.label);
  for (std::size_t k = 0; k < n; ++k) th(n, k) = grad[k];
  for (std::size_t j = 0; j < a; ++j) th(j, n) = detail::kdelta(s, 1) - detail::kdelta(s, 2);
  for (std::size_t j = 0; j < b; ++j) th(a + j, n) = detail::kdelta(s, 3) - detail::kdelta(s, 2);
  th(n, n) = transfer_eigenvalue_kappa_derivative(model, z, sol.label, s);
  return th;
}

/// <C(u;v)|T_ss(z)|B(u;v)> = (-1)^a c^{a+b} f(v,u) prod_j f(u_j,u_j') prod_k f(v_k,v_k') det Theta^(s)(z).
inline Complex form_factor_same_state(const ChainModel<Complex>& model, const BaeSolution& sol, int s,
                                      const Complex& z, double onshell_tol = 1e-8) {
  const auto& k = model.kernel();
  const auto& u = sol.label.u;
  const auto& v = sol.label.v;
  Complex pre = (u.size() % 2 ? -1.0 : 1.0) * std::pow(k.c(), static_cast<double>(u.size() + v.size())) *
                f_product(k, v, u);
  for (std::size_t j = 0; j < u.size(); ++j) pre *= f_product(k, ParamSet<Complex>{u[j]}, u.without(j));
  for (std::size_t j = 0; j < v.size(); ++j) pre *= f_product(k, ParamSet<Complex>{v[j]}, v.without(j));
  return pre * determinant(theta_matrix(model, sol, s, z, onshell_tol));
}

/// Omega_k = prod_m (uC_k - uB_m) / prod_{l!=k} (uC_k - uC_l) for k <= a and
/// prod_m (vB_k - vC_m) / prod_{l!=k} (vB_k - vB_l) for the b remaining entries.
inline std::vector<Complex> omega_values(const BetheLabel<Complex>& C, const BetheLabel<Complex>& B) {
  std::vector<Complex> om;
  for (std::size_t k = 0; k < C.a(); ++k) {
    Complex num = 1, den = 1;
    for (const auto& x : B.u) num *= C.u[k] - x;
    for (std::size_t l = 0; l < C.a(); ++l)
      if (l != k) den *= C.u[k] - C.u[l];
    om.push_back(num / den);
  }
  for (std::size_t k = 0; k < B.b(); ++k) {
    Complex num = 1, den = 1;
    for (const auto& x : C.v) num *= B.v[k] - x;
    for (std::size_t l = 0; l < B.b(); ++l)
      if (l != k) den *= B.v[k] - B.v[l];
    om.push_back(num / den);
  }
  return om;
}

struct OmegaSelector {
  std::vector<Complex> omega;
  std::size_t p = 0;
};

/// Picks p with the largest |Omega_p|; throws OmegaAllZero when none is usable.
inline OmegaSelector select_omega(const BetheLabel<Complex>& C, const BetheLabel<Complex>& B,
                                  double tol = 1e-12) {
  OmegaSelector sel{omega_values(C, B), 0};
  double best = -1;
  for (std::size_t k = 0; k < sel.omega.size(); ++k)
    if (std::abs(sel.omega[k]) > best) {
      best = std::abs(sel.omega[k]);
      sel.p = k;
    }
  if (sel.omega.empty() || best <= tol) throw OmegaAllZero("every Omega_k vanishes");
  return sel;
}

/// N^(s,p): rows j != p from the tau-derivatives at w_k = (uB_1..uB_a, vC_1..vC_b),
/// row p from Y^(s)_k.
inline Matrix<Complex> nsp_matrix(const ChainModel<Complex>& model, const BetheLabel<Complex>& C,
                                  const BetheLabel<Complex>& B, int s, std::size_t p) {
  const auto& k = model.kernel();
  const Complex c = k.c();
  const auto& uC = C.u;
  const auto& vC = C.v;
  const auto& uB = B.u;
  const auto& vB = B.v;
  const std::size_t a = uB.size(), b = vB.size(), n = a + b;
  if (p >= n) throw DimensionError("special row index out of range");
  auto h = [&](const ParamSet<Complex>& X, const ParamSet<Complex>& Y) {
    return set_product(k, RateKind::h, X.span(), Y.span());
  };
  auto ginv = [&](const ParamSet<Complex>& X, const ParamSet<Complex>& Y) {
    return pair_product<Complex>(X.span(), Y.span(), [&](const Complex& x, const Complex& y) { return k.g_inv(x, y); });
  };
  std::vector<Complex> w(uB.begin(), uB.end());
  w.insert(w.end(), vC.begin(), vC.end());
  Matrix<Complex> N(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    const Complex wk = w[col];
    const ParamSet<Complex> W{wk};
    for (std::size_t j = 0; j < a; ++j) {
      if (j == p) continue;
      const Complex uj = uC[j];
      const ParamSet<Complex> ur = uC.without(j);
      const Complex G = ginv(W, uC) * ginv(vC, W);
      const Complex t1 = G == Complex{} ? Complex{}
                                         : model.r1(wk) * f_product(k, ur, W) * (-c / ((uj - wk) * (uj - wk))) * G;
      const Complex t2 = h(W, ur) / (wk - uj) * h(vC, W);
      N(j, col) = c * (t1 + t2);
    }
    for (std::size_t j = 0; j < b; ++j) {
      if (a + j == p) continue;
      const Complex vj = vB[j];
      const ParamSet<Complex> vr = vB.without(j);
      const Complex t1 = -h(vr, W) / (vj - wk) * h(W, uB);
      const Complex G = ginv(vB, W) * ginv(W, uB);
      const Complex t2 = G == Complex{} ? Complex{}
                                         : model.r3(wk) * f_product(k, W, vr) * c / ((wk - vj) * (wk - vj)) * G;
      N(a + j, col) = -c * (t1 + t2);
    }
    Complex Y;
    const double d1 = detail::kdelta(s, 1), d2 = detail::kdelta(s, 2), d3 = detail::kdelta(s, 3);
    if (col < a) {
      Y = c * (d1 - d2) + (d1 - d3) * wk * (1.0 - f_product(k, vB, W) / f_product(k, vC, W));
    } else {
      Y = c * (d3 - d2) + (d1 - d3) * (wk + c) * (1.0 - f_product(k, W, uC) / f_product(k, W, uB));
    }
    N(p, col) = h(vC, W) * h(W, uB) * Y;
  }
  return N;
}

/// <C|T_ss(z)|B> for distinct on-shell states:
///   (tau(z|C) - tau(z|B))/Omega_p t(vC,uB) Delta'_a(uC) Delta_a(uB) Delta'_b(vC) Delta_b(vB) det N^(s,p).
/// p defaults to the entry with the largest |Omega_p|.
inline Complex form_factor_distinct_states(const ChainModel<Complex>& model, const BaeSolution& solC,
                                           const BaeSolution& solB, int s, const Complex& z,
                                           std::optional<std::size_t> p = std::nullopt,
                                           double onshell_tol = 1e-8) {
  if (s < 1 || s > 3) throw DimensionError("s must be 1, 2 or 3");
  detail::require_on_shell(model, solC, onshell_tol);
  detail::require_on_shell(model, solB, onshell_tol);
  const auto& C = solC.label;
  const auto& B = solB.label;
  if (C.a() != B.a() || C.b() != B.b()) throw CardinalityError("form factor needs equal (a,b)");
  const auto& k = model.kernel();
  const OmegaSelector sel = select_omega(C, B);
  const std::size_t row = p.value_or(sel.p);
  if (row >= sel.omega.size() || std::abs(sel.omega[row]) <= 1e-12)
    throw OmegaAllZero("Omega_p vanishes for the requested p");
  const Complex dtau = transfer_eigenvalue(model, z, C) - transfer_eigenvalue(model, z, B);
  return dtau / sel.omega[row] * set_product(k, RateKind::t, C.v.span(), B.u.span()) *
         delta_prime(k, C.u) * delta(k, B.u) * delta_prime(k, C.v) * delta(k, B.v) *
         determinant(nsp_matrix(model, C, B, s, row));
}

/// Direct oracle value <C|T_ss(z)|B> / lambda_2(z).
template <FieldScalar T>
T oracle_form_factor(const ChainModel<T>& model, const BetheLabel<T>& C, const BetheLabel<T>& B, int s,
                     const T& z) {
  const Coords<T> cv = build_dual_bethe_vector(model, C).coords;
  const Coords<T> bv = build_bethe_vector(model, B).coords;
  return dot(cv, model.apply(s, s, z, bv)) / model.lambda2(z);
}

/// How the scalar product inside Q_kappa is evaluated.
enum class ScalarRoute { automatic, reshetikhin, oracle };

/// d Q_kappa(z) / d kappa_s at kappa = 1 by a central difference, where
///   Q_kappa = (tau_kappa(z|C_kappa) - tau(z|B)) <C_kappa|B>
/// and C_kappa follows the twisted roots continued from solC (solB when absent).
/// The automatic route uses Reshetikhin's formula for distinct states and the
/// explicit vectors for the same state, where the formula's sets nearly collide.
inline Complex q_kappa_cross_check(const ChainModel<Complex>& model, const BaeSolution& solB, int s,
                                   const Complex& z, const std::optional<BaeSolution>& solC = std::nullopt,
                                   double step = 1e-4, ScalarRoute route = ScalarRoute::automatic,
                                   SolverOptions opt = {}) {
  if (s < 1 || s > 3) throw DimensionError("s must be 1, 2 or 3");
  const BaeSolution& start = solC ? *solC : solB;
  const bool same = !solC;
  if (route == ScalarRoute::automatic) route = same ? ScalarRoute::oracle : ScalarRoute::reshetikhin;
  const Coords<Complex> bv = build_bethe_vector(model, solB.label).coords;
  const Complex tauB = transfer_eigenvalue(model, z, solB.label);
  auto Q = [&](double eps) {
    const auto tw = TwistVector<Complex>::along(s, Complex(1.0 + eps));
    const BaeSolution ck = start.label.a() + start.label.b() == 0 ? start : continue_bae(model, start, tw, 4, opt);
    Complex S;
    if (route == ScalarRoute::reshetikhin)
      S = reshetikhin_scalar_product(model, ck.label, solB.label);
    else
      S = dot(build_dual_bethe_vector(model, ck.label).coords, bv);
    return (transfer_eigenvalue(model, z, ck.label, tw) - tauB) * S;
  };
  return (Q(step) - Q(-step)) / (2.0 * step);
}

}  // namespace bethe3
