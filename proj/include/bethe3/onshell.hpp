#pragma once

// Transfer-matrix eigenvalues, Bethe equations in product and logarithmic
// form, a damped Newton solver for (twisted) roots and on-shell certification.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bethe3/bethe.hpp"
#include "bethe3/errors.hpp"
#include "bethe3/field.hpp"
#include "bethe3/linalg.hpp"
#include "bethe3/oracle.hpp"
#include "bethe3/params.hpp"

namespace bethe3 {

/// tau_k(x|u;v) = k1 r1(x) f(u,x) + k2 f(x,u) f(v,x) + k3 r3(x) f(x,v).
template <FieldScalar T>
T transfer_eigenvalue(const ChainModel<T>& model, const T& x, const BetheLabel<T>& label,
                      const TwistVector<T>& tw = TwistVector<T>::untwisted()) {
  const auto& k = model.kernel();
  const ParamSet<T> X{x};
  return tw.kappa1 * model.r1(x) * f_product(k, label.u, X) +
         tw.kappa2 * f_product(k, X, label.u) * f_product(k, label.v, X) +
         tw.kappa3 * model.r3(x) * f_product(k, X, label.v);
}

/// d tau / d kappa_s at kappa = 1: the s-th of the three terms of tau.
template <FieldScalar T>
T transfer_eigenvalue_kappa_derivative(const ChainModel<T>& model, const T& x,
                                       const BetheLabel<T>& label, int s) {
  return transfer_eigenvalue(model, x, label, TwistVector<T>::along(s, from_int<T>(1)) ) -
         transfer_eigenvalue(model, x, label, TwistVector<T>::along(s, from_int<T>(0)));
}

/// Gradient of tau(x|u;v) (untwisted) with respect to (u_1..u_a, v_1..v_b).
template <FieldScalar T>
std::vector<T> transfer_eigenvalue_gradient(const ChainModel<T>& model, const T& x,
                                            const BetheLabel<T>& label) {
  const auto& k = model.kernel();
  const ParamSet<T> X{x};
  const T t1 = model.r1(x) * f_product(k, label.u, X);
  const T t2 = f_product(k, X, label.u) * f_product(k, label.v, X);
  const T t3 = model.r3(x) * f_product(k, X, label.v);
  std::vector<T> grad;
  for (const T& u : label.u) grad.push_back(t1 * k.dlog_f(u, x) - t2 * k.dlog_f(x, u));
  for (const T& v : label.v) grad.push_back(t2 * k.dlog_f(v, x) - t3 * k.dlog_f(x, v));
  return grad;
}

/// Product-form Bethe equations, one entry per root:
///   r1(u_j) f(u_j',u_j)/(f(u_j,u_j') f(v,u_j)) - k2/k1  and
///   r3(v_j) f(v_j,v_j')/(f(v_j',v_j) f(v_j,u)) - k2/k3   (primes: the set without that root).
template <FieldScalar T>
std::vector<T> bae_product_residuals(const ChainModel<T>& model, const BetheLabel<T>& label,
                                     const TwistVector<T>& tw = TwistVector<T>::untwisted()) {
  const auto& k = model.kernel();
  std::vector<T> out;
  for (std::size_t j = 0; j < label.a(); ++j) {
    const ParamSet<T> uj{label.u[j]}, rest = label.u.without(j);
    out.push_back(model.r1(label.u[j]) * f_product(k, rest, uj) /
                      (f_product(k, uj, rest) * f_product(k, label.v, uj)) -
                  tw.kappa2 / tw.kappa1);
  }
  for (std::size_t j = 0; j < label.b(); ++j) {
    const ParamSet<T> vj{label.v[j]}, rest = label.v.without(j);
    out.push_back(model.r3(label.v[j]) * f_product(k, vj, rest) /
                      (f_product(k, rest, vj) * f_product(k, vj, label.u)) -
                  tw.kappa2 / tw.kappa3);
  }
  return out;
}

/// The partition form r1(u_I) = (k2/k1)^{|I|} f(u_I,u_II)/f(u_II,u_I) f(v,u_I) and its
/// v-analogue, checked over every bipartition; returns the largest relative defect.
template <FieldScalar T>
double bae_partition_form_defect(const ChainModel<T>& model, const BetheLabel<T>& label,
                                 const TwistVector<T>& tw = TwistVector<T>::untwisted()) {
  const auto& k = model.kernel();
  double worst = 0;
  auto rel = [](const T& lhs, const T& rhs) {
    const double scale = std::max({1.0, field_traits<T>::magnitude(lhs), field_traits<T>::magnitude(rhs)});
    return field_traits<T>::magnitude(lhs - rhs) / scale;
  };
  for (std::size_t n = 1; n <= label.a(); ++n)
    for (const auto& bp : enumerate_bipartitions(label.a(), n)) {
      auto [I, II] = split(label.u, bp);
      T lhs = from_int<T>(1), pw = from_int<T>(1);
      for (const T& x : I) {
        lhs *= model.r1(x);
        pw *= tw.kappa2 / tw.kappa1;
      }
      worst = std::max(worst, rel(lhs, pw * f_product(k, I, II) / f_product(k, II, I) *
                                           f_product(k, label.v, I)));
    }
  for (std::size_t n = 1; n <= label.b(); ++n)
    for (const auto& bp : enumerate_bipartitions(label.b(), n)) {
      auto [I, II] = split(label.v, bp);
      T lhs = from_int<T>(1), pw = from_int<T>(1);
      for (const T& x : I) {
        lhs *= model.r3(x);
        pw *= tw.kappa2 / tw.kappa3;
      }
      worst = std::max(worst, rel(lhs, pw * f_product(k, II, I) / f_product(k, I, II) *
                                           f_product(k, I, label.u)));
    }
  return worst;
}

/// Branch integers (l_1..l_a) and (m_1..m_b) of the logarithmic equations.
struct BranchIntegers {
  std::vector<long> ell;
  std::vector<long> m;
  friend bool operator==(const BranchIntegers&, const BranchIntegers&) = default;
};

/// Phi_1..Phi_{a+b}: each logarithm of a product is the sum of principal
/// logarithms of its factors.
inline std::vector<Complex> bae_phi(const ChainModel<Complex>& model, const BetheLabel<Complex>& label) {
  const auto& k = model.kernel();
  const auto& u = label.u;
  const auto& v = label.v;
  std::vector<Complex> phi;
  auto lf = [&](const Complex& x, const Complex& y) { return std::log(k.f(x, y)); };
  for (std::size_t j = 0; j < u.size(); ++j) {
    Complex p = 0;
    for (std::size_t l = 0; l < model.length(); ++l)
      if (model.kinds()[l] == SiteKind::fundamental) p += lf(u[j], model.xi()[l]);
    for (std::size_t m = 0; m < u.size(); ++m)
      if (m != j) p += lf(u[m], u[j]) - lf(u[j], u[m]);
    for (const Complex& w : v) p -= lf(w, u[j]);
    phi.push_back(p);
  }
  for (std::size_t j = 0; j < v.size(); ++j) {
    Complex p = 0;
    for (std::size_t l = 0; l < model.length(); ++l)
      if (model.kinds()[l] == SiteKind::dual) p += lf(model.xi()[l], v[j]);
    for (std::size_t m = 0; m < v.size(); ++m)
      if (m != j) p += lf(v[j], v[m]) - lf(v[m], v[j]);
    for (const Complex& w : u) p -= lf(v[j], w);
    phi.push_back(p);
  }
  return phi;
}

/// Right-hand sides log k2 - log k1 + 2 pi i l_j and log k2 - log k3 + 2 pi i m_j.
inline std::vector<Complex> bae_targets(std::size_t a, std::size_t b, const TwistVector<Complex>& tw,
                                        const BranchIntegers& br) {
  const Complex two_pi_i(0, 2 * std::numbers::pi);
  std::vector<Complex> out;
  for (std::size_t j = 0; j < a; ++j)
    out.push_back(std::log(tw.kappa2) - std::log(tw.kappa1) +
                  two_pi_i * static_cast<double>(j < br.ell.size() ? br.ell[j] : 0));
  for (std::size_t j = 0; j < b; ++j)
    out.push_back(std::log(tw.kappa2) - std::log(tw.kappa3) +
                  two_pi_i * static_cast<double>(j < br.m.size() ? br.m[j] : 0));
  return out;
}

/// Phi - target on the given branch.
inline std::vector<Complex> bae_residuals(const ChainModel<Complex>& model,
                                          const BetheLabel<Complex>& label,
                                          const TwistVector<Complex>& tw = TwistVector<Complex>::untwisted(),
                                          const BranchIntegers& br = {}) {
  auto phi = bae_phi(model, label);
  const auto tg = bae_targets(label.a(), label.b(), tw, br);
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= tg[i];
  return phi;
}

/// The branch integers for which the residual of each equation is smallest.
inline BranchIntegers infer_branch(const ChainModel<Complex>& model, const BetheLabel<Complex>& label,
                                   const TwistVector<Complex>& tw) {
  const auto r = bae_residuals(model, label, tw);
  BranchIntegers br;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const long n = std::lround(r[i].imag() / (2 * std::numbers::pi));
    (i < label.a() ? br.ell : br.m).push_back(n);
  }
  return br;
}

/// Jacobian d Phi_j / d(u_1..u_a, v_1..v_b), analytic.
template <FieldScalar T>
Matrix<T> bae_jacobian(const ChainModel<T>& model, const BetheLabel<T>& label) {
  const auto& k = model.kernel();
  const auto& u = label.u;
  const auto& v = label.v;
  const std::size_t a = u.size(), b = v.size();
  auto D = [&](const T& x, const T& y) { return k.dlog_f(x, y); };
  Matrix<T> J(a + b, a + b);
  for (std::size_t j = 0; j < a; ++j) {
    T diag = model.dlog_r1(u[j]);
    for (std::size_t m = 0; m < a; ++m) {
      if (m == j) continue;
      const T s = D(u[j], u[m]) + D(u[m], u[j]);
      diag -= s;
      J(j, m) = s;
    }
    for (std::size_t i = 0; i < b; ++i) {
      diag += D(v[i], u[j]);
      J(j, a + i) = -D(v[i], u[j]);
    }
    J(j, j) = diag;
  }
  for (std::size_t j = 0; j < b; ++j) {
    T diag = model.dlog_r3(v[j]);
    for (std::size_t m = 0; m < b; ++m) {
      if (m == j) continue;
      const T s = D(v[m], v[j]) + D(v[j], v[m]);
      diag += s;
      J(a + j, a + m) = -s;
    }
    for (std::size_t i = 0; i < a; ++i) {
      diag -= D(v[j], u[i]);
      J(a + j, i) = D(v[j], u[i]);
    }
    J(a + j, a + j) = diag;
  }
  return J;
}

struct BaeSolution {
  BetheLabel<Complex> label;
  BranchIntegers branch;
  double residual = 0;     ///< max |Phi - target|
  double certificate = 0;  ///< max relative eigenvector defect at the sampled points
  TwistVector<Complex> twist;
  std::size_t iterations = 0;
  std::size_t attempts = 0;
};

struct SolverOptions {
  std::size_t restarts = 32;
  std::size_t max_iterations = 100;
  double tolerance = 1e-12;
  double certificate_tolerance = 1e-8;
  double escape_radius = 1e3;
  double separation = 1e-6;
  std::uint64_t seed = 0;
  /// Required branch; empty means any branch is accepted.
  std::optional<BranchIntegers> branch;
};

namespace detail {

inline BetheLabel<Complex> label_from(const std::vector<Complex>& z, std::size_t a) {
  return {ParamSet<Complex>(std::vector<Complex>(z.begin(), z.begin() + static_cast<long>(a))),
          ParamSet<Complex>(std::vector<Complex>(z.begin() + static_cast<long>(a), z.end()))};
}

inline double folded_norm(const std::vector<Complex>& r) {
  double m = 0;
  for (const auto& x : r) m = std::max(m, std::abs(x));
  return m;
}

// Residual folded onto the nearest branch (imaginary parts reduced mod 2 pi).
inline std::vector<Complex> folded_residual(const ChainModel<Complex>& model,
                                            const BetheLabel<Complex>& label,
                                            const TwistVector<Complex>& tw) {
  auto r = bae_residuals(model, label, tw);
  for (auto& x : r)
    x -= Complex(0, 2 * std::numbers::pi * std::round(x.imag() / (2 * std::numbers::pi)));
  return r;
}

// Damped Newton from z; returns the converged point or nullopt.
inline std::optional<std::vector<Complex>> newton(const ChainModel<Complex>& model, std::vector<Complex> z,
                                                  std::size_t a, const TwistVector<Complex>& tw,
                                                  const SolverOptions& opt, std::size_t& iters) {
  const std::size_t n = z.size();
  for (iters = 0; iters <= opt.max_iterations; ++iters) {
    std::vector<Complex> r;
    Matrix<Complex> J;
    try {
      const auto label = label_from(z, a);
      r = folded_residual(model, label, tw);
      if (folded_norm(r) < opt.tolerance) return z;
      if (iters == opt.max_iterations) return std::nullopt;
      J = bae_jacobian(model, label);
    } catch (const PoleError&) {
      return std::nullopt;
    }
    auto step = solve_linear(J, r);
    if (!step) return std::nullopt;
    const double r0 = folded_norm(r);
    double lam = 1.0;
    std::vector<Complex> zn(n);
    while (true) {
      for (std::size_t i = 0; i < n; ++i) zn[i] = z[i] - lam * (*step)[i];
      try {
        if (folded_norm(folded_residual(model, label_from(zn, a), tw)) < r0) break;
      } catch (const PoleError&) {
      }
      lam /= 2;
      if (lam < 1e-4) break;
    }
    z = zn;
    for (const auto& x : z)
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag()) || std::abs(x) > opt.escape_radius)
        return std::nullopt;
  }
  return std::nullopt;
}

// Bethe equations with denominators cleared, L_j - (k2/k1) R_j and
// L_j - (k2/k3) R_j. Newton on this polynomial system converges from far more
// starting points than the logarithmic form; its roots are then polished there.
inline std::vector<Complex> polynomial_residual(const ChainModel<Complex>& model,
                                                const std::vector<Complex>& z, std::size_t a,
                                                const TwistVector<Complex>& tw) {
  const std::size_t n = z.size(), b = n - a;
  const Complex c = model.c();
  std::vector<Complex> r;
  r.reserve(n);
  for (std::size_t j = 0; j < a; ++j) {
    Complex L = 1, R = 1;
    const Complex u = z[j];
    for (std::size_t l = 0; l < model.length(); ++l)
      if (model.kinds()[l] == SiteKind::fundamental) {
        L *= u - model.xi()[l] + c;
        R *= u - model.xi()[l];
      }
    for (std::size_t q = 0; q < a; ++q)
      if (q != j) {
        L *= -(z[q] - u + c);
        R *= u - z[q] + c;
      }
    for (std::size_t i = 0; i < b; ++i) {
      L *= z[a + i] - u;
      R *= z[a + i] - u + c;
    }
    r.push_back(L - tw.kappa2 / tw.kappa1 * R);
  }
  for (std::size_t j = 0; j < b; ++j) {
    Complex L = 1, R = 1;
    const Complex v = z[a + j];
    for (std::size_t l = 0; l < model.length(); ++l)
      if (model.kinds()[l] == SiteKind::dual) {
        L *= model.xi()[l] - v + c;
        R *= model.xi()[l] - v;
      }
    for (std::size_t q = 0; q < b; ++q)
      if (q != j) {
        L *= -(v - z[a + q] + c);
        R *= z[a + q] - v + c;
      }
    for (std::size_t i = 0; i < a; ++i) {
      L *= v - z[i];
      R *= v - z[i] + c;
    }
    r.push_back(L - tw.kappa2 / tw.kappa3 * R);
  }
  return r;
}

// Damped Newton on the polynomial form with a central-difference Jacobian.
inline std::optional<std::vector<Complex>> polynomial_newton(const ChainModel<Complex>& model,
                                                             std::vector<Complex> z, std::size_t a,
                                                             const TwistVector<Complex>& tw,
                                                             const SolverOptions& opt) {
  const std::size_t n = z.size();
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    const auto r = polynomial_residual(model, z, a, tw);
    const double r0 = folded_norm(r);
    if (r0 < 1e-10) return z;
    Matrix<Complex> J(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      auto zp = z, zm = z;
      const double h = 1e-6 * std::max(1.0, std::abs(z[k]));
      zp[k] += h;
      zm[k] -= h;
      const auto rp = polynomial_residual(model, zp, a, tw);
      const auto rm = polynomial_residual(model, zm, a, tw);
      for (std::size_t i = 0; i < n; ++i) J(i, k) = (rp[i] - rm[i]) / (2 * h);
    }
    auto step = solve_linear(J, r);
    if (!step) return std::nullopt;
    double lam = 1.0;
    std::vector<Complex> zn(n);
    while (true) {
      for (std::size_t i = 0; i < n; ++i) zn[i] = z[i] - lam * (*step)[i];
      if (folded_norm(polynomial_residual(model, zn, a, tw)) < r0 || lam < 1e-3) break;
      lam /= 2;
    }
    z = zn;
    for (const auto& x : z)
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag()) || std::abs(x) > opt.escape_radius)
        return std::nullopt;
  }
  return std::nullopt;
}

inline bool roots_admissible(const ChainModel<Complex>& model, const std::vector<Complex>& z,
                             std::size_t a, double sep) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      // u and v roots may not coincide with each other either (poles of f(v,u)).
      if (std::abs(z[i] - z[j]) < sep) return false;
    }
    for (const auto& x : model.xi())
      if (std::abs(z[i] - x) < sep) return false;
  }
  (void)a;
  return true;
}

}  // namespace detail

/// Sample points used for the eigenvector certificate.
inline std::vector<Complex> certificate_points() {
  return {Complex(0.37, 0.21), Complex(-0.83, 0.44), Complex(1.29, -0.67)};
}

/// max_x |t_k(x)B - tau_k(x)B| / (|tau_k(x)| |B|) over certificate points.
/// Throws DegenerateRoots if the Bethe vector vanishes.
inline double eigenvector_defect(const ChainModel<Complex>& model, const BetheLabel<Complex>& label,
                                 const TwistVector<Complex>& tw) {
  const Coords<Complex> B = build_bethe_vector(model, label).coords;
  const double nb = norm2(B);
  if (nb < 1e-10) throw DegenerateRoots("Bethe vector vanishes at the roots");
  double worst = 0;
  for (const Complex& x : certificate_points()) {
    const Complex tau = transfer_eigenvalue(model, x, label, tw);
    Coords<Complex> tb = model.apply_transfer(x, B, tw);
    axpy(-tau, B, tb);
    worst = std::max(worst, norm2(tb) / (std::max(1.0, std::abs(tau)) * nb));
  }
  return worst;
}

/// Refines a guess with Newton and certifies it; nullopt if either fails.
inline std::optional<BaeSolution> refine_bae(const ChainModel<Complex>& model, std::size_t a,
                                             const std::vector<Complex>& guess,
                                             const TwistVector<Complex>& tw, const SolverOptions& opt) {
  std::size_t iters = 0;
  const auto seed = detail::polynomial_newton(model, guess, a, tw, opt);
  auto z = detail::newton(model, seed.value_or(guess), a, tw, opt, iters);
  if (!z || !detail::roots_admissible(model, *z, a, opt.separation)) return std::nullopt;
  BaeSolution sol;
  sol.label = detail::label_from(*z, a);
  sol.twist = tw;
  sol.branch = infer_branch(model, sol.label, tw);
  if (opt.branch && !(sol.branch == *opt.branch)) return std::nullopt;
  sol.residual = detail::folded_norm(bae_residuals(model, sol.label, tw, sol.branch));
  sol.iterations = iters;
  try {
    sol.certificate = eigenvector_defect(model, sol.label, tw);
  } catch (const DegenerateRoots&) {
    return std::nullopt;
  }
  if (sol.certificate > opt.certificate_tolerance) return std::nullopt;
  return sol;
}

/// Solves the (twisted) Bethe equations for a roots u and b roots v. Starts
/// from initial_guess when given, then from seeded random points, and returns
/// the first certified solution.
inline BaeSolution solve_bae(const ChainModel<Complex>& model, std::size_t a, std::size_t b,
                             const TwistVector<Complex>& tw = TwistVector<Complex>::untwisted(),
                             const SolverOptions& opt = {},
                             const std::optional<std::vector<Complex>>& initial_guess = std::nullopt) {
  const std::size_t n = a + b;
  if (initial_guess && initial_guess->size() != n)
    throw CardinalityError("initial guess must have a+b entries");
  if (n == 0) {
    BaeSolution sol;
    sol.twist = tw;
    sol.certificate = eigenvector_defect(model, {}, tw);
    return sol;
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> re(0.0, 1.5), im(0.0, 0.7);
  std::size_t attempts = 0;
  if (initial_guess) {
    ++attempts;
    if (auto sol = refine_bae(model, a, *initial_guess, tw, opt)) {
      sol->attempts = attempts;
      return *sol;
    }
  }
  for (std::size_t r = 0; r < opt.restarts; ++r) {
    std::vector<Complex> z(n);
    for (auto& x : z) x = Complex(re(rng), im(rng));
    ++attempts;
    if (auto sol = refine_bae(model, a, z, tw, opt)) {
      sol->attempts = attempts;
      return *sol;
    }
  }
  throw NoConvergence("no certified Bethe roots for (a,b)=(" + std::to_string(a) + "," +
                      std::to_string(b) + ") after " + std::to_string(attempts) + " attempts");
}

/// Tracks a solution along a twist path in `steps` increments of Newton.
inline BaeSolution continue_bae(const ChainModel<Complex>& model, const BaeSolution& start,
                                const TwistVector<Complex>& target, std::size_t steps = 8,
                                SolverOptions opt = {}) {
  std::vector<Complex> z(start.label.u.begin(), start.label.u.end());
  z.insert(z.end(), start.label.v.begin(), start.label.v.end());
  const std::size_t a = start.label.a();
  opt.branch.reset();
  BaeSolution cur = start;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double w = static_cast<double>(s) / static_cast<double>(steps);
    TwistVector<Complex> tw{start.twist.kappa1 + w * (target.kappa1 - start.twist.kappa1),
                            start.twist.kappa2 + w * (target.kappa2 - start.twist.kappa2),
                            start.twist.kappa3 + w * (target.kappa3 - start.twist.kappa3)};
    auto next = refine_bae(model, a, z, tw, opt);
    if (!next) throw ContinuationFailure("lost the root path at step " + std::to_string(s));
    cur = *next;
    z.assign(cur.label.u.begin(), cur.label.u.end());
    z.insert(z.end(), cur.label.v.begin(), cur.label.v.end());
  }
  return cur;
}

}  // namespace bethe3
