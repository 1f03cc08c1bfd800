#pragma once

// Highest coefficients Z_{a,b}, residue identities, Reshetikhin's scalar
// product and the single-determinant twisted scalar product.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <numeric>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bethe3/bethe.hpp"
#include "bethe3/errors.hpp"
#include "bethe3/field.hpp"
#include "bethe3/interpolation.hpp"
#include "bethe3/linalg.hpp"
#include "bethe3/onshell.hpp"
#include "bethe3/params.hpp"

namespace bethe3 {

/// Arguments of Z_{a,b}(t;x|s;y), |t| = |x| = a and |s| = |y| = b.
template <FieldScalar T>
struct HighestCoeffArgs {
  ParamSet<T> t, x, s, y;
  std::size_t a() const noexcept { return t.size(); }
  std::size_t b() const noexcept { return s.size(); }
  void validate() const {
    if (x.size() != t.size() || y.size() != s.size())
      throw CardinalityError("highest coefficient needs |t| = |x| and |s| = |y|");
  }
};

enum class ZStrategy { sumW, sumEta, contour };

inline const char* to_string(ZStrategy s) {
  switch (s) {
    case ZStrategy::sumW: return "sumW";
    case ZStrategy::sumEta: return "sumEta";
    case ZStrategy::contour: return "contour";
  }
  return "?";
}

namespace detail {

template <FieldScalar T>
T sign_pow(std::size_t n) {
  return n % 2 ? from_int<T>(-1) : from_int<T>(1);
}

// Z = (-1)^b sum_{w=(s,x), |w_I|=b} K(s-c|w_I) K(w_II|t) K(y|w_I) f(w_I,w_II).
template <FieldScalar T>
T z_sum_w(const RateKernel<T>& k, const HighestCoeffArgs<T>& z) {
  const ParamSet<T> w = z.s.joined(z.x);
  const ParamSet<T> sc = z.s.shifted(-k.c());
  const auto parts = enumerate_bipartitions(w.size(), z.b());
  const T total = canonical_sum<T>(parts.size(), [&](std::size_t i) {
    auto [wI, wII] = split(w, parts[i]);
    return ik_determinant(k, sc, wI) * ik_determinant(k, wII, z.t) * ik_determinant(k, z.y, wI) *
           f_product(k, wI, wII);
  }, 1);
  return sign_pow<T>(z.b()) * total;
}

// Z = (-1)^a f(y,x) f(s,t) sum_{eta=(y+c,t), |eta_I|=a} K(t-c|eta_I) K(x|eta_I) K(eta_II-c|s) f(eta_I,eta_II).
template <FieldScalar T>
T z_sum_eta(const RateKernel<T>& k, const HighestCoeffArgs<T>& z) {
  const ParamSet<T> eta = z.y.shifted(k.c()).joined(z.t);
  const ParamSet<T> tc = z.t.shifted(-k.c());
  const auto parts = enumerate_bipartitions(eta.size(), z.a());
  const T total = canonical_sum<T>(parts.size(), [&](std::size_t i) {
    auto [eI, eII] = split(eta, parts[i]);
    return ik_determinant(k, tc, eI) * ik_determinant(k, z.x, eI) *
           ik_determinant(k, eII.shifted(-k.c()), z.s) * f_product(k, eI, eII);
  }, 1);
  return sign_pow<T>(z.a()) * f_product(k, z.y, z.x) * f_product(k, z.s, z.t) * total;
}

// Sum of residues of the b-fold contour integral over the poles z_j = w_k of
// f(z,w), w = (s,x). Each injective assignment sigma contributes its residue;
// the factor c from each residue cancels the 1/c in the measure, and 1/b!
// removes the ordering multiplicity. Non-injective assignments vanish through
// prod f^{-1}(z_j,z_m).
template <FieldScalar T>
T z_contour(const RateKernel<T>& k, const HighestCoeffArgs<T>& z) {
  if constexpr (!field_traits<T>::exact) {
    throw StrategyError("the contour representation is evaluated in exact mode only");
  } else {
    const ParamSet<T> w = z.s.joined(z.x);
    if (!w.pairwise_distinct())
      throw StrategyError("contour poles at w are not simple: s and x share an element");
    const std::size_t b = z.b(), n = w.size();
    const ParamSet<T> sc = z.s.shifted(-k.c());
    T total = from_int<T>(0);
    std::vector<std::size_t> sigma(b);
    std::vector<bool> used(n, false);
    std::function<void(std::size_t)> rec = [&](std::size_t j) {
      if (j == b) {
        std::vector<T> zs;
        for (std::size_t i : sigma) zs.push_back(w[i]);
        const ParamSet<T> zz(zs);
        T val = ik_determinant(k, sc, zz) * ik_determinant(k, z.y, zz) *
                ik_determinant(k, w, z.t.joined(zz.shifted(k.c())));
        for (std::size_t jj = 0; jj < b; ++jj) {
          for (std::size_t kk = 0; kk < n; ++kk)
            if (kk != sigma[jj]) val *= k.f(zz[jj], w[kk]);
          for (std::size_t m = 0; m < b; ++m)
            if (m != jj) val *= k.f_inv(zz[jj], zz[m]);
        }
        total += val;
        return;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        used[i] = true;
        sigma[j] = i;
        rec(j + 1);
        used[i] = false;
      }
    };
    rec(0);
    T fact = from_int<T>(1);
    for (std::size_t i = 2; i <= b; ++i) fact *= from_int<T>(static_cast<long>(i));
    return total / fact;
  }
}

}  // namespace detail

/// Z_{a,b}(t;x|s;y) by the requested representation.
template <FieldScalar T>
T highest_coefficient(const RateKernel<T>& k, const HighestCoeffArgs<T>& args,
                      ZStrategy strategy = ZStrategy::sumW) {
  args.validate();
  switch (strategy) {
    case ZStrategy::sumW: return detail::z_sum_w(k, args);
    case ZStrategy::sumEta: return detail::z_sum_eta(k, args);
    case ZStrategy::contour: return detail::z_contour(k, args);
  }
  throw StrategyError("unknown strategy");
}

enum class ResiduePole { at_y, at_t };

inline const char* to_string(ResiduePole p) { return p == ResiduePole::at_y ? "at_y" : "at_t"; }

/// Res Z at s_b = y_b (at_y) or s_b = t_a (at_t), extracted from Z alone by
/// exact rational reconstruction of d -> d * Z(s_b = pole + d).
template <FieldScalar T>
T highest_coeff_residue(const RateKernel<T>& k, const HighestCoeffArgs<T>& args, ResiduePole which,
                        std::size_t max_degree = 0) {
  static_assert(field_traits<T>::exact, "residues are extracted in exact mode");
  args.validate();
  if (args.b() == 0) throw CardinalityError("residue in s_b needs b >= 1");
  if (which == ResiduePole::at_t && args.a() == 0) throw CardinalityError("residue at t_a needs a >= 1");
  const T pole = which == ResiduePole::at_y ? args.y[args.b() - 1] : args.t[args.a() - 1];
  if (max_degree == 0) max_degree = 2 * (args.a() + args.b()) + 4;
  std::function<T(const T&)> fn = [&](const T& d) {
    std::vector<T> s = args.s.elems();
    s.back() = pole + d;
    HighestCoeffArgs<T> shifted{args.t, args.x, ParamSet<T>(s), args.y};
    return d * highest_coefficient(k, shifted, ZStrategy::sumW);
  };
  return rational_value_at_zero(fn, max_degree);
}

/// Right-hand sides of the residue identities:
///   at_y: -c f(y_b, s') f(y', y_b) f(y_b, x) Z_{a,b-1}(t; x | s'; y')
///   at_t:  c f(s', t_a) f(t_a, t') sum_p g(x_p, t_a) f(x'_p, x_p) Z_{a-1,b}(t'; x'_p | {s', x_p}; y)
/// where primes remove the last element (or x_p). The at_t identity uses the full y.
template <FieldScalar T>
T highest_coeff_residue_formula(const RateKernel<T>& k, const HighestCoeffArgs<T>& args,
                                ResiduePole which) {
  args.validate();
  const std::size_t a = args.a(), b = args.b();
  if (b == 0) throw CardinalityError("residue in s_b needs b >= 1");
  const ParamSet<T> s_rest = args.s.without(b - 1);
  if (which == ResiduePole::at_y) {
    const T yb = args.y[b - 1];
    const ParamSet<T> Y{yb}, y_rest = args.y.without(b - 1);
    return -k.c() * f_product(k, Y, s_rest) * f_product(k, y_rest, Y) * f_product(k, Y, args.x) *
           highest_coefficient(k, HighestCoeffArgs<T>{args.t, args.x, s_rest, y_rest});
  }
  if (a == 0) throw CardinalityError("residue at t_a needs a >= 1");
  const T ta = args.t[a - 1];
  const ParamSet<T> Tt{ta}, t_rest = args.t.without(a - 1);
  T sum = from_int<T>(0);
  for (std::size_t p = 0; p < a; ++p) {
    const ParamSet<T> xp{args.x[p]}, x_rest = args.x.without(p);
    sum += k.g(args.x[p], ta) * f_product(k, x_rest, xp) *
           highest_coefficient(k, HighestCoeffArgs<T>{t_rest, x_rest, s_rest.with(args.x[p]), args.y});
  }
  return k.c() * f_product(k, s_rest, Tt) * f_product(k, Tt, t_rest) * sum;
}

/// Number of terms in Reshetikhin's double partition sum: C(2a,a) C(2b,b).
inline std::size_t reshetikhin_term_count(std::size_t a, std::size_t b) {
  return joint_partitions(a, a).size() * joint_partitions(b, b).size();
}

template <FieldScalar T>
struct ReshetikhinResult {
  T value;
  std::size_t terms = 0;
};

/// Reshetikhin's sum exactly as printed:
///   sum r1(uB_I) r1(uC_II) r3(vB_I) r3(vC_II) f(uC_I,uC_II) f(uB_II,uB_I) f(vC_II,vC_I)
///       f(vB_I,vB_II) f(vC_I,uC_I) f(vB_II,uB_II) Z(uC_II;uB_II|vC_I;vB_I) Z(uB_I;uC_I|vB_II;vC_II),
/// with |uB_I| = |uC_I| and |vB_I| = |vC_I|. `terms` counts evaluated terms.
template <FieldScalar T>
ReshetikhinResult<T> reshetikhin_sum_counted(const ChainModel<T>& model, const BetheLabel<T>& C,
                                             const BetheLabel<T>& B,
                                             unsigned threads = default_threads()) {
  if (C.a() != B.a() || C.b() != B.b())
    throw CardinalityError("scalar product needs equal (a,b) on both sides");
  const auto& k = model.kernel();
  const auto pu = joint_partitions(B.a(), C.a());
  const auto pv = joint_partitions(B.b(), C.b());
  std::atomic<std::size_t> counter{0};
  auto r1p = [&](const ParamSet<T>& s) {
    T acc = from_int<T>(1);
    for (const T& x : s) acc *= model.r1(x);
    return acc;
  };
  auto r3p = [&](const ParamSet<T>& s) {
    T acc = from_int<T>(1);
    for (const T& x : s) acc *= model.r3(x);
    return acc;
  };
  ReshetikhinResult<T> out;
  out.value = canonical_sum<T>(
      pu.size() * pv.size(),
      [&](std::size_t idx) -> T {
        counter.fetch_add(1, std::memory_order_relaxed);
        const auto& ju = pu[idx / pv.size()];
        const auto& jv = pv[idx % pv.size()];
        auto [uBI, uBII] = split(B.u, ju.u);
        auto [uCI, uCII] = split(C.u, ju.v);
        auto [vBI, vBII] = split(B.v, jv.u);
        auto [vCI, vCII] = split(C.v, jv.v);
        try {
          T term = r1p(uBI) * r1p(uCII) * r3p(vBI) * r3p(vCII);
          term *= f_product(k, uCI, uCII) * f_product(k, uBII, uBI) * f_product(k, vCII, vCI) *
                  f_product(k, vBI, vBII) * f_product(k, vCI, uCI) * f_product(k, vBII, uBII);
          if (is_zero(term)) return term;
          term *= highest_coefficient(k, HighestCoeffArgs<T>{uCII, uBII, vCI, vBI});
          if (is_zero(term)) return term;
          return term * highest_coefficient(k, HighestCoeffArgs<T>{uBI, uCI, vBII, vCII});
        } catch (const PoleError& e) {
          throw PoleError(e.factor(), "in Reshetikhin term #" + std::to_string(idx));
        }
      },
      threads);
  out.terms = counter.load();
  return out;
}

template <FieldScalar T>
T reshetikhin_sum(const ChainModel<T>& model, const BetheLabel<T>& C, const BetheLabel<T>& B,
                  unsigned threads = default_threads()) {
  return reshetikhin_sum_counted(model, C, B, threads).value;
}

/// <C(uC;vC)|B(uB;vB)> for the Bethe vectors of this library: the printed sum
/// divided by f(vC,uC) f(vB,uB), the normalization of the explicit formulas.
template <FieldScalar T>
T reshetikhin_scalar_product(const ChainModel<T>& model, const BetheLabel<T>& C,
                             const BetheLabel<T>& B, unsigned threads = default_threads()) {
  const auto& k = model.kernel();
  return reshetikhin_sum(model, C, B, threads) /
         (f_product(k, C.v, C.u) * f_product(k, B.v, B.u));
}

/// Delta'_n(x) = prod_{j>k} g(x_j,x_k).
template <FieldScalar T>
T delta_prime(const RateKernel<T>& k, const ParamSet<T>& x) {
  T acc = from_int<T>(1);
  for (std::size_t j = 0; j < x.size(); ++j)
    for (std::size_t l = 0; l < j; ++l) acc *= k.g(x[j], x[l]);
  return acc;
}

/// Delta_n(y) = prod_{j<k} g(y_j,y_k).
template <FieldScalar T>
T delta(const RateKernel<T>& k, const ParamSet<T>& y) {
  T acc = from_int<T>(1);
  for (std::size_t j = 0; j < y.size(); ++j)
    for (std::size_t l = j + 1; l < y.size(); ++l) acc *= k.g(y[j], y[l]);
  return acc;
}

/// The (a+b)x(a+b) matrix N of the twisted scalar product, blocks
/// N^(u,u) (a x a), N^(u,v) (a x b), N^(v,u) (b x a), N^(v,v) (b x b).
template <FieldScalar T>
struct TwistedNMatrix {
  Matrix<T> m;
  T kappa;
  std::size_t a = 0, b = 0;
};

template <FieldScalar T>
TwistedNMatrix<T> twisted_n_matrix(const RateKernel<T>& k, const BetheLabel<T>& C,
                                   const BetheLabel<T>& B, const T& kappa) {
  const auto& uC = C.u;
  const auto& vC = C.v;
  const auto& uB = B.u;
  const auto& vB = B.v;
  const std::size_t a = uB.size(), b = vB.size();
  auto h = [&](const ParamSet<T>& X, const ParamSet<T>& Y) {
    return set_product(k, RateKind::h, X.span(), Y.span());
  };
  TwistedNMatrix<T> N{Matrix<T>(a + b, a + b), kappa, a, b};
  for (std::size_t j = 0; j < a; ++j) {
    for (std::size_t l = 0; l < a; ++l) {
      const ParamSet<T> U{uB[l]};
      N.m(j, l) = h(vC, U) * h(U, uC) *
                  (kappa * k.t(uB[l], uC[j]) +
                   k.t(uC[j], uB[l]) * f_product(k, vB, U) / f_product(k, vC, U) * h(uC, U) * h(U, uB) /
                       (h(U, uC) * h(uB, U)));
    }
    for (std::size_t l = 0; l < b; ++l) {
      const ParamSet<T> V{vC[l]};
      N.m(j, a + l) = kappa * k.t(vC[l], uC[j]) * h(V, uC) * h(vC, V);
    }
  }
  for (std::size_t j = 0; j < b; ++j) {
    for (std::size_t l = 0; l < a; ++l) {
      const ParamSet<T> U{uB[l]};
      N.m(a + j, l) = k.t(vB[j], uB[l]) * h(vB, U) * h(U, uB);
    }
    for (std::size_t l = 0; l < b; ++l) {
      const ParamSet<T> V{vC[l]};
      N.m(a + j, a + l) = h(V, uB) * h(vB, V) *
                          (k.t(vB[j], vC[l]) + kappa * k.t(vC[l], vB[j]) * f_product(k, V, uC) /
                                                   f_product(k, V, uB) * h(vC, V) * h(V, vB) /
                                                   (h(V, vC) * h(vB, V)));
    }
  }
  return N;
}

/// <C_kappa(uC;vC)|B(uB;vB)> with C twisted on-shell for diag(1,kappa,1) and B
/// on-shell: t(vC,uB) Delta'_a(uC) Delta_a(uB) Delta'_b(vC) Delta_b(vB) det N,
/// i.e. the printed expression divided by f(vC,uC) f(vB,uB).
template <FieldScalar T>
T twisted_scalar_product_det(const ChainModel<T>& model, const BetheLabel<T>& C,
                             const BetheLabel<T>& B, const T& kappa, double onshell_tol = 1e-8) {
  if (C.a() != B.a() || C.b() != B.b())
    throw CardinalityError("scalar product needs equal (a,b) on both sides");
  for (const T& p : C.u)
    for (const T& q : B.u)
      if (nearly_equal(p, q)) throw NotApplicableError("u^C and u^B share an element");
  for (const T& p : C.v)
    for (const T& q : B.v)
      if (nearly_equal(p, q)) throw NotApplicableError("v^C and v^B share an element");
  auto check = [&](const BetheLabel<T>& L, const TwistVector<T>& tw, const char* who) {
    for (const T& r : bae_product_residuals(model, L, tw))
      if (field_traits<T>::magnitude(r) > onshell_tol)
        throw NotOnShellError(std::string(who) + " does not satisfy its Bethe equations");
  };
  check(B, TwistVector<T>::untwisted(), "B");
  check(C, TwistVector<T>::scalar(kappa), "C");
  const auto& k = model.kernel();
  const auto N = twisted_n_matrix(k, C, B, kappa);
  return set_product(k, RateKind::t, C.v.span(), B.u.span()) * delta_prime(k, C.u) * delta(k, B.u) *
         delta_prime(k, C.v) * delta(k, B.v) * determinant(N.m);
}

/// Oracle scalar product <C|B> from explicit vectors.
template <FieldScalar T>
T oracle_scalar_product(const ChainModel<T>& model, const BetheLabel<T>& C, const BetheLabel<T>& B) {
  return dot(build_dual_bethe_vector(model, C).coords, build_bethe_vector(model, B).coords);
}

}  // namespace bethe3
