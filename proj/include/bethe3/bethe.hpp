#pragma once

// Izergin-Korepin determinant and Bethe vectors: four explicit partition-sum
// representations, two recursions, and the dual (covector) construction.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "bethe3/errors.hpp"
#include "bethe3/field.hpp"
#include "bethe3/linalg.hpp"
#include "bethe3/oracle.hpp"
#include "bethe3/params.hpp"

namespace bethe3 {

namespace detail {

template <FieldScalar T>
T ik_prefactor(const RateKernel<T>& k, const ParamSet<T>& x, const ParamSet<T>& y) {
  T pre = from_int<T>(1);
  for (std::size_t l = 0; l < x.size(); ++l)
    for (std::size_t m = l + 1; m < x.size(); ++m) pre *= k.g(x[l], x[m]) * k.g(y[m], y[l]);
  return pre;
}

template <FieldScalar T>
void require_same_size(const ParamSet<T>& x, const ParamSet<T>& y) {
  if (x.size() != y.size())
    throw DimensionError("IK determinant needs |x| = |y|, got " + std::to_string(x.size()) +
                         " and " + std::to_string(y.size()));
}

}  // namespace detail

/// K_k(x|y), evaluated as prefactor * det[g(x_i,y_j) prod_{m!=j} h(x_i,y_m)].
/// Equal to prefactor * h(x,y) * det t(x_i,y_j) wherever the latter is finite,
/// and regular where some x_i - y_j = -c.
template <FieldScalar T>
T ik_determinant(const RateKernel<T>& k, const ParamSet<T>& x, const ParamSet<T>& y) {
  detail::require_same_size(x, y);
  const std::size_t n = x.size();
  Matrix<T> m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T e = k.g(x[i], y[j]);
      for (std::size_t l = 0; l < n; ++l)
        if (l != j) e *= k.h(x[i], y[l]);
      m(i, j) = e;
    }
  return detail::ik_prefactor(k, x, y) * determinant(m);
}

/// The defining expression prefactor * h(x,y) * det t(x_i,y_j), term for term.
template <FieldScalar T>
T ik_determinant_literal(const RateKernel<T>& k, const ParamSet<T>& x, const ParamSet<T>& y) {
  detail::require_same_size(x, y);
  const std::size_t n = x.size();
  Matrix<T> m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = k.t(x[i], y[j]);
  return detail::ik_prefactor(k, x, y) * set_product(k, RateKind::h, x.span(), y.span()) *
         determinant(m);
}

/// K_k(x|y) / f(x,y) in the regular form prefactor * det[h^{-1}(x_i,y_j) prod_{m!=j} g^{-1}(x_i,y_m)];
/// finite at x_i = y_j.
template <FieldScalar T>
T ik_over_f(const RateKernel<T>& k, const ParamSet<T>& x, const ParamSet<T>& y) {
  detail::require_same_size(x, y);
  const std::size_t n = x.size();
  Matrix<T> m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T e = k.h_inv(x[i], y[j]);
      for (std::size_t l = 0; l < n; ++l)
        if (l != j) e *= k.g_inv(x[i], y[l]);
      m(i, j) = e;
    }
  return detail::ik_prefactor(k, x, y) * determinant(m);
}

template <FieldScalar T>
T f_inv_product(const RateKernel<T>& k, const ParamSet<T>& A, const ParamSet<T>& B) {
  return pair_product<T>(A.span(), B.span(), [&](const T& a, const T& b) { return k.f_inv(a, b); });
}

template <FieldScalar T>
T f_product(const RateKernel<T>& k, const ParamSet<T>& A, const ParamSet<T>& B) {
  return set_product(k, RateKind::f, A.span(), B.span());
}

template <FieldScalar T>
struct BetheLabel {
  ParamSet<T> u;
  ParamSet<T> v;
  std::size_t a() const noexcept { return u.size(); }
  std::size_t b() const noexcept { return v.size(); }
  friend bool operator==(const BetheLabel&, const BetheLabel&) = default;
};

template <FieldScalar T>
struct StateVector {
  Coords<T> coords;
  std::optional<BetheLabel<T>> label;
  /// Set when the requested weight space of the chain is {0}.
  bool representation_too_small = false;
};

enum class BetheVariant { explicit1, explicit2, explicit3, explicit4, recursionA, recursionB };

inline const char* to_string(BetheVariant v) {
  switch (v) {
    case BetheVariant::explicit1: return "explicit1";
    case BetheVariant::explicit2: return "explicit2";
    case BetheVariant::explicit3: return "explicit3";
    case BetheVariant::explicit4: return "explicit4";
    case BetheVariant::recursionA: return "recursionA";
    case BetheVariant::recursionB: return "recursionB";
  }
  return "?";
}

inline constexpr BetheVariant kAllVariants[] = {
    BetheVariant::explicit1, BetheVariant::explicit2,  BetheVariant::explicit3,
    BetheVariant::explicit4, BetheVariant::recursionA, BetheVariant::recursionB};

/// Whether the weight space reached by a creation operators of type u and b of
/// type v is nonzero. A fundamental site can hold e2 (a) or e3 (a and b); a
/// dual site can hold e2 (b) or e1 (a and b).
template <FieldScalar T>
bool weight_space_nonzero(const ChainModel<T>& model, std::size_t a, std::size_t b) {
  const std::size_t nf = model.count(SiteKind::fundamental), nd = model.count(SiteKind::dual);
  for (std::size_t n3 = 0; n3 <= nf; ++n3)
    for (std::size_t n2 = 0; n2 + n3 <= nf; ++n2)
      for (std::size_t m1 = 0; m1 <= nd; ++m1)
        for (std::size_t m2 = 0; m2 + m1 <= nd; ++m2)
          if (n2 + n3 + m1 == a && n3 + m2 + m1 == b) return true;
  return false;
}

namespace detail {

template <FieldScalar T>
void check_label(const BetheLabel<T>& label) {
  if (!label.u.pairwise_distinct() || !label.v.pairwise_distinct())
    throw DegenerateLabelError("Bethe parameters must be pairwise distinct within u and within v");
}

template <FieldScalar T>
Coords<T> explicit_formula(const ChainModel<T>& model, const BetheLabel<T>& label, int which,
                           unsigned threads) {
  const auto& k = model.kernel();
  const auto& u = label.u;
  const auto& v = label.v;
  const auto parts = joint_partitions(u.size(), v.size());
  const Coords<T> vac = model.vacuum();
  Coords<T> zero(model.dim(), from_int<T>(0));
  return canonical_reduce(
      parts.size(), zero,
      [&](std::size_t idx) -> Coords<T> {
        auto [uI, uII] = split(u, parts[idx].u);
        auto [vI, vII] = split(v, parts[idx].v);
        T co;
        Coords<T> st;
        try {
          const T kf = ik_over_f(k, vI, uI);
          switch (which) {
            case 1:
              co = kf / (model.lambda2(vII) * model.lambda2(u)) * f_product(k, vII, vI) *
                   f_product(k, uII, uI) * f_inv_product(k, vII, u);
              st = model.apply_product(1, 2, uII,
                                       model.apply_product(1, 3, uI, model.apply_product(2, 3, vII, vac)));
              break;
            case 2:
              co = kf / (model.lambda2(uII) * model.lambda2(v)) * f_product(k, vI, vII) *
                   f_product(k, uI, uII) * f_inv_product(k, v, uII);
              st = model.apply_product(2, 3, vII,
                                       model.apply_product(1, 3, vI, model.apply_product(1, 2, uII, vac)));
              break;
            case 3:
              co = kf / (model.lambda2(vII) * model.lambda2(u)) * f_product(k, vII, vI) *
                   f_product(k, uI, uII) * f_inv_product(k, vI, uII) * f_inv_product(k, vII, u);
              st = model.apply_product(1, 3, uI,
                                       model.apply_product(1, 2, uII, model.apply_product(2, 3, vII, vac)));
              break;
            default:
              co = kf / (model.lambda2(uII) * model.lambda2(v)) * f_product(k, vII, vI) *
                   f_product(k, uI, uII) * f_inv_product(k, vI, uII) * f_inv_product(k, vII, u);
              st = model.apply_product(1, 3, vI,
                                       model.apply_product(2, 3, vII, model.apply_product(1, 2, uII, vac)));
              break;
          }
        } catch (const PoleError& e) {
          throw PoleError(e.factor(), "in joint partition #" + std::to_string(idx));
        }
        return scaled(co, std::move(st));
      },
      [](Coords<T>& acc, const Coords<T>& x) { axpy(from_int<T>(1), x, acc); }, threads);
}

template <FieldScalar T>
Coords<T> recursion_a(const ChainModel<T>& model, const ParamSet<T>& u, const ParamSet<T>& v,
                      unsigned threads) {
  if (u.empty()) return explicit_formula(model, BetheLabel<T>{u, v}, 1, threads);
  const auto& k = model.kernel();
  const std::size_t last = u.size() - 1;
  const T uk = u[last];
  const ParamSet<T> rest = u.without(last);
  Coords<T> out = model.apply(1, 2, uk, recursion_a(model, rest, v, threads));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const ParamSet<T> vr = v.without(i);
    const T co = k.g(v[i], uk) * f_product(k, vr, ParamSet<T>{v[i]});
    axpy(co, model.apply(1, 3, uk, recursion_a(model, rest, vr, threads)), out);
  }
  const T den = model.lambda2(uk) * f_product(k, v, ParamSet<T>{uk});
  return scaled(checked_div(from_int<T>(1), den, "lambda2(u) f(v,u)"), std::move(out));
}

template <FieldScalar T>
Coords<T> recursion_b(const ChainModel<T>& model, const ParamSet<T>& u, const ParamSet<T>& v,
                      unsigned threads) {
  if (v.empty()) return explicit_formula(model, BetheLabel<T>{u, v}, 1, threads);
  const auto& k = model.kernel();
  const std::size_t last = v.size() - 1;
  const T vk = v[last];
  const ParamSet<T> rest = v.without(last);
  Coords<T> out = model.apply(2, 3, vk, recursion_b(model, u, rest, threads));
  for (std::size_t j = 0; j < u.size(); ++j) {
    const ParamSet<T> ur = u.without(j);
    const T co = k.g(vk, u[j]) * f_product(k, ParamSet<T>{u[j]}, ur);
    axpy(co, model.apply(1, 3, vk, recursion_b(model, ur, rest, threads)), out);
  }
  const T den = model.lambda2(vk) * f_product(k, ParamSet<T>{vk}, u);
  return scaled(checked_div(from_int<T>(1), den, "lambda2(v) f(v,u)"), std::move(out));
}

}  // namespace detail

/// B^{a,b}(u;v) on the chain by the requested representation.
template <FieldScalar T>
StateVector<T> build_bethe_vector(const ChainModel<T>& model, const BetheLabel<T>& label,
                                  BetheVariant variant = BetheVariant::explicit1,
                                  unsigned threads = default_threads()) {
  detail::check_label(label);
  StateVector<T> out;
  out.label = label;
  out.representation_too_small = !weight_space_nonzero(model, label.a(), label.b());
  switch (variant) {
    case BetheVariant::explicit1: out.coords = detail::explicit_formula(model, label, 1, threads); break;
    case BetheVariant::explicit2: out.coords = detail::explicit_formula(model, label, 2, threads); break;
    case BetheVariant::explicit3: out.coords = detail::explicit_formula(model, label, 3, threads); break;
    case BetheVariant::explicit4: out.coords = detail::explicit_formula(model, label, 4, threads); break;
    case BetheVariant::recursionA: out.coords = detail::recursion_a(model, label.u, label.v, threads); break;
    case BetheVariant::recursionB: out.coords = detail::recursion_b(model, label.u, label.v, threads); break;
  }
  return out;
}

/// Dual vector C^{a,b}(u;v): the image of the first explicit formula under the
/// antimorphism T_ij -> T_ji, i.e. sum coeff * <0| T32(v_II) T31(u_I) T21(u_II).
/// Only this mirror representation is provided.
template <FieldScalar T>
StateVector<T> build_dual_bethe_vector(const ChainModel<T>& model, const BetheLabel<T>& label,
                                       BetheVariant variant = BetheVariant::explicit1,
                                       unsigned threads = default_threads()) {
  if (variant != BetheVariant::explicit1)
    throw NotApplicableError(std::string("dual vectors are built from the mirror of explicit1, not ") +
                             to_string(variant));
  detail::check_label(label);
  const auto& k = model.kernel();
  const auto& u = label.u;
  const auto& v = label.v;
  const auto parts = joint_partitions(u.size(), v.size());
  const Coords<T> vac = model.vacuum();
  StateVector<T> out;
  out.label = label;
  out.representation_too_small = !weight_space_nonzero(model, label.a(), label.b());
  out.coords = canonical_reduce(
      parts.size(), Coords<T>(model.dim(), from_int<T>(0)),
      [&](std::size_t idx) -> Coords<T> {
        auto [uI, uII] = split(u, parts[idx].u);
        auto [vI, vII] = split(v, parts[idx].v);
        const T co = ik_over_f(k, vI, uI) / (model.lambda2(vII) * model.lambda2(u)) *
                     f_product(k, vII, vI) * f_product(k, uII, uI) * f_inv_product(k, vII, u);
        Coords<T> w = vac;
        for (const T& x : vII) w = model.apply_left(3, 2, x, w);
        for (const T& x : uI) w = model.apply_left(3, 1, x, w);
        for (const T& x : uII) w = model.apply_left(2, 1, x, w);
        return scaled(co, std::move(w));
      },
      [](Coords<T>& acc, const Coords<T>& x) { axpy(from_int<T>(1), x, acc); }, threads);
  return out;
}

}  // namespace bethe3
