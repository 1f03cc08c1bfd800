#pragma once

// Multiple actions of T13, T12 and T23 on Bethe vectors, as formal sums of
// Bethe labels.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "bethe3/bethe.hpp"
#include "bethe3/errors.hpp"
#include "bethe3/field.hpp"
#include "bethe3/params.hpp"

namespace bethe3 {

enum class ActionKind { T13, T12, T23 };

inline const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::T13: return "T13";
    case ActionKind::T12: return "T12";
    case ActionKind::T23: return "T23";
  }
  return "?";
}

template <FieldScalar T>
struct WeightedStateSum {
  struct Term {
    T coeff;
    BetheLabel<T> label;
  };
  std::vector<Term> terms;

  /// Adds a term, merging equal labels and dropping zero coefficients.
  void add(T coeff, BetheLabel<T> label) {
    for (auto it = terms.begin(); it != terms.end(); ++it) {
      if (it->label == label) {
        it->coeff += coeff;
        if (is_zero(it->coeff)) terms.erase(it);
        return;
      }
    }
    if (!is_zero(coeff)) terms.push_back({std::move(coeff), std::move(label)});
  }
};

/// T_ij(x_1) ... T_ij(x_n) B^{a,b}(u;v) as a weighted sum of Bethe labels.
/// With eta = {u, x} and xi = {v, x}:
///   T13: lambda2(x) B(eta; xi)
///   T12: (-1)^n lambda2(x) sum_{|xi_I|=n} f(xi_II, xi_I) K_n(xi_I | x+c) B(eta; xi_II)
///   T23: (-1)^n lambda2(x) sum_{|eta_I|=n} f(eta_I, eta_II) K_n(x | eta_I+c) B(eta_II; xi)
template <FieldScalar T>
WeightedStateSum<T> multiple_action(ActionKind which, const ParamSet<T>& x,
                                    const BetheLabel<T>& base, const ChainModel<T>& model) {
  if (x.empty()) throw CardinalityError("multiple action needs at least one parameter");
  for (const T& p : x) {
    for (const T& q : base.u)
      if (nearly_equal(p, q)) throw OverlapError("action parameter coincides with an element of u");
    for (const T& q : base.v)
      if (nearly_equal(p, q)) throw OverlapError("action parameter coincides with an element of v");
  }
  const auto& k = model.kernel();
  const std::size_t n = x.size();
  const ParamSet<T> eta = base.u.joined(x);
  const ParamSet<T> xi = base.v.joined(x);
  const T sign = (n % 2 == 0) ? from_int<T>(1) : from_int<T>(-1);
  const T lam = model.lambda2(x);
  WeightedStateSum<T> out;
  switch (which) {
    case ActionKind::T13:
      out.add(lam, BetheLabel<T>{eta, xi});
      break;
    case ActionKind::T12: {
      const ParamSet<T> xc = x.shifted(k.c());
      for (const auto& bp : enumerate_bipartitions(xi.size(), n)) {
        auto [xiI, xiII] = split(xi, bp);
        out.add(sign * lam * f_product(k, xiII, xiI) * ik_determinant(k, xiI, xc),
                BetheLabel<T>{eta, xiII});
      }
      break;
    }
    case ActionKind::T23:
      for (const auto& bp : enumerate_bipartitions(eta.size(), n)) {
        auto [etaI, etaII] = split(eta, bp);
        out.add(sign * lam * f_product(k, etaI, etaII) * ik_determinant(k, x, etaI.shifted(k.c())),
                BetheLabel<T>{etaII, xi});
      }
      break;
  }
  return out;
}

/// Realizes a weighted sum on the chain through build_bethe_vector.
template <FieldScalar T>
Coords<T> materialize(const WeightedStateSum<T>& sum, const ChainModel<T>& model,
                      BetheVariant variant = BetheVariant::explicit1) {
  Coords<T> out(model.dim(), from_int<T>(0));
  for (const auto& term : sum.terms)
    axpy(term.coeff, build_bethe_vector(model, term.label, variant).coords, out);
  return out;
}

/// Direct oracle product T_ij(x_1) ... T_ij(x_n) applied to a vector.
template <FieldScalar T>
Coords<T> apply_action_oracle(ActionKind which, const ParamSet<T>& x, const ChainModel<T>& model,
                              Coords<T> v) {
  const auto [i, j] = which == ActionKind::T13   ? std::pair{1, 3}
                      : which == ActionKind::T12 ? std::pair{1, 2}
                                                 : std::pair{2, 3};
  return model.apply_product(i, j, x, std::move(v));
}

}  // namespace bethe3
