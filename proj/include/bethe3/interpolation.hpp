#pragma once

// Exact rational reconstruction of a univariate rational function from
// samples, used to extract residues without symbolic algebra.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "bethe3/errors.hpp"
#include "bethe3/field.hpp"
#include "bethe3/linalg.hpp"

namespace bethe3 {

template <FieldScalar T>
struct RationalFit {
  std::vector<T> num;  ///< coefficients of P, low degree first
  std::vector<T> den;  ///< coefficients of Q
  std::size_t degree = 0;

  T eval_num(const T& x) const { return horner(num, x); }
  T eval_den(const T& x) const { return horner(den, x); }

 private:
  static T horner(const std::vector<T>& c, const T& x) {
    T acc = from_int<T>(0);
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
  }
};

/// Finds P/Q with deg P, deg Q <= N for the smallest N that reproduces every
/// sample, i.e. solves P(d_i) - F_i Q(d_i) = 0 on 2N+1 points and confirms the
/// fit on `validation` further points. Samples where fn raises PoleError are skipped.
template <FieldScalar T>
RationalFit<T> fit_rational(const std::function<T(const T&)>& fn, std::size_t max_degree,
                            std::size_t validation = 3) {
  std::vector<T> xs, ys;
  long counter = 0;
  auto ensure = [&](std::size_t n) {
    while (xs.size() < n) {
      if (counter > 10000) throw InterpolationError("could not find pole-free sample points");
      ++counter;
      T d = field_traits<T>::from_fraction((counter % 2 ? 1 : -1) * (3 * counter + 1), 17);
      try {
        T y = fn(d);
        xs.push_back(d);
        ys.push_back(y);
      } catch (const PoleError&) {
      }
    }
  };
  for (std::size_t N = 0; N <= max_degree; ++N) {
    const std::size_t fit_pts = 2 * N + 1;
    ensure(fit_pts + validation);
    Matrix<T> m(fit_pts, 2 * N + 2);
    for (std::size_t i = 0; i < fit_pts; ++i) {
      T pw = from_int<T>(1);
      for (std::size_t d = 0; d <= N; ++d) {
        m(i, d) = pw;
        m(i, N + 1 + d) = -ys[i] * pw;
        pw *= xs[i];
      }
    }
    auto basis = null_space(m);
    if (basis.empty()) continue;
    RationalFit<T> fit;
    fit.degree = N;
    fit.num.assign(basis[0].begin(), basis[0].begin() + static_cast<long>(N + 1));
    fit.den.assign(basis[0].begin() + static_cast<long>(N + 1), basis[0].end());
    bool ok = true;
    for (std::size_t i = 0; i < xs.size() && ok; ++i) {
      const T q = fit.eval_den(xs[i]);
      if (is_zero(q) || !nearly_equal(fit.eval_num(xs[i]), ys[i] * q)) ok = false;
    }
    if (ok) return fit;
  }
  throw InterpolationError("rational reconstruction exceeded degree bound " +
                           std::to_string(max_degree));
}

/// Value at 0 of the rational function sampled by fn (which need not be
/// evaluable at 0 itself).
template <FieldScalar T>
T rational_value_at_zero(const std::function<T(const T&)>& fn, std::size_t max_degree,
                         std::size_t validation = 3) {
  const RationalFit<T> fit = fit_rational(fn, max_degree, validation);
  const T q0 = fit.eval_den(from_int<T>(0));
  if (is_zero(q0)) throw InterpolationError("reconstructed function has a pole at 0");
  return fit.eval_num(from_int<T>(0)) / q0;
}

}  // namespace bethe3
