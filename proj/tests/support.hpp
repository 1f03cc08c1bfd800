#pragma once

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

#include "bethe3/bethe3.hpp"

namespace testing_support {

using bethe3::Rational;

/// n distinct small rationals, none differing from each other or from
/// `avoid` by 0, +-1 or +-2 (pole-free for c = 1).
inline std::vector<Rational> rationals(std::mt19937_64& rng, std::size_t n, std::vector<Rational> avoid = {}) {
  std::uniform_int_distribution<long> num(-40, 40), den(1, 7);
  std::vector<Rational> out;
  while (out.size() < n) {
    Rational r(num(rng), den(rng));
    bool ok = true;
    for (const auto& t : avoid) {
      const Rational d = r - t;
      if (d.is_zero() || d == Rational(1) || d == Rational(-1) || d == Rational(2) || d == Rational(-2)) ok = false;
    }
    if (!ok) continue;
    avoid.push_back(r);
    out.push_back(r);
  }
  return out;
}

inline bethe3::ParamSet<Rational> set(std::vector<Rational> v) { return bethe3::ParamSet<Rational>(std::move(v)); }

inline bethe3::ParamSet<Rational> slice(const std::vector<Rational>& v, std::size_t from, std::size_t n) {
  return set(std::vector<Rational>(v.begin() + static_cast<long>(from), v.begin() + static_cast<long>(from + n)));
}

/// Chain with site kinds given as a string of 'f' and 'd'.
template <class T>
bethe3::ChainModel<T> chain(std::vector<T> xi, T c, const std::string& kinds) {
  std::vector<bethe3::SiteKind> k;
  for (char ch : kinds) k.push_back(ch == 'f' ? bethe3::SiteKind::fundamental : bethe3::SiteKind::dual);
  return bethe3::ChainModel<T>(bethe3::ParamSet<T>(std::move(xi)), std::move(c), std::move(k));
}

inline bethe3::ChainModel<Rational> rational_chain(std::mt19937_64& rng, const std::string& kinds) {
  return chain<Rational>(rationals(rng, kinds.size()), Rational(1), kinds);
}

/// The five-site chain used for on-shell tests.
inline bethe3::ChainModel<bethe3::Complex> desk_chain(const std::string& kinds = "ffddf") {
  using bethe3::Complex;
  return chain<Complex>({0.3, -0.45, 1.1, 0.25, 0.8}, Complex(1.0), kinds);
}

/// |got - want| relative to the larger of |want| and the operand scale.
inline double scaled_deviation(bethe3::Complex got, bethe3::Complex want, double scale) {
  return std::abs(got - want) / std::max({std::abs(want), scale, 1e-300});
}

}  // namespace testing_support
