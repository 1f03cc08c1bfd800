#pragma once

// Scalar backends (exact rationals over GMP, complex doubles) and the
// rate functions g, f, h, t built on top of them.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "bethe3/errors.hpp"

namespace bethe3 {

/// Arbitrary-precision rational. Thin value wrapper around mpq_class whose
/// division reports a zero divisor through PoleError instead of trapping.
class Rational {
 public:
  Rational() = default;
  Rational(long n) : q_(n) {}  // NOLINT(google-explicit-constructor)
  Rational(long n, long d) {
    if (d == 0) throw PoleError("n/d", "zero denominator in literal");
    q_ = mpq_class(n, d);
    q_.canonicalize();
  }
  explicit Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

  /// Parses "n", "-n" or "n/d".
  static Rational parse(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw Error("not a rational literal: '" + s + "'");
    if (q.get_den() == 0) throw PoleError("n/d", "zero denominator in '" + s + "'");
    q.canonicalize();
    return Rational(q);
  }

  const mpq_class& raw() const noexcept { return q_; }
  bool is_zero() const noexcept { return sgn(q_) == 0; }
  double to_double() const { return q_.get_d(); }
  std::string str() const { return q_.get_str(); }

  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw PoleError("division", "divisor is exactly zero");
    q_ /= o.q_;
    return *this;
  }
  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.q_)); }
  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.q_ < b.q_; }

 private:
  mpq_class q_;
};

using Complex = std::complex<double>;

/// Default relative tolerance for float-mode comparisons.
inline constexpr double kDefaultTol = 1e-9;

template <class T>
struct field_traits;

template <>
struct field_traits<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* name = "rational";
  static Rational from_int(long n) { return Rational(n); }
  static Rational from_fraction(long n, long d) { return Rational(n, d); }
  static bool is_zero(const Rational& x) { return x.is_zero(); }
  static double magnitude(const Rational& x) { return std::abs(x.to_double()); }
  static Complex to_complex(const Rational& x) { return {x.to_double(), 0.0}; }
  static std::string to_string(const Rational& x) { return x.str(); }
};

template <>
struct field_traits<Complex> {
  static constexpr bool exact = false;
  static constexpr const char* name = "float";
  static Complex from_int(long n) { return {static_cast<double>(n), 0.0}; }
  static Complex from_fraction(long n, long d) {
    if (d == 0) throw PoleError("n/d", "zero denominator in literal");
    return {static_cast<double>(n) / static_cast<double>(d), 0.0};
  }
  static bool is_zero(const Complex& x) { return x == Complex{}; }
  static double magnitude(const Complex& x) { return std::abs(x); }
  static Complex to_complex(const Complex& x) { return x; }
  static std::string to_string(const Complex& x);
};

inline std::string field_traits<Complex>::to_string(const Complex& x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", x.real(), x.imag());
  return buf;
}

template <class T>
concept FieldScalar = requires { field_traits<T>::exact; };

template <FieldScalar T>
T from_int(long n) {
  return field_traits<T>::from_int(n);
}

template <FieldScalar T>
bool is_zero(const T& x) {
  return field_traits<T>::is_zero(x);
}

/// Exact equality in rational mode, |x-y| <= tol*max(1,|x|,|y|) in float mode.
template <FieldScalar T>
bool nearly_equal(const T& x, const T& y, double tol = kDefaultTol) {
  if constexpr (field_traits<T>::exact) {
    return x == y;
  } else {
    double scale = std::max({1.0, std::abs(x), std::abs(y)});
    return std::abs(x - y) <= tol * scale;
  }
}

/// Division that reports an exactly vanishing divisor in both modes.
template <FieldScalar T>
T checked_div(const T& num, const T& den, const char* what = "division") {
  if (is_zero(den)) throw PoleError(what, "denominator vanishes");
  return num / den;
}

enum class RateKind { g, f, h, t };

inline const char* to_string(RateKind k) {
  switch (k) {
    case RateKind::g: return "g";
    case RateKind::f: return "f";
    case RateKind::h: return "h";
    case RateKind::t: return "t";
  }
  return "?";
}

/// The rational functions of a difference x - y parametrized by the constant c:
///   g = c/(x-y), f = (x-y+c)/(x-y), h = f/g = (x-y+c)/c, t = g/h = c^2/((x-y)(x-y+c)).
/// h is stored in its simplified polynomial form, so it is finite at x = y.
template <FieldScalar T>
class RateKernel {
 public:
  explicit RateKernel(T c) : c_(std::move(c)) {}

  const T& c() const noexcept { return c_; }

  T g(const T& x, const T& y) const { return checked_div(c_, x - y, "g(x,y)"); }
  T f(const T& x, const T& y) const { return checked_div(x - y + c_, x - y, "f(x,y)"); }
  T h(const T& x, const T& y) const { return checked_div(x - y + c_, c_, "h(x,y)"); }
  T t(const T& x, const T& y) const {
    return checked_div(c_ * c_, (x - y) * (x - y + c_), "t(x,y)");
  }

  // Reciprocals; each one has its pole where the direct function has a zero.
  T g_inv(const T& x, const T& y) const { return checked_div(x - y, c_, "1/g(x,y)"); }
  T f_inv(const T& x, const T& y) const { return checked_div(x - y, x - y + c_, "1/f(x,y)"); }
  T h_inv(const T& x, const T& y) const { return checked_div(c_, x - y + c_, "1/h(x,y)"); }

  T operator()(RateKind kind, const T& x, const T& y) const {
    switch (kind) {
      case RateKind::g: return g(x, y);
      case RateKind::f: return f(x, y);
      case RateKind::h: return h(x, y);
      case RateKind::t: return t(x, y);
    }
    throw Error("unknown rate kind");
  }

  /// d/dx log f(x,y); the y-derivative is its negative.
  T dlog_f(const T& x, const T& y) const {
    return checked_div(from_int<T>(1), x - y + c_, "f(x,y) zero") -
           checked_div(from_int<T>(1), x - y, "f(x,y)");
  }

 private:
  T c_;
};

/// Product of kind(a,b) over a in A, b in B; the empty product is 1.
template <FieldScalar T>
T set_product(const RateKernel<T>& k, RateKind kind, std::span<const T> A, std::span<const T> B) {
  T acc = from_int<T>(1);
  for (std::size_t i = 0; i < A.size(); ++i) {
    for (std::size_t j = 0; j < B.size(); ++j) {
      try {
        acc *= k(kind, A[i], B[j]);
      } catch (const PoleError& e) {
        throw PoleError(e.factor(), "at pair (A[" + std::to_string(i) + "], B[" +
                                        std::to_string(j) + "])");
      }
    }
  }
  return acc;
}

/// Generic pairwise product over a callable rate, used for reciprocal kinds.
template <FieldScalar T, class Fn>
T pair_product(std::span<const T> A, std::span<const T> B, Fn&& fn) {
  T acc = from_int<T>(1);
  for (const T& a : A)
    for (const T& b : B) acc *= fn(a, b);
  return acc;
}

}  // namespace bethe3
