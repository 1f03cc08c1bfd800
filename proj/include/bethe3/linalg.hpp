#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "bethe3/errors.hpp"
#include "bethe3/field.hpp"

namespace bethe3 {

/// Row-major dense matrix over a field.
template <FieldScalar T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, from_int<T>(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = from_int<T>(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("matrix product shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (is_zero(aik)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) {
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
    return a;
  }
  friend Matrix operator-(Matrix a, const Matrix& b) {
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }
  friend Matrix operator*(const T& s, Matrix a) {
    for (auto& x : a.data_) x *= s;
    return a;
  }
  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  /// Largest entry magnitude (as double); 0 for the zero matrix.
  double max_abs() const {
    double m = 0;
    for (const auto& x : data_) m = std::max(m, field_traits<T>::magnitude(x));
    return m;
  }

  bool is_zero_matrix() const {
    for (const auto& x : data_)
      if (!is_zero(x)) return false;
    return true;
  }

  /// Kronecker product a (x) b.
  friend Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows_ * b.rows_, a.cols_ * b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j) {
        if (is_zero(a(i, j))) continue;
        for (std::size_t k = 0; k < b.rows_; ++k)
          for (std::size_t l = 0; l < b.cols_; ++l)
            out(i * b.rows_ + k, j * b.cols_ + l) = a(i, j) * b(k, l);
      }
    return out;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

namespace detail {

// Pivot choice: first nonzero entry in exact mode, largest modulus in float mode.
template <FieldScalar T>
std::optional<std::size_t> pick_pivot(const Matrix<T>& m, std::size_t col, std::size_t from) {
  std::optional<std::size_t> best;
  double best_mag = 0;
  for (std::size_t r = from; r < m.rows(); ++r) {
    if (is_zero(m(r, col))) continue;
    if constexpr (field_traits<T>::exact) {
      return r;
    } else {
      double mag = std::abs(m(r, col));
      if (!best || mag > best_mag) {
        best = r;
        best_mag = mag;
      }
    }
  }
  return best;
}

template <FieldScalar T>
void swap_rows(Matrix<T>& m, std::size_t a, std::size_t b) {
  for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(a, c), m(b, c));
}

}  // namespace detail

/// Determinant by Gaussian elimination; det of the 0x0 matrix is 1.
template <FieldScalar T>
T determinant(Matrix<T> m) {
  if (m.rows() != m.cols()) throw DimensionError("determinant of non-square matrix");
  const std::size_t n = m.rows();
  T det = from_int<T>(1);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = detail::pick_pivot(m, i, i);
    if (!p) return from_int<T>(0);
    if (*p != i) {
      detail::swap_rows(m, *p, i);
      det = -det;
    }
    det *= m(i, i);
    for (std::size_t r = i + 1; r < n; ++r) {
      if (is_zero(m(r, i))) continue;
      T fac = m(r, i) / m(i, i);
      for (std::size_t c = i; c < n; ++c) m(r, c) -= fac * m(i, c);
    }
  }
  return det;
}

/// Inverse by Gauss-Jordan; throws SingularTransferError-compatible Error on singular input.
template <FieldScalar T>
std::optional<Matrix<T>> try_inverse(Matrix<T> m) {
  if (m.rows() != m.cols()) throw DimensionError("inverse of non-square matrix");
  const std::size_t n = m.rows();
  Matrix<T> inv = Matrix<T>::identity(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = detail::pick_pivot(m, i, i);
    if (!p) return std::nullopt;
    if (*p != i) {
      detail::swap_rows(m, *p, i);
      detail::swap_rows(inv, *p, i);
    }
    T piv = m(i, i);
    for (std::size_t c = 0; c < n; ++c) {
      m(i, c) /= piv;
      inv(i, c) /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == i || is_zero(m(r, i))) continue;
      T fac = m(r, i);
      for (std::size_t c = 0; c < n; ++c) {
        m(r, c) -= fac * m(i, c);
        inv(r, c) -= fac * inv(i, c);
      }
    }
  }
  return inv;
}

/// Solves A x = b (square, nonsingular). Returns nullopt when singular.
template <FieldScalar T>
std::optional<std::vector<T>> solve_linear(Matrix<T> a, std::vector<T> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw DimensionError("solve_linear shape mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    auto p = detail::pick_pivot(a, i, i);
    if (!p) return std::nullopt;
    if (*p != i) {
      detail::swap_rows(a, *p, i);
      std::swap(b[*p], b[i]);
    }
    for (std::size_t r = i + 1; r < n; ++r) {
      if (is_zero(a(r, i))) continue;
      T fac = a(r, i) / a(i, i);
      for (std::size_t c = i; c < n; ++c) a(r, c) -= fac * a(i, c);
      b[r] -= fac * b[i];
    }
  }
  std::vector<T> x(n, from_int<T>(0));
  for (std::size_t i = n; i-- > 0;) {
    T acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a(i, c) * x[c];
    x[i] = acc / a(i, i);
  }
  return x;
}

/// Basis of the right null space of m (exact arithmetic intended).
template <FieldScalar T>
std::vector<std::vector<T>> null_space(Matrix<T> m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  std::vector<std::size_t> pivot_cols;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    auto p = detail::pick_pivot(m, c, r);
    if (!p) continue;
    detail::swap_rows(m, *p, r);
    T piv = m(r, c);
    for (std::size_t j = 0; j < cols; ++j) m(r, j) /= piv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || is_zero(m(i, c))) continue;
      T fac = m(i, c);
      for (std::size_t j = 0; j < cols; ++j) m(i, j) -= fac * m(r, j);
    }
    pivot_cols.push_back(c);
    ++r;
  }
  std::vector<std::vector<T>> basis;
  std::vector<bool> is_pivot(cols, false);
  for (auto c : pivot_cols) is_pivot[c] = true;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<T> v(cols, from_int<T>(0));
    v[free] = from_int<T>(1);
    for (std::size_t i = 0; i < pivot_cols.size(); ++i) v[pivot_cols[i]] = -m(i, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace bethe3
