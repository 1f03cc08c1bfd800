#pragma once

// Brute-force ground truth: the gl(3) R-matrix, the inhomogeneous monodromy
// on (C^3)^{(x)L}, vacuum weights and the local-operator reconstruction.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bethe3/errors.hpp"
#include "bethe3/field.hpp"
#include "bethe3/linalg.hpp"
#include "bethe3/params.hpp"

namespace bethe3 {

template <FieldScalar T>
using Coords = std::vector<T>;

template <FieldScalar T>
Coords<T> add(Coords<T> a, const Coords<T>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

template <FieldScalar T>
void axpy(const T& s, const Coords<T>& x, Coords<T>& y) {
  if (is_zero(s)) return;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!is_zero(x[i])) y[i] += s * x[i];
}

template <FieldScalar T>
Coords<T> scaled(const T& s, Coords<T> a) {
  for (auto& x : a) x *= s;
  return a;
}

/// Bilinear pairing sum_i a_i b_i (no conjugation; dual vectors are covectors).
template <FieldScalar T>
T dot(const Coords<T>& a, const Coords<T>& b) {
  T acc = from_int<T>(0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!is_zero(a[i]) && !is_zero(b[i])) acc += a[i] * b[i];
  return acc;
}

/// Euclidean norm, used only for relative float comparisons.
template <FieldScalar T>
double norm2(const Coords<T>& a) {
  double s = 0;
  for (const auto& x : a) {
    double m = field_traits<T>::magnitude(x);
    s += m * m;
  }
  return std::sqrt(s);
}

template <FieldScalar T>
double max_abs_diff(const Coords<T>& a, const Coords<T>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, field_traits<T>::magnitude(a[i] - b[i]));
  return m;
}

template <FieldScalar T>
bool is_zero_vector(const Coords<T>& a) {
  for (const auto& x : a)
    if (!is_zero(x)) return false;
  return true;
}

/// 9x9 R(x,y) = I + g(x,y) P, basis e_a (x) e_b at index 3a+b.
template <FieldScalar T>
Matrix<T> build_r_matrix(const RateKernel<T>& k, const T& x, const T& y) {
  Matrix<T> r = Matrix<T>::identity(9);
  const T gv = k.g(x, y);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) r(3 * b + a, 3 * a + b) += gv;
  return r;
}

/// Sparse square operator stored by rows.
template <FieldScalar T>
class OperatorMatrix {
 public:
  using Row = std::vector<std::pair<std::size_t, T>>;

  OperatorMatrix() = default;
  explicit OperatorMatrix(std::size_t dim) : rows_(dim) {}

  static OperatorMatrix identity(std::size_t dim) {
    OperatorMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.rows_[i].push_back({i, from_int<T>(1)});
    return m;
  }

  /// Assembles the operator from a column map col -> A e_col.
  template <class ColumnFn>
  static OperatorMatrix from_columns(std::size_t dim, ColumnFn&& column) {
    OperatorMatrix m(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      Coords<T> e(dim, from_int<T>(0));
      e[j] = from_int<T>(1);
      Coords<T> col = column(e);
      for (std::size_t i = 0; i < dim; ++i)
        if (!is_zero(col[i])) m.rows_[i].push_back({j, col[i]});
    }
    return m;
  }

  static OperatorMatrix from_dense(const Matrix<T>& d) {
    OperatorMatrix m(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j)
        if (!is_zero(d(i, j))) m.rows_[i].push_back({j, d(i, j)});
    return m;
  }

  std::size_t dim() const noexcept { return rows_.size(); }
  const std::vector<Row>& rows() const noexcept { return rows_; }

  std::size_t nonzeros() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return n;
  }

  Coords<T> apply(const Coords<T>& v) const {
    Coords<T> out(dim(), from_int<T>(0));
    for (std::size_t i = 0; i < dim(); ++i)
      for (const auto& [j, a] : rows_[i])
        if (!is_zero(v[j])) out[i] += a * v[j];
    return out;
  }

  Matrix<T> to_dense() const {
    Matrix<T> d(dim(), dim());
    for (std::size_t i = 0; i < dim(); ++i)
      for (const auto& [j, a] : rows_[i]) d(i, j) = a;
    return d;
  }

  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    OperatorMatrix out(a.dim());
    std::vector<T> acc(a.dim(), from_int<T>(0));
    std::vector<char> touched(a.dim(), 0);
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < a.dim(); ++i) {
      cols.clear();
      for (const auto& [k, x] : a.rows_[i])
        for (const auto& [j, y] : b.rows_[k]) {
          if (!touched[j]) {
            touched[j] = 1;
            cols.push_back(j);
          }
          acc[j] += x * y;
        }
      std::sort(cols.begin(), cols.end());
      for (std::size_t j : cols) {
        if (!is_zero(acc[j])) out.rows_[i].push_back({j, acc[j]});
        acc[j] = from_int<T>(0);
        touched[j] = 0;
      }
    }
    return out;
  }

  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
    return combine(a, b, from_int<T>(1));
  }
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
    return combine(a, b, from_int<T>(-1));
  }
  friend OperatorMatrix operator*(const T& s, const OperatorMatrix& a) {
    OperatorMatrix out(a.dim());
    if (is_zero(s)) return out;
    for (std::size_t i = 0; i < a.dim(); ++i)
      for (const auto& [j, x] : a.rows_[i]) out.rows_[i].push_back({j, s * x});
    return out;
  }

  double max_abs() const {
    double m = 0;
    for (const auto& r : rows_)
      for (const auto& e : r) m = std::max(m, field_traits<T>::magnitude(e.second));
    return m;
  }

  bool is_zero_operator() const {
    for (const auto& r : rows_)
      for (const auto& e : r)
        if (!is_zero(e.second)) return false;
    return true;
  }

 private:
  static OperatorMatrix combine(const OperatorMatrix& a, const OperatorMatrix& b, const T& sb) {
    OperatorMatrix out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
      std::map<std::size_t, T> row;
      for (const auto& [j, x] : a.rows_[i]) row[j] += x;
      for (const auto& [j, y] : b.rows_[i]) {
        auto it = row.find(j);
        if (it == row.end())
          row.emplace(j, sb * y);
        else
          it->second += sb * y;
      }
      for (auto& [j, x] : row)
        if (!is_zero(x)) out.rows_[i].push_back({j, x});
    }
    return out;
  }

  std::vector<Row> rows_;
};

template <FieldScalar T>
OperatorMatrix<T> commutator(const OperatorMatrix<T>& a, const OperatorMatrix<T>& b) {
  return a * b - b * a;
}

/// Site representation: fundamental (vacuum e1) or antifundamental (vacuum e3).
enum class SiteKind { fundamental, dual };

/// Twist diag(kappa1, kappa2, kappa3) of the transfer matrix.
template <FieldScalar T>
struct TwistVector {
  T kappa1 = from_int<T>(1);
  T kappa2 = from_int<T>(1);
  T kappa3 = from_int<T>(1);

  static TwistVector untwisted() { return {}; }
  /// The scalar twist diag(1, k, 1).
  static TwistVector scalar(const T& k) { return {from_int<T>(1), k, from_int<T>(1)}; }
  /// kappa_s = k, the other two equal to 1.
  static TwistVector along(int s, const T& k) {
    TwistVector t;
    (s == 1 ? t.kappa1 : s == 2 ? t.kappa2 : t.kappa3) = k;
    return t;
  }
  const T& operator[](int s) const { return s == 1 ? kappa1 : s == 2 ? kappa2 : kappa3; }
  bool is_identity() const {
    return kappa1 == from_int<T>(1) && kappa2 == from_int<T>(1) && kappa3 == from_int<T>(1);
  }
};

/// Inhomogeneous gl(3) chain. Site l carries L_ab(x) = delta_ab + g(x,xi_l) e_ba
/// (fundamental) or delta_ab - g(x,xi_l) e_ab (dual); the monodromy is
/// T(x) = L^1(x) ... L^L(x) in auxiliary space. With this normalization
/// lambda_2 = 1, lambda_1 = r_1 and lambda_3 = r_3.
template <FieldScalar T>
class ChainModel {
 public:
  ChainModel(ParamSet<T> xi, T c, std::vector<SiteKind> kinds = {}, bool allow_homogeneous = false)
      : xi_(std::move(xi)), kernel_(std::move(c)), kinds_(std::move(kinds)),
        homogeneous_allowed_(allow_homogeneous) {
    if (kinds_.empty()) kinds_.assign(xi_.size(), SiteKind::fundamental);
    if (kinds_.size() != xi_.size()) throw ModelError("site kinds and inhomogeneities differ in length");
    if (allow_homogeneous && field_traits<T>::exact)
      throw ModelError("homogeneous chains are admitted in float mode only");
    if (!allow_homogeneous) {
      for (std::size_t i = 0; i < xi_.size(); ++i)
        for (std::size_t j = i + 1; j < xi_.size(); ++j) {
          const T d = xi_[i] - xi_[j];
          if (nearly_equal(d, from_int<T>(0)) || nearly_equal(d, kernel_.c()) ||
              nearly_equal(d, -kernel_.c()))
            throw ModelError("inhomogeneities xi_" + std::to_string(i) + " and xi_" +
                             std::to_string(j) + " coincide or differ by +-c");
        }
    }
    dim_ = 1;
    for (std::size_t l = 0; l < xi_.size(); ++l) dim_ *= 3;
  }

  std::size_t length() const noexcept { return xi_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const ParamSet<T>& xi() const noexcept { return xi_; }
  const T& c() const noexcept { return kernel_.c(); }
  const RateKernel<T>& kernel() const noexcept { return kernel_; }
  const std::vector<SiteKind>& kinds() const noexcept { return kinds_; }
  bool homogeneous_allowed() const noexcept { return homogeneous_allowed_; }
  std::size_t count(SiteKind k) const {
    return static_cast<std::size_t>(std::count(kinds_.begin(), kinds_.end(), k));
  }

  T r1(const T& x) const {
    T acc = from_int<T>(1);
    for (std::size_t l = 0; l < length(); ++l)
      if (kinds_[l] == SiteKind::fundamental) acc *= site_f(x, l, false);
    return acc;
  }
  T r3(const T& x) const {
    T acc = from_int<T>(1);
    for (std::size_t l = 0; l < length(); ++l)
      if (kinds_[l] == SiteKind::dual) acc *= site_f(x, l, true);
    return acc;
  }
  T lambda2(const T&) const { return from_int<T>(1); }
  T lambda2(const ParamSet<T>& s) const {
    T acc = from_int<T>(1);
    for (const T& x : s) acc *= lambda2(x);
    return acc;
  }
  /// lambda_j(x) for j = 1, 2, 3.
  T lambda(int j, const T& x) const { return j == 1 ? r1(x) : j == 2 ? lambda2(x) : r3(x); }

  /// d/dx log r1(x) and d/dx log r3(x).
  T dlog_r1(const T& x) const {
    T acc = from_int<T>(0);
    for (std::size_t l = 0; l < length(); ++l)
      if (kinds_[l] == SiteKind::fundamental) acc += kernel_.dlog_f(x, xi_[l]);
    return acc;
  }
  T dlog_r3(const T& x) const {
    T acc = from_int<T>(0);
    for (std::size_t l = 0; l < length(); ++l)
      if (kinds_[l] == SiteKind::dual) acc -= kernel_.dlog_f(xi_[l], x);
    return acc;
  }

  /// The highest-weight vector: e1 on fundamental sites, e3 on dual sites.
  Coords<T> vacuum() const {
    std::size_t idx = 0;
    for (std::size_t l = 0; l < length(); ++l)
      idx = idx * 3 + (kinds_[l] == SiteKind::fundamental ? 0 : 2);
    Coords<T> v(dim_, from_int<T>(0));
    v[idx] = from_int<T>(1);
    return v;
  }

  /// T_ij(x) v for 1-based i, j, evaluated by contracting the auxiliary
  /// index site by site (no 3^L x 3^L matrix is formed).
  Coords<T> apply(int i, int j, const T& x, const Coords<T>& v) const {
    return contract(i, j, x, v, false, false);
  }

  /// Row action w T_ij(x) (the covector w multiplied from the left).
  Coords<T> apply_left(int i, int j, const T& x, const Coords<T>& w) const {
    return contract(i, j, x, w, true, false);
  }

  /// sum_s kappa_s T_ss(x) v.
  Coords<T> apply_transfer(const T& x, const Coords<T>& v,
                           const TwistVector<T>& tw = TwistVector<T>::untwisted()) const {
    Coords<T> out(dim_, from_int<T>(0));
    for (int s = 1; s <= 3; ++s) axpy(tw[s], apply(s, s, x, v), out);
    return out;
  }

  /// Product T_ij(x_1) ... T_ij(x_n) v (x_n acts first).
  Coords<T> apply_product(int i, int j, const ParamSet<T>& xs, Coords<T> v) const {
    for (std::size_t k = xs.size(); k-- > 0;) v = apply(i, j, xs[k], v);
    return v;
  }

  /// Polynomially normalized entry prod_l ((x-xi_l)/c) T_ij(x), finite at x = xi_l.
  /// Defined for fundamental-only chains.
  Coords<T> apply_normalized(int i, int j, const T& x, const Coords<T>& v) const {
    return contract(i, j, x, v, false, true);
  }

 private:
  T site_f(const T& x, std::size_t l, bool reversed) const {
    try {
      return reversed ? kernel_.f(xi_[l], x) : kernel_.f(x, xi_[l]);
    } catch (const PoleError& e) {
      throw PoleError(e.factor(), "spectral parameter hits site " + std::to_string(l));
    }
  }

  // Site-local operator L^l_{km}(x): diag * delta_km + off * e_{p q}.
  struct SiteOp {
    T diag;
    T off;
    int p, q;
  };

  SiteOp site_op(std::size_t l, int k, int m, const T& x, bool normalized) const {
    if (normalized) {
      if (kinds_[l] != SiteKind::fundamental)
        throw NotApplicableError("normalized monodromy is defined for fundamental sites only");
      return {(x - xi_[l]) / kernel_.c(), from_int<T>(1), m, k};
    }
    T gv;
    try {
      gv = kernel_.g(x, xi_[l]);
    } catch (const PoleError& e) {
      throw PoleError(e.factor(), "spectral parameter coincides with xi of site " +
                                      std::to_string(l));
    }
    if (kinds_[l] == SiteKind::fundamental) return {from_int<T>(1), gv, m, k};
    return {from_int<T>(1), -gv, k, m};
  }

  Coords<T> contract(int i, int j, const T& x, const Coords<T>& v, bool transpose,
                     bool normalized) const {
    if (v.size() != dim_) throw DimensionError("state vector has wrong dimension");
    if (i < 1 || i > 3 || j < 1 || j > 3) throw DimensionError("monodromy index out of range");
    std::array<std::optional<Coords<T>>, 3> cur;
    cur[i - 1] = v;
    std::size_t stride = dim_;
    for (std::size_t l = 0; l < length(); ++l) {
      stride /= 3;
      std::array<std::optional<Coords<T>>, 3> next;
      for (int k = 0; k < 3; ++k) {
        if (!cur[k]) continue;
        const Coords<T>& w = *cur[k];
        for (int m = 0; m < 3; ++m) {
          SiteOp op = site_op(l, k, m, x, normalized);
          int p = op.p, q = op.q;
          if (transpose) std::swap(p, q);
          const bool has_diag = (k == m) && !is_zero(op.diag);
          if (!has_diag && is_zero(op.off)) continue;
          if (!next[m]) next[m] = Coords<T>(dim_, from_int<T>(0));
          Coords<T>& out = *next[m];
          for (std::size_t idx = 0; idx < dim_; ++idx) {
            if (is_zero(w[idx])) continue;
            if (has_diag) out[idx] += op.diag * w[idx];
            const int digit = static_cast<int>((idx / stride) % 3);
            if (digit == q) {
              const std::size_t target = idx + static_cast<std::size_t>(p - q) * stride;
              out[target] += op.off * w[idx];
            }
          }
        }
      }
      cur = std::move(next);
    }
    if (cur[j - 1]) return std::move(*cur[j - 1]);
    return Coords<T>(dim_, from_int<T>(0));
  }

  ParamSet<T> xi_;
  RateKernel<T> kernel_;
  std::vector<SiteKind> kinds_;
  bool homogeneous_allowed_ = false;
  std::size_t dim_ = 1;
};

/// The (i,j) auxiliary block of the monodromy as an explicit sparse operator.
template <FieldScalar T>
OperatorMatrix<T> monodromy_entry(const ChainModel<T>& model, int i, int j, const T& x) {
  return OperatorMatrix<T>::from_columns(
      model.dim(), [&](const Coords<T>& e) { return model.apply(i, j, x, e); });
}

template <FieldScalar T>
OperatorMatrix<T> transfer_matrix(const ChainModel<T>& model, const T& x,
                                  const TwistVector<T>& tw = TwistVector<T>::untwisted()) {
  return OperatorMatrix<T>::from_columns(
      model.dim(), [&](const Coords<T>& e) { return model.apply_transfer(x, e, tw); });
}

template <FieldScalar T>
struct VacuumWeights {
  std::function<T(const T&)> lambda1, lambda2, lambda3, r1, r3;
};

namespace detail {

// Deterministic sample points away from every inhomogeneity.
template <FieldScalar T>
std::vector<T> probe_points(const ChainModel<T>& model, std::size_t n) {
  std::vector<T> out;
  for (long k = 0; out.size() < n; ++k) {
    T x = field_traits<T>::from_fraction(7 * k + 11, 3) + model.c() * from_int<T>(k % 3);
    bool ok = true;
    for (const T& s : model.xi()) ok = ok && !nearly_equal(x, s, 1e-6);
    if (ok) out.push_back(x);
  }
  return out;
}

}  // namespace detail

/// Vacuum eigenvalues of T_jj, cross-checked against the product formulas at
/// sample points; also checks that T21, T31, T32 annihilate the vacuum.
template <FieldScalar T>
VacuumWeights<T> vacuum_weights(const ChainModel<T>& model, double tol = kDefaultTol) {
  const Coords<T> vac = model.vacuum();
  for (const T& x : detail::probe_points(model, 3)) {
    for (int j = 1; j <= 3; ++j) {
      Coords<T> got = model.apply(j, j, x, vac);
      Coords<T> want = scaled(model.lambda(j, x), vac);
      if (max_abs_diff(got, want) > tol * std::max(1.0, norm2(want)))
        throw ModelError("T_" + std::to_string(j) + std::to_string(j) +
                         " vacuum eigenvalue does not match the product formula");
    }
    for (auto [i, j] : {std::pair{2, 1}, std::pair{3, 1}, std::pair{3, 2}}) {
      if (norm2(model.apply(i, j, x, vac)) > tol)
        throw ModelError("T_" + std::to_string(i) + std::to_string(j) +
                         " does not annihilate the vacuum");
    }
  }
  const ChainModel<T>* m = &model;
  VacuumWeights<T> w;
  w.lambda1 = [m](const T& x) { return m->r1(x); };
  w.lambda2 = [m](const T& x) { return m->lambda2(x); };
  w.lambda3 = [m](const T& x) { return m->r3(x); };
  w.r1 = w.lambda1;
  w.r3 = w.lambda3;
  return w;
}

/// e_ij placed at one site (0-based), identity elsewhere.
template <FieldScalar T>
OperatorMatrix<T> elementary_at_site(std::size_t L, std::size_t site, int i, int j) {
  std::size_t dim = 1;
  for (std::size_t l = 0; l < L; ++l) dim *= 3;
  std::size_t stride = dim;
  for (std::size_t l = 0; l <= site; ++l) stride /= 3;
  OperatorMatrix<T> m(dim);
  return OperatorMatrix<T>::from_columns(dim, [&](const Coords<T>& e) {
    Coords<T> out(dim, from_int<T>(0));
    for (std::size_t idx = 0; idx < dim; ++idx) {
      if (is_zero(e[idx])) continue;
      if (static_cast<int>((idx / stride) % 3) == j - 1)
        out[idx + static_cast<std::size_t>(i - j) * stride] += e[idx];
    }
    return out;
  });
}

/// Quantum inverse scattering: reconstructs e_ij at a site (0-based) from
/// monodromy entries. With the normalized monodromy T~ and t~ = tr T~,
///   e^l_ij = [prod_{k>l} t~(xi_k)] T~_ji(xi_l) [t~(xi_l) prod_{k>l} t~(xi_k)]^{-1}.
/// Sites are counted from the right and indices transposed relative to the
/// homogeneous textbook form, which this reduces to after relabeling.
template <FieldScalar T>
OperatorMatrix<T> local_operator(const ChainModel<T>& model, std::size_t site, int i, int j) {
  if (model.homogeneous_allowed())
    throw NotApplicableError("the local-operator map is disabled for homogeneous chains");
  if (model.count(SiteKind::dual) != 0)
    throw NotApplicableError("the local-operator map is defined for fundamental chains");
  if (site >= model.length()) throw DimensionError("site index out of range");
  const std::size_t dim = model.dim();
  auto tn = [&](const T& x) {
    return OperatorMatrix<T>::from_columns(dim, [&](const Coords<T>& e) {
      Coords<T> out(dim, from_int<T>(0));
      for (int s = 1; s <= 3; ++s) out = add(out, model.apply_normalized(s, s, x, e));
      return out;
    });
  };
  OperatorMatrix<T> right_tail = OperatorMatrix<T>::identity(dim);
  for (std::size_t k = site + 1; k < model.length(); ++k) right_tail = right_tail * tn(model.xi()[k]);
  OperatorMatrix<T> tail_with_site = tn(model.xi()[site]) * right_tail;
  auto inv = try_inverse(tail_with_site.to_dense());
  if (!inv) throw SingularTransferError("transfer matrix product at the reference points is singular");
  OperatorMatrix<T> entry = OperatorMatrix<T>::from_columns(dim, [&](const Coords<T>& e) {
    return model.apply_normalized(j, i, model.xi()[site], e);
  });
  return right_tail * entry * OperatorMatrix<T>::from_dense(*inv);
}

}  // namespace bethe3
