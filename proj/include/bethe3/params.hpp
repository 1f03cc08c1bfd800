#pragma once

// Ordered parameter sets and the bipartition machinery behind every
// partition sum in the library.

#include <algorithm>
#include <exception>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bethe3/errors.hpp"
#include "bethe3/field.hpp"

namespace bethe3 {

template <FieldScalar T>
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(std::vector<T> elems, std::string name = {})
      : elems_(std::move(elems)), name_(std::move(name)) {}
  ParamSet(std::initializer_list<T> elems) : elems_(elems) {}

  std::size_t size() const noexcept { return elems_.size(); }
  bool empty() const noexcept { return elems_.empty(); }
  const T& operator[](std::size_t i) const { return elems_[i]; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }
  const std::vector<T>& elems() const noexcept { return elems_; }
  const std::string& name() const noexcept { return name_; }
  operator std::span<const T>() const noexcept { return elems_; }  // NOLINT
  std::span<const T> span() const noexcept { return elems_; }

  /// The set with element j removed, order preserved.
  ParamSet without(std::size_t j) const {
    std::vector<T> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i)
      if (i != j) out.push_back(elems_[i]);
    return ParamSet(std::move(out));
  }

  /// Elementwise x + d; the input is not modified.
  ParamSet shifted(const T& d) const {
    std::vector<T> out;
    out.reserve(size());
    for (const T& x : elems_) out.push_back(x + d);
    return ParamSet(std::move(out));
  }

  ParamSet select(std::span<const std::size_t> idx) const {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(elems_.at(i));
    return ParamSet(std::move(out));
  }

  /// {this, other} in that order.
  ParamSet joined(const ParamSet& other) const {
    std::vector<T> out = elems_;
    out.insert(out.end(), other.elems_.begin(), other.elems_.end());
    return ParamSet(std::move(out));
  }

  ParamSet with(const T& x) const {
    std::vector<T> out = elems_;
    out.push_back(x);
    return ParamSet(std::move(out));
  }

  bool pairwise_distinct(double tol = kDefaultTol) const {
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j)
        if (nearly_equal(elems_[i], elems_[j], tol)) return false;
    return true;
  }

  friend bool operator==(const ParamSet& a, const ParamSet& b) { return a.elems_ == b.elems_; }

 private:
  std::vector<T> elems_;
  std::string name_;
};

/// Index bipartition {I, II} of 0..n-1.
struct Bipartition {
  std::vector<std::size_t> part_I;
  std::vector<std::size_t> part_II;
  friend bool operator==(const Bipartition&, const Bipartition&) = default;
};

/// Lazily enumerates the C(n,k) bipartitions with |I| = k, lexicographic in
/// the sorted index tuple of I.
class BipartitionStream {
 public:
  BipartitionStream(std::size_t n, std::size_t k) : n_(n), k_(k) {
    if (k > n) {
      throw CardinalityError("bipartition size " + std::to_string(k) + " exceeds set size " +
                             std::to_string(n));
    }
    comb_.resize(k);
    for (std::size_t i = 0; i < k; ++i) comb_[i] = i;
  }

  std::optional<Bipartition> next() {
    if (done_) return std::nullopt;
    Bipartition out = current();
    advance();
    return out;
  }

 private:
  Bipartition current() const {
    Bipartition b;
    b.part_I = comb_;
    b.part_II.reserve(n_ - k_);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (j < k_ && comb_[j] == i) {
        ++j;
      } else {
        b.part_II.push_back(i);
      }
    }
    return b;
  }

  void advance() {
    if (k_ == 0) {
      done_ = true;
      return;
    }
    std::size_t i = k_;
    while (i > 0) {
      --i;
      if (comb_[i] < n_ - k_ + i) {
        ++comb_[i];
        for (std::size_t j = i + 1; j < k_; ++j) comb_[j] = comb_[j - 1] + 1;
        return;
      }
    }
    done_ = true;
  }

  std::size_t n_, k_;
  std::vector<std::size_t> comb_;
  bool done_ = false;
};

inline std::vector<Bipartition> enumerate_bipartitions(std::size_t n, std::size_t k) {
  BipartitionStream s(n, k);
  std::vector<Bipartition> out;
  while (auto b = s.next()) out.push_back(std::move(*b));
  return out;
}

template <FieldScalar T>
std::vector<Bipartition> enumerate_bipartitions(const ParamSet<T>& S, std::size_t k) {
  return enumerate_bipartitions(S.size(), k);
}

/// The two halves of S selected by a bipartition.
template <FieldScalar T>
std::pair<ParamSet<T>, ParamSet<T>> split(const ParamSet<T>& S, const Bipartition& b) {
  return {S.select(b.part_I), S.select(b.part_II)};
}

inline std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// ---------------------------------------------------------------------------
// Deterministic reduction.
//
// A sum over N canonically ordered terms is cut into fixed blocks of
// kReductionBlock terms. Blocks are summed left to right and the block sums
// are combined in block order, whatever the thread count, so float results
// are bit-identical between serial and parallel runs.

inline constexpr std::size_t kReductionBlock = 32;

/// Process-wide default worker count for partition sums (1 = serial).
inline unsigned& default_threads() {
  static unsigned n = 1;
  return n;
}

/// Reduces term(0..count-1) with `combine` in canonical block order.
template <class Acc, class TermFn, class Combine>
Acc canonical_reduce(std::size_t count, const Acc& zero, TermFn&& term, Combine&& combine,
                     unsigned threads = default_threads()) {
  const std::size_t blocks = (count + kReductionBlock - 1) / kReductionBlock;
  std::vector<Acc> partial(blocks, zero);
  auto run_block = [&](std::size_t b) {
    Acc acc = zero;
    const std::size_t hi = std::min(count, (b + 1) * kReductionBlock);
    for (std::size_t i = b * kReductionBlock; i < hi; ++i) combine(acc, term(i));
    partial[b] = std::move(acc);
  };
  if (threads <= 1 || blocks <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    const unsigned nt = static_cast<unsigned>(std::min<std::size_t>(threads, blocks));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nt);
    for (unsigned w = 0; w < nt; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t b = w; b < blocks; b += nt) run_block(b);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  Acc total = zero;
  for (auto& p : partial) combine(total, std::move(p));
  return total;
}

template <FieldScalar T, class TermFn>
T canonical_sum(std::size_t count, TermFn&& term, unsigned threads = default_threads()) {
  return canonical_reduce(
      count, from_int<T>(0), std::forward<TermFn>(term),
      [](T& acc, const T& x) { acc += x; }, threads);
}

/// Joint bipartition of (u, v) with |u_I| = |v_I| = k, for k = 0..min(|u|,|v|).
struct JointPartition {
  Bipartition u;
  Bipartition v;
};

/// All admissible joint partitions, ordered by k, then u-partition, then v-partition.
inline std::vector<JointPartition> joint_partitions(std::size_t nu, std::size_t nv) {
  std::vector<JointPartition> out;
  for (std::size_t k = 0; k <= std::min(nu, nv); ++k) {
    auto pu = enumerate_bipartitions(nu, k);
    auto pv = enumerate_bipartitions(nv, k);
    for (auto& a : pu)
      for (auto& b : pv) out.push_back({a, b});
  }
  return out;
}

/// Sum of term(u_I, u_II, v_I, v_II) over all joint partitions with
/// |u_I| = |v_I|. A pole raised by a term is reported with its partition.
template <FieldScalar T, class Term>
T joint_partition_sum(const ParamSet<T>& u, const ParamSet<T>& v, Term&& term,
                      unsigned threads = default_threads()) {
  const auto parts = joint_partitions(u.size(), v.size());
  return canonical_sum<T>(
      parts.size(),
      [&](std::size_t i) -> T {
        const auto& jp = parts[i];
        auto [uI, uII] = split(u, jp.u);
        auto [vI, vII] = split(v, jp.v);
        try {
          return term(uI, uII, vI, vII);
        } catch (const PoleError& e) {
          throw PoleError(e.factor(), "in joint partition #" + std::to_string(i) +
                                          " (k=" + std::to_string(jp.u.part_I.size()) + ")");
        }
      },
      threads);
}

}  // namespace bethe3
