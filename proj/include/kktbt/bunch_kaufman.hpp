#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kktbt/common.hpp"
#include "kktbt/sparse.hpp"

namespace kktbt {

enum class PivotKind { OneByOne, TwoByTwo };

/// One diagonal block of B in P M P^T = L B L^T. For 1x1 pivots only d11 is
/// meaningful.
template <typename Scalar>
struct PivotBlock {
  Index start = 0;
  PivotKind kind = PivotKind::OneByOne;
  Scalar d11{0}, d21{0}, d22{0};
  // Set when the whole remaining column was numerically zero; nothing was
  // eliminated and solves leave that component at zero.
  bool null = false;

  Index size() const noexcept { return kind == PivotKind::OneByOne ? 1 : 2; }
};

struct BunchKaufmanOptions {
  /// Columns whose entries are all at or below this times max|M| become null
  /// pivots and are not eliminated.
  double zero_pivot_tol = 1e-13;
  /// Pivot eigenvalues at or below this times max|M| count as zero in the
  /// inertia.
  double inertia_zero_tol = 1e-9;
};

/// Classifies the eigenvalues of one pivot block against an absolute threshold.
template <typename Scalar>
Inertia pivot_inertia(const PivotBlock<Scalar>& b, Scalar tol) {
  Inertia in;
  auto classify = [&](Scalar lambda) {
    if (lambda > tol)
      ++in.positive;
    else if (lambda < -tol)
      ++in.negative;
    else
      ++in.zero;
  };
  if (b.kind == PivotKind::OneByOne) {
    classify(b.d11);
  } else {
    using std::hypot;
    const Scalar mean = (b.d11 + b.d22) / Scalar(2);
    const Scalar radius = hypot((b.d11 - b.d22) / Scalar(2), b.d21);
    classify(mean + radius);
    classify(mean - radius);
  }
  return in;
}

template <typename Scalar>
class LBLTFactors;

template <typename Derived>
LBLTFactors<typename Derived::Scalar> bunch_kaufman(const Eigen::MatrixBase<Derived>& m,
                                                     BunchKaufmanOptions opts = {});

/// Symmetric indefinite factorization P M P^T = L B L^T with L unit lower
/// triangular and B block diagonal (1x1 and 2x2 blocks).
template <typename Scalar>
class LBLTFactors {
 public:
  using MatrixType = Dense<Scalar>;
  using VectorType = Vec<Scalar>;

  Index dim() const noexcept { return L_.rows(); }
  const MatrixType& matrixL() const noexcept { return L_; }
  const std::vector<PivotBlock<Scalar>>& pivots() const noexcept { return pivots_; }
  const Permutation& permutation() const noexcept { return perm_; }
  const Inertia& inertia() const noexcept { return inertia_; }
  std::uint64_t flops() const noexcept { return flops_; }
  Scalar zero_threshold() const noexcept { return zero_tol_; }
  Scalar inertia_threshold() const noexcept { return inertia_tol_; }

  Index two_by_two_count() const {
    return std::count_if(pivots_.begin(), pivots_.end(),
                         [](const auto& p) { return p.kind == PivotKind::TwoByTwo; });
  }

  /// Nonzeros in strictly-lower L plus the lower triangle of B.
  Index factor_nnz() const {
    Index nnz = 0;
    for (Index j = 0; j < dim(); ++j)
      for (Index i = j + 1; i < dim(); ++i) nnz += L_(i, j) != Scalar(0);
    for (const auto& p : pivots_) nnz += p.kind == PivotKind::OneByOne ? 1 : 3;
    return nnz;
  }

  MatrixType block_diagonal() const {
    MatrixType B = MatrixType::Zero(dim(), dim());
    for (const auto& p : pivots_) {
      B(p.start, p.start) = p.d11;
      if (p.kind == PivotKind::TwoByTwo) {
        B(p.start + 1, p.start) = p.d21;
        B(p.start, p.start + 1) = p.d21;
        B(p.start + 1, p.start + 1) = p.d22;
      }
    }
    return B;
  }

  /// Solves M x = rhs. Components along zero pivots are set to zero.
  template <typename Derived>
  Dense<Scalar> solve(const Eigen::MatrixBase<Derived>& rhs, FlopCounter* flops = nullptr) const {
    if (rhs.rows() != dim()) throw DimensionError("rhs length does not match factor dimension");
    Dense<Scalar> y = gather_rows(rhs.template cast<Scalar>().eval(), perm_);
    L_.template triangularView<Eigen::UnitLower>().solveInPlace(y);
    for (const auto& p : pivots_) {
      if (p.kind == PivotKind::OneByOne) {
        if (p.null)
          y.row(p.start).setZero();
        else
          y.row(p.start) /= p.d11;
      } else {
        const Scalar det = p.d11 * p.d22 - p.d21 * p.d21;
        for (Index c = 0; c < y.cols(); ++c) {
          const Scalar a = y(p.start, c), b = y(p.start + 1, c);
          y(p.start, c) = (p.d22 * a - p.d21 * b) / det;
          y(p.start + 1, c) = (p.d11 * b - p.d21 * a) / det;
        }
      }
    }
    L_.transpose().template triangularView<Eigen::UnitUpper>().solveInPlace(y);
    const auto n = static_cast<std::uint64_t>(dim());
    count_flops(flops, (2 * n * n + 2 * n) * static_cast<std::uint64_t>(rhs.cols()));
    return scatter_rows(y, perm_);
  }

 private:
  template <typename Derived>
  friend LBLTFactors<typename Derived::Scalar> bunch_kaufman(const Eigen::MatrixBase<Derived>&, BunchKaufmanOptions);

  MatrixType L_;
  std::vector<PivotBlock<Scalar>> pivots_;
  Permutation perm_;
  Inertia inertia_;
  std::uint64_t flops_ = 0;
  Scalar zero_tol_{0};
  Scalar inertia_tol_{0};
};

namespace detail {

// Exchanges symmetric indices a < b of a lower-stored matrix. Columns left of
// `a` (already-computed L columns or active columns) swap as rows.
template <typename Scalar>
void symmetric_swap_lower(Dense<Scalar>& W, Index a, Index b) {
  if (a == b) return;
  if (a > b) std::swap(a, b);
  const Index n = W.rows();
  W.row(a).head(a).swap(W.row(b).head(a));
  std::swap(W(a, a), W(b, b));
  for (Index j = a + 1; j < b; ++j) std::swap(W(j, a), W(b, j));
  if (b + 1 < n) W.col(a).tail(n - b - 1).swap(W.col(b).tail(n - b - 1));
}

// Rows below `end` holding a nonzero in any of columns [begin, end). Updates
// skip exactly-zero multipliers.
template <typename Scalar>
std::vector<Index> nonzero_rows(const Dense<Scalar>& W, Index begin, Index end) {
  std::vector<Index> rows;
  for (Index i = end; i < W.rows(); ++i)
    for (Index j = begin; j < end; ++j)
      if (W(i, j) != Scalar(0)) {
        rows.push_back(i);
        break;
      }
  return rows;
}

}  // namespace detail

/// Classic partial-pivoting Bunch-Kaufman with alpha = (1 + sqrt(17)) / 8.
/// Only the lower triangle of `m` is read.
template <typename Derived>
LBLTFactors<typename Derived::Scalar> bunch_kaufman(const Eigen::MatrixBase<Derived>& m,
                                                     BunchKaufmanOptions opts) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  if (m.rows() != m.cols()) throw DimensionError("Bunch-Kaufman needs a square matrix");
  const Index n = m.rows();
  const Scalar alpha = (Scalar(1) + sqrt(Scalar(17))) / Scalar(8);

  Dense<Scalar> W = m.template triangularView<Eigen::Lower>();
  const Scalar maxnorm = n > 0 ? W.cwiseAbs().maxCoeff() : Scalar(0);
  const Scalar zero_tol = Scalar(opts.zero_pivot_tol) * maxnorm;

  LBLTFactors<Scalar> f;
  f.zero_tol_ = zero_tol;
  f.inertia_tol_ = Scalar(opts.inertia_zero_tol) * maxnorm;
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});

  Index k = 0;
  while (k < n) {
    const Scalar absakk = abs(W(k, k));
    Scalar colmax{0};
    Index imax = k;
    if (k + 1 < n) {
      Index r = 0;
      colmax = W.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&r);
      imax = k + 1 + r;
    }

    if (std::max(absakk, colmax) <= zero_tol) {
      // Numerically empty column: zero pivot, nothing to eliminate.
      PivotBlock<Scalar> p;
      p.start = k;
      p.d11 = W(k, k);
      p.null = true;
      f.pivots_.push_back(p);
      if (k + 1 < n) W.col(k).tail(n - k - 1).setZero();
      ++k;
      continue;
    }

    Index kp = k;
    PivotKind kind = PivotKind::OneByOne;
    if (absakk < alpha * colmax) {
      Scalar rowmax{0};
      for (Index j = k; j < imax; ++j) rowmax = std::max(rowmax, abs(W(imax, j)));
      if (imax + 1 < n) rowmax = std::max(rowmax, W.col(imax).tail(n - imax - 1).cwiseAbs().maxCoeff());
      if (absakk >= alpha * colmax * (colmax / rowmax)) {
        kp = k;
      } else if (abs(W(imax, imax)) >= alpha * rowmax) {
        kp = imax;
      } else {
        kp = imax;
        kind = PivotKind::TwoByTwo;
      }
    }

    const Index kk = kind == PivotKind::OneByOne ? k : k + 1;
    if (kp != kk) {
      detail::symmetric_swap_lower(W, kk, kp);
      std::swap(perm[static_cast<std::size_t>(kk)], perm[static_cast<std::size_t>(kp)]);
    }

    PivotBlock<Scalar> p;
    p.start = k;
    p.kind = kind;
    if (kind == PivotKind::OneByOne) {
      const Scalar d = W(k, k);
      p.d11 = d;
      const std::vector<Index> nz = detail::nonzero_rows(W, k, k + 1);
      for (std::size_t b = 0; b < nz.size(); ++b) {
        const Scalar lj = W(nz[b], k) / d;
        for (std::size_t a = b; a < nz.size(); ++a) W(nz[a], nz[b]) -= W(nz[a], k) * lj;
      }
      for (const Index i : nz) W(i, k) /= d;
      const auto r = static_cast<std::uint64_t>(nz.size());
      f.flops_ += 2 * r + r * (r + 1);
      k += 1;
    } else {
      p.d11 = W(k, k);
      p.d21 = W(k + 1, k);
      p.d22 = W(k + 1, k + 1);
      const Scalar det = p.d11 * p.d22 - p.d21 * p.d21;
      const Scalar i11 = p.d22 / det, i21 = -p.d21 / det, i22 = p.d11 / det;
      const std::vector<Index> nz = detail::nonzero_rows(W, k, k + 2);
      std::vector<Scalar> c0(nz.size()), c1(nz.size());
      for (std::size_t a = 0; a < nz.size(); ++a) {
        c0[a] = W(nz[a], k);
        c1[a] = W(nz[a], k + 1);
        W(nz[a], k) = c0[a] * i11 + c1[a] * i21;
        W(nz[a], k + 1) = c0[a] * i21 + c1[a] * i22;
      }
      for (std::size_t b = 0; b < nz.size(); ++b)
        for (std::size_t a = b; a < nz.size(); ++a)
          W(nz[a], nz[b]) -= W(nz[a], k) * c0[b] + W(nz[a], k + 1) * c1[b];
      W(k + 1, k) = Scalar(0);
      const auto r = static_cast<std::uint64_t>(nz.size());
      f.flops_ += 6 + 6 * r + 2 * r * (r + 1);
      k += 2;
    }
    f.pivots_.push_back(p);
  }

  f.L_ = W.template triangularView<Eigen::StrictlyLower>();
  f.L_.diagonal().setOnes();
  f.perm_ = Permutation(std::move(perm));
  for (const auto& p : f.pivots_) f.inertia_ = f.inertia_ + pivot_inertia(p, f.inertia_tol_);
  return f;
}

inline LBLTFactors<double> bunch_kaufman(const SymmetricSparse& m, BunchKaufmanOptions opts = {}) {
  const DenseMatrix lower(m.lower());
  return bunch_kaufman(lower, opts);
}

}  // namespace kktbt
