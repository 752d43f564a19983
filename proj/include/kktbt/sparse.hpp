#pragma once

#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "kktbt/common.hpp"

namespace kktbt {

/// Compressed-column sparse matrix. Row indices are sorted within each column
/// and every stored value is structurally nonzero.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Builds the compressed view from coordinate entries. Duplicates are summed,
/// entries that are exactly 0.0 afterwards are dropped.
/// Throws StructuralError on an out-of-range index.
SparseMatrix to_compressed(Index nrows, Index ncols, std::span<const Triplet> entries);

/// Coordinate entries of `m`, ordered by column then row.
std::vector<Triplet> to_triplets(const SparseMatrix& m);

/// Bijection on {0..size-1}. forward()[i] is the original index placed at
/// position i.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<Index> forward);

  static Permutation identity(Index size);

  Index size() const noexcept { return static_cast<Index>(forward_.size()); }
  const std::vector<Index>& forward() const noexcept { return forward_; }
  Index operator[](Index i) const { return forward_[static_cast<std::size_t>(i)]; }

  Permutation inverse() const;
  /// Position of original index `orig`.
  Index position_of(Index orig) const { return inverse_[static_cast<std::size_t>(orig)]; }

  friend bool operator==(const Permutation& a, const Permutation& b) { return a.forward_ == b.forward_; }

 private:
  std::vector<Index> forward_;
  std::vector<Index> inverse_;
};

/// output(i, j) = m(p_row[i], p_col[j]).
SparseMatrix permute(const SparseMatrix& m, const Permutation& p_row, const Permutation& p_col);

/// Submatrix with rows [row_begin, row_end) and columns [col_begin, col_end),
/// re-indexed from zero.
SparseMatrix extract(const SparseMatrix& m, Index row_begin, Index row_end, Index col_begin, Index col_end);

/// Gathers rows of `v` by a permutation: out[i] = v[p[i]].
template <typename Derived>
typename Derived::PlainObject gather_rows(const Eigen::MatrixBase<Derived>& v, const Permutation& p) {
  typename Derived::PlainObject out(v.rows(), v.cols());
  for (Index i = 0; i < p.size(); ++i) out.row(i) = v.row(p[i]);
  return out;
}

/// Inverse of gather_rows: out[p[i]] = v[i].
template <typename Derived>
typename Derived::PlainObject scatter_rows(const Eigen::MatrixBase<Derived>& v, const Permutation& p) {
  typename Derived::PlainObject out(v.rows(), v.cols());
  for (Index i = 0; i < p.size(); ++i) out.row(p[i]) = v.row(i);
  return out;
}

/// Symmetric matrix stored as its lower triangle (row >= col).
class SymmetricSparse {
 public:
  SymmetricSparse() = default;
  /// Throws StructuralError if `lower` has an entry above the diagonal.
  explicit SymmetricSparse(SparseMatrix lower);
  /// Keeps only the lower triangle of a (assumed symmetric) full matrix.
  static SymmetricSparse from_full(const SparseMatrix& full);

  Index dim() const noexcept { return lower_.rows(); }
  Index nnz() const noexcept { return lower_.nonZeros(); }
  const SparseMatrix& lower() const noexcept { return lower_; }
  SparseMatrix full() const;
  DenseMatrix dense() const;

 private:
  SparseMatrix lower_;
};

/// Max-norm (largest absolute entry).
double max_abs(const SparseMatrix& m);

/// Pattern of `m` with every stored value replaced by 1.
SparseMatrix pattern_of(const SparseMatrix& m);

}  // namespace kktbt
