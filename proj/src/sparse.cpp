#include "kktbt/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kktbt {

SparseMatrix to_compressed(Index nrows, Index ncols, std::span<const Triplet> entries) {
  if (nrows < 0 || ncols < 0) throw DimensionError("negative matrix dimension");
  for (const auto& t : entries) {
    if (t.row() < 0 || t.row() >= nrows || t.col() < 0 || t.col() >= ncols)
      throw StructuralError("entry (" + std::to_string(t.row()) + "," + std::to_string(t.col()) +
                            ") out of range for " + std::to_string(nrows) + "x" + std::to_string(ncols));
  }
  SparseMatrix m(nrows, ncols);
  m.setFromTriplets(entries.begin(), entries.end());
  m.prune([](Index, Index, double v) { return v != 0.0; });
  m.makeCompressed();
  return m;
}

std::vector<Triplet> to_triplets(const SparseMatrix& m) {
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      out.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  return out;
}

Permutation::Permutation(std::vector<Index> forward) : forward_(std::move(forward)) {
  inverse_.assign(forward_.size(), -1);
  for (std::size_t i = 0; i < forward_.size(); ++i) {
    const Index f = forward_[i];
    if (f < 0 || f >= size() || inverse_[static_cast<std::size_t>(f)] != -1)
      throw DimensionError("permutation vector is not a bijection");
    inverse_[static_cast<std::size_t>(f)] = static_cast<Index>(i);
  }
}

Permutation Permutation::identity(Index size) {
  std::vector<Index> f(static_cast<std::size_t>(size));
  std::iota(f.begin(), f.end(), Index{0});
  return Permutation(std::move(f));
}

Permutation Permutation::inverse() const { return Permutation(inverse_); }

SparseMatrix permute(const SparseMatrix& m, const Permutation& p_row, const Permutation& p_col) {
  if (p_row.size() != m.rows() || p_col.size() != m.cols())
    throw DimensionError("permutation size does not match matrix dimensions");
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      t.emplace_back(static_cast<int>(p_row.position_of(it.row())), static_cast<int>(p_col.position_of(it.col())),
                     it.value());
  SparseMatrix out(m.rows(), m.cols());
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

SparseMatrix extract(const SparseMatrix& m, Index row_begin, Index row_end, Index col_begin, Index col_end) {
  if (row_begin < 0 || row_end > m.rows() || row_begin > row_end || col_begin < 0 || col_end > m.cols() ||
      col_begin > col_end)
    throw DimensionError("extract range out of bounds");
  SparseMatrix out = m.block(row_begin, col_begin, row_end - row_begin, col_end - col_begin);
  out.makeCompressed();
  return out;
}

SymmetricSparse::SymmetricSparse(SparseMatrix lower) : lower_(std::move(lower)) {
  if (lower_.rows() != lower_.cols()) throw DimensionError("symmetric matrix must be square");
  for (Index j = 0; j < lower_.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(lower_, j); it; ++it)
      if (it.row() < it.col()) throw StructuralError("symmetric storage holds an entry above the diagonal");
  lower_.makeCompressed();
}

SymmetricSparse SymmetricSparse::from_full(const SparseMatrix& full) {
  SparseMatrix lower = full.triangularView<Eigen::Lower>();
  return SymmetricSparse(std::move(lower));
}

SparseMatrix SymmetricSparse::full() const {
  SparseMatrix f = lower_.selfadjointView<Eigen::Lower>();
  f.makeCompressed();
  return f;
}

DenseMatrix SymmetricSparse::dense() const { return DenseMatrix(full()); }

double max_abs(const SparseMatrix& m) {
  double mx = 0.0;
  for (Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it) mx = std::max(mx, std::abs(it.value()));
  return mx;
}

SparseMatrix pattern_of(const SparseMatrix& m) {
  SparseMatrix p = m;
  for (Index j = 0; j < p.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(p, j); it; ++it) it.valueRef() = 1.0;
  return p;
}

}  // namespace kktbt
