#include "kktbt/block_triangular.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace kktbt {

Index OffDiagonalBlock::rows() const noexcept {
  switch (storage) {
    case BlockStorage::Diagonal:
      return diagonal.size();
    case BlockStorage::Dense:
      return dense.rows();
    case BlockStorage::Sparse:
      return sparse.rows();
  }
  return 0;
}

Index OffDiagonalBlock::cols() const noexcept {
  switch (storage) {
    case BlockStorage::Diagonal:
      return diagonal.size();
    case BlockStorage::Dense:
      return dense.cols();
    case BlockStorage::Sparse:
      return sparse.cols();
  }
  return 0;
}

Index OffDiagonalBlock::nnz() const {
  switch (storage) {
    case BlockStorage::Diagonal:
      return (diagonal.array() != 0.0).count();
    case BlockStorage::Dense:
      return (dense.array() != 0.0).count();
    case BlockStorage::Sparse:
      return sparse.nonZeros();
  }
  return 0;
}

Index BTFactors::identity_block_count() const {
  return std::count_if(diag_.begin(), diag_.end(), [](const auto& d) { return d.identity; });
}

Index BTFactors::off_diagonal_nnz() const {
  Index nnz = 0;
  for (const auto& row : lower_)
    for (const auto& b : row) nnz += b.nnz();
  return nnz;
}

Index BTFactors::factor_nnz() const {
  Index nnz = off_diagonal_nnz();
  for (std::size_t b = 0; b < diag_.size(); ++b)
    nnz += diag_[b].identity ? structure_.size(static_cast<Index>(b)) : diag_[b].lu.factor_nnz();
  return nnz;
}

DenseMatrix BTFactors::reconstruct() const {
  const Index n = dim();
  DenseMatrix m = DenseMatrix::Zero(n, n);
  for (Index b = 0; b < structure_.num_blocks(); ++b) {
    const Index s = structure_.size(b), o = structure_.begin(b);
    const auto& d = diag_[static_cast<std::size_t>(b)];
    if (d.identity) {
      m.block(o, o, s, s).setIdentity();
    } else {
      const DenseMatrix& lu = d.lu.packed();
      DenseMatrix L = lu.triangularView<Eigen::UnitLower>();
      DenseMatrix U = lu.triangularView<Eigen::Upper>();
      const DenseMatrix pa = L * U;
      const Permutation p = d.lu.row_permutation();
      for (Index i = 0; i < s; ++i) m.block(o, o, s, s).row(p[i]) = pa.row(i);
    }
  }
  for (const auto& row : lower_)
    for (const auto& blk : row) {
      auto target = m.block(structure_.begin(blk.row_block), structure_.begin(blk.col_block), blk.rows(), blk.cols());
      switch (blk.storage) {
        case BlockStorage::Diagonal:
          target = blk.diagonal.asDiagonal();
          break;
        case BlockStorage::Dense:
          target = blk.dense;
          break;
        case BlockStorage::Sparse:
          target = DenseMatrix(blk.sparse);
          break;
      }
    }
  return m;
}

namespace {

bool is_identity(const std::vector<Triplet>& t, Index size) {
  if (static_cast<Index>(t.size()) != size) return false;
  return std::all_of(t.begin(), t.end(), [](const Triplet& e) { return e.row() == e.col() && e.value() == 1.0; });
}

OffDiagonalBlock make_off_diagonal(Index bi, Index bj, Index rows, Index cols, const std::vector<Triplet>& t,
                                   std::optional<BlockStorage> tag, double dense_threshold) {
  OffDiagonalBlock blk;
  blk.row_block = bi;
  blk.col_block = bj;
  const bool diagonal_pattern =
      rows == cols && std::all_of(t.begin(), t.end(), [](const Triplet& e) { return e.row() == e.col(); });
  BlockStorage s;
  if (tag && (*tag != BlockStorage::Diagonal || diagonal_pattern))
    s = *tag;
  else if (diagonal_pattern)
    s = BlockStorage::Diagonal;
  else if (static_cast<double>(t.size()) >= dense_threshold * static_cast<double>(rows * cols))
    s = BlockStorage::Dense;
  else
    s = BlockStorage::Sparse;
  blk.storage = s;
  switch (s) {
    case BlockStorage::Diagonal:
      blk.diagonal = Vector::Zero(rows);
      for (const auto& e : t) blk.diagonal[e.row()] += e.value();
      break;
    case BlockStorage::Dense:
      blk.dense = DenseMatrix::Zero(rows, cols);
      for (const auto& e : t) blk.dense(e.row(), e.col()) += e.value();
      break;
    case BlockStorage::Sparse:
      blk.sparse = to_compressed(rows, cols, t);
      break;
  }
  return blk;
}

}  // namespace

BTFactors bt_factorize(const SparseMatrix& m, const Permutation& p_row, const Permutation& p_col,
                       const BlockStructure& structure, BtOptions opts) {
  const Index n = structure.dim();
  if (m.rows() != n || m.cols() != n || p_row.size() != n || p_col.size() != n)
    throw DimensionError("block-triangular factorization: dimension mismatch");
  if (opts.panel_width < 1) throw ParameterError("panel width must be positive");

  const SparseMatrix pm = permute(m, p_row, p_col);
  const Index nb = structure.num_blocks();
  std::vector<std::vector<Triplet>> diag_entries(static_cast<std::size_t>(nb));
  std::map<std::pair<Index, Index>, std::vector<Triplet>> off;
  for (Index j = 0; j < pm.outerSize(); ++j) {
    const Index bj = structure.block_of(j);
    const Index cj = j - structure.begin(bj);
    for (SparseMatrix::InnerIterator it(pm, j); it; ++it) {
      const Index bi = structure.block_of(it.row());
      const Index ri = it.row() - structure.begin(bi);
      if (bi < bj)
        throw StructuralError("entry (" + std::to_string(it.row()) + ", " + std::to_string(j) +
                              ") lies above the block diagonal");
      const Triplet e(static_cast<int>(ri), static_cast<int>(cj), it.value());
      if (bi == bj)
        diag_entries[static_cast<std::size_t>(bi)].push_back(e);
      else
        off[{bi, bj}].push_back(e);
    }
  }

  BTFactors f;
  f.structure_ = structure;
  f.row_ = p_row;
  f.col_ = p_col;
  f.opts_ = opts;
  f.diag_.resize(static_cast<std::size_t>(nb));
  for (Index b = 0; b < nb; ++b) {
    const auto& t = diag_entries[static_cast<std::size_t>(b)];
    auto& d = f.diag_[static_cast<std::size_t>(b)];
    const Index s = structure.size(b);
    if (is_identity(t, s)) {
      d.identity = true;
      continue;
    }
    DenseMatrix block = DenseMatrix::Zero(s, s);
    for (const auto& e : t) block(e.row(), e.col()) += e.value();
    d.lu = LUFactors(block, b);
    f.factor_flops_ += d.lu.factor_flops();
  }
  f.lower_.resize(static_cast<std::size_t>(nb));
  for (const auto& [key, t] : off) {
    const auto [bi, bj] = key;
    f.lower_[static_cast<std::size_t>(bi)].push_back(make_off_diagonal(
        bi, bj, structure.size(bi), structure.size(bj), t, structure.tag(bi, bj), opts.dense_threshold));
  }
  return f;
}

DenseMatrix bt_solve(const BTFactors& f, const DenseMatrix& rhs, FlopCounter* flops) {
  const BlockStructure& s = f.structure();
  if (rhs.rows() != f.dim()) throw DimensionError("rhs rows do not match block-triangular dimension");
  DenseMatrix x = rhs;
  const Index w = f.options().panel_width;
  for (Index c0 = 0; c0 < x.cols(); c0 += w) {
    const Index q = std::min(w, x.cols() - c0);
    const auto uq = static_cast<std::uint64_t>(q);
    for (Index i = 0; i < s.num_blocks(); ++i) {
      auto xi = x.block(s.begin(i), c0, s.size(i), q);
      for (const auto& blk : f.off_diagonal_blocks(i)) {
        const auto xj = x.block(s.begin(blk.col_block), c0, s.size(blk.col_block), q);
        switch (blk.storage) {
          case BlockStorage::Diagonal:
            xi -= blk.diagonal.asDiagonal() * xj;
            count_flops(flops, 2 * static_cast<std::uint64_t>(blk.diagonal.size()) * uq);
            break;
          case BlockStorage::Dense:
            xi.noalias() -= blk.dense * xj;
            count_flops(flops, 2 * static_cast<std::uint64_t>(blk.dense.size()) * uq);
            break;
          case BlockStorage::Sparse:
            xi.noalias() -= blk.sparse * xj;
            count_flops(flops, 2 * static_cast<std::uint64_t>(blk.sparse.nonZeros()) * uq);
            break;
        }
      }
      const auto& d = f.diagonal_blocks()[static_cast<std::size_t>(i)];
      if (!d.identity) d.lu.solve_in_place(xi, flops);
    }
  }
  return x;
}

DenseMatrix bt_solve_original(const BTFactors& f, const DenseMatrix& rhs, FlopCounter* flops) {
  if (rhs.rows() != f.dim()) throw DimensionError("rhs rows do not match block-triangular dimension");
  const DenseMatrix y = bt_solve(f, gather_rows(rhs, f.row_permutation()), flops);
  return scatter_rows(y, f.col_permutation());
}

}  // namespace kktbt
