#pragma once

#include <cstdint>
#include <vector>

#include "kktbt/common.hpp"
#include "kktbt/dense_lu.hpp"
#include "kktbt/sparse.hpp"
#include "kktbt/structure.hpp"

namespace kktbt {

struct BtOptions {
  /// Right-hand-side columns processed together in a solve.
  Index panel_width = 32;
  /// Untagged off-diagonal blocks at or above this density are stored dense.
  double dense_threshold = 0.5;
};

/// Off-diagonal block M_ij (i > j) of a block lower triangular matrix.
struct OffDiagonalBlock {
  Index row_block = 0;
  Index col_block = 0;
  BlockStorage storage = BlockStorage::Sparse;
  Vector diagonal;     // Diagonal storage
  DenseMatrix dense;   // Dense storage
  SparseMatrix sparse; // Sparse storage

  Index rows() const noexcept;
  Index cols() const noexcept;
  /// Stored nonzero values.
  Index nnz() const;
};

struct DiagonalBlockFactor {
  /// Exactly the identity; no factorization is stored.
  bool identity = false;
  LUFactors lu;
};

/// Factors of P M Q in block lower triangular form: LU of every non-identity
/// diagonal block plus the off-diagonal blocks in their tagged storage.
class BTFactors {
 public:
  Index dim() const noexcept { return structure_.dim(); }
  const BlockStructure& structure() const noexcept { return structure_; }
  const Permutation& row_permutation() const noexcept { return row_; }
  const Permutation& col_permutation() const noexcept { return col_; }
  const std::vector<DiagonalBlockFactor>& diagonal_blocks() const noexcept { return diag_; }
  /// Off-diagonal blocks of block row i, in increasing column-block order.
  const std::vector<OffDiagonalBlock>& off_diagonal_blocks(Index i) const {
    return lower_[static_cast<std::size_t>(i)];
  }
  Index identity_block_count() const;
  Index off_diagonal_nnz() const;
  /// Stored off-diagonal nnz plus LU nnz of every diagonal block; identity
  /// blocks count their dimension.
  Index factor_nnz() const;
  std::uint64_t factor_flops() const noexcept { return factor_flops_; }
  const BtOptions& options() const noexcept { return opts_; }

  /// Dense P M Q rebuilt from the stored factors.
  DenseMatrix reconstruct() const;

 private:
  friend BTFactors bt_factorize(const SparseMatrix&, const Permutation&, const Permutation&, const BlockStructure&,
                                BtOptions);

  BlockStructure structure_;
  Permutation row_, col_;
  std::vector<DiagonalBlockFactor> diag_;
  std::vector<std::vector<OffDiagonalBlock>> lower_;
  std::uint64_t factor_flops_ = 0;
  BtOptions opts_;
};

/// Factorizes M under row permutation `p_row` and column permutation `p_col`
/// (PMQ(i, j) = M(p_row[i], p_col[j])) with the given diagonal blocks.
/// Throws StructuralError when PMQ has an entry above the block diagonal and
/// SingularBlockError when a diagonal block is numerically singular.
BTFactors bt_factorize(const SparseMatrix& m, const Permutation& p_row, const Permutation& p_col,
                       const BlockStructure& structure, BtOptions opts = {});

/// Solves (P M Q) X = rhs by block forward substitution.
DenseMatrix bt_solve(const BTFactors& f, const DenseMatrix& rhs, FlopCounter* flops = nullptr);

/// Solves M X = rhs in the original ordering.
DenseMatrix bt_solve_original(const BTFactors& f, const DenseMatrix& rhs, FlopCounter* flops = nullptr);

}  // namespace kktbt
