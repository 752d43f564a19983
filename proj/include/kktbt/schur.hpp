#pragma once

#include <cstdint>
#include <vector>

#include "kktbt/block_triangular.hpp"
#include "kktbt/bunch_kaufman.hpp"
#include "kktbt/common.hpp"
#include "kktbt/sparse.hpp"
#include "kktbt/structure.hpp"

namespace kktbt {

struct SchurOptions {
  /// Added to the first `primal_dim` diagonal entries of S (the A-block
  /// primal part). C itself is never regularized.
  double primal_shift = 0.0;
  Index primal_dim = 0;
  BtOptions bt;
  BunchKaufmanOptions bk;
};

/// FLOPs and wall seconds of the three factorization phases.
struct PhaseCounters {
  std::uint64_t factor_pivot_flops = 0;
  std::uint64_t build_schur_flops = 0;
  std::uint64_t factor_schur_flops = 0;
  double factor_pivot_seconds = 0.0;
  double build_schur_seconds = 0.0;
  double factor_schur_seconds = 0.0;

  std::uint64_t total_flops() const noexcept { return factor_pivot_flops + build_schur_flops + factor_schur_flops; }
  double total_seconds() const noexcept { return factor_pivot_seconds + build_schur_seconds + factor_schur_seconds; }
};

/// Output of the Schur-complement factorization of
///
///   M = [A  B^T]    A: n_A x n_A,  C = [W_yy J^T]: 2 n_y square.
///       [B  C  ]                       [J    0  ]
class SchurFactors {
 public:
  Index n_A() const noexcept { return n_A_; }
  Index n_C() const noexcept { return 2 * n_y_; }
  Index n_y() const noexcept { return n_y_; }
  Index dim() const noexcept { return n_A() + n_C(); }

  const BTFactors& bt() const noexcept { return bt_; }
  /// Symmetrized (and possibly shifted) Schur complement.
  const DenseMatrix& schur() const noexcept { return S_; }
  const LBLTFactors<double>& s_factors() const noexcept { return s_factors_; }
  const SparseMatrix& B() const noexcept { return B_; }
  /// Columns of B holding at least one entry, ascending.
  const std::vector<Index>& nonzero_columns() const noexcept { return nonzero_cols_; }
  /// max|S - S^T| / max|S| before symmetrization.
  double schur_asymmetry() const noexcept { return asymmetry_; }
  const PhaseCounters& counters() const noexcept { return counters_; }

  /// Block-triangular factor nnz + Bunch-Kaufman factor nnz of S + nnz(B).
  Index factor_nnz() const;

  /// Test hook: perturbs S(i, j) and S(j, i) by `delta` and refactorizes S,
  /// leaving schur() and the other factors untouched. The factors then no
  /// longer match M exactly.
  void perturb_schur_factors(Index i, Index j, double delta);

 private:
  friend SchurFactors schur_factorize(const SymmetricSparse&, const SparseMatrix&, const SymmetricSparse&,
                                      const SparseMatrix&, const BlockStructure&, const SchurOptions&);

  Index n_A_ = 0;
  Index n_y_ = 0;
  BTFactors bt_;
  DenseMatrix S_;
  LBLTFactors<double> s_factors_;
  SparseMatrix B_;
  std::vector<Index> nonzero_cols_;
  double asymmetry_ = 0.0;
  PhaseCounters counters_;
  BunchKaufmanOptions bk_;
};

/// Full pivot matrix [W_yy J^T; J 0].
SparseMatrix assemble_pivot_matrix(const SymmetricSparse& W_yy, const SparseMatrix& J);

/// Full symmetric KKT matrix [A B^T; B C].
SparseMatrix assemble_kkt(const SymmetricSparse& A, const SparseMatrix& B, const SymmetricSparse& W_yy,
                          const SparseMatrix& J);

/// Factorizes C through its block-triangular permutation, forms
/// S = A - B^T C^{-1} B over B's nonzero columns and factorizes S.
/// Throws StructuralError when J is structurally singular or not block lower
/// triangular, SingularBlockError when a diagonal block of J is singular.
SchurFactors schur_factorize(const SymmetricSparse& A, const SparseMatrix& B, const SymmetricSparse& W_yy,
                             const SparseMatrix& J, const BlockStructure& j_structure, const SchurOptions& opts = {});

/// Backsolve: r_S = r_A - B^T C^{-1} r_C, x_A = S^{-1} r_S,
/// x_C = C^{-1} (r_C - B x_A).
Vector schur_solve(const SchurFactors& f, const Vector& r, FlopCounter* flops = nullptr);

/// (n_y, n_y, 0) + inertia(S); no work on C.
Inertia schur_inertia(const SchurFactors& f);

/// True iff `i` equals (n, m, 0).
bool check_inertia_target(const Inertia& i, Index n, Index m);

}  // namespace kktbt
