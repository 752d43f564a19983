#pragma once

#include <cstdint>

#include <Eigen/LU>

#include "kktbt/common.hpp"
#include "kktbt/sparse.hpp"

namespace kktbt {

/// Partial-pivoting LU of a dense diagonal block, P*A = L*U.
class LUFactors {
 public:
  /// Relative pivot threshold: a block is singular when some |U(i,i)| falls
  /// below this times the largest input magnitude.
  static constexpr double kSingularTol = 1e-12;

  LUFactors() = default;
  /// Throws SingularBlockError tagged with `block_index`.
  explicit LUFactors(const DenseMatrix& block, Index block_index = 0);

  Index dim() const noexcept { return lu_.rows(); }

  /// Row permutation with (P*A).row(i) = A.row(row_permutation()[i]).
  Permutation row_permutation() const;
  Index row_swaps() const;
  const DenseMatrix& packed() const noexcept { return lu_.matrixLU(); }

  template <typename Derived>
  void solve_in_place(Eigen::MatrixBase<Derived>& rhs, FlopCounter* flops = nullptr) const {
    rhs = lu_.solve(typename Derived::PlainObject(rhs));
    const auto n = static_cast<std::uint64_t>(dim());
    count_flops(flops, (2 * n * n - n) * static_cast<std::uint64_t>(rhs.cols()));
  }
  template <typename Derived>
  void solve_in_place(Eigen::MatrixBase<Derived>&& rhs, FlopCounter* flops = nullptr) const {
    solve_in_place(rhs, flops);
  }

  /// Nonzeros of L (unit diagonal implicit, not counted) plus U.
  Index factor_nnz() const;
  std::uint64_t factor_flops() const noexcept { return factor_flops_; }

 private:
  Eigen::PartialPivLU<DenseMatrix> lu_;
  std::uint64_t factor_flops_ = 0;
};

}  // namespace kktbt
