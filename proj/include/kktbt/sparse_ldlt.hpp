#pragma once

#include <cstdint>
#include <vector>

#include "kktbt/common.hpp"
#include "kktbt/sparse.hpp"

namespace kktbt {

enum class EliminationOrder { Natural, Reverse };

struct SparseLdltOptions {
  EliminationOrder order = EliminationOrder::Natural;
  /// Columns whose entries are all at or below this times max|M| become null pivots.
  double zero_pivot_tol = 1e-13;
  /// Pivot eigenvalues at or below this times max|M| count as zero in the
  /// inertia.
  double inertia_zero_tol = 1e-9;
  /// A 2x2 pivot with |det| below this times (|d11 d22| + d21^2) is a breakdown.
  double breakdown_tol = 1e-14;
};

/// Generic right-looking sparse LBL^T used as the fill-in comparator.
///
/// Pivots follow the given elimination order. The next column k is taken as a
/// 1x1 pivot whenever |a_kk| >= alpha * max_i |a_ik| (alpha = (1+sqrt(17))/8);
/// otherwise it is paired with its largest off-diagonal row r as a 2x2 pivot
/// and r leaves the order early. No fill-reducing reordering is attempted.
class SparseLdltBaseline {
 public:
  /// Throws BaselineBreakdown when a 2x2 pivot is numerically singular.
  explicit SparseLdltBaseline(const SymmetricSparse& m, SparseLdltOptions opts = {});

  Index dim() const noexcept { return dim_; }
  /// Lower-triangle nnz of the input (diagonal included).
  Index input_nnz() const noexcept { return input_nnz_; }
  /// Strictly-lower L entries plus the lower triangle of B.
  Index factor_nnz() const noexcept { return l_nnz_ + b_nnz_; }
  /// L entries (and 2x2 couplings) absent from the input pattern.
  Index fill_nnz() const noexcept { return fill_nnz_; }
  std::uint64_t flops() const noexcept { return flops_; }
  const Inertia& inertia() const noexcept { return inertia_; }
  Index two_by_two_count() const noexcept { return two_by_two_; }
  /// Pivot columns in the order they were eliminated.
  std::vector<Index> elimination_sequence() const;

  Vector solve(const Vector& rhs, FlopCounter* flops = nullptr) const;

 private:
  struct Step {
    Index k = 0;
    Index r = -1;  // second index of a 2x2 pivot
    double d11 = 0, d21 = 0, d22 = 0;
    bool null = false;
    std::vector<Index> rows;
    std::vector<double> l0, l1;
  };

  Index dim_ = 0;
  Index input_nnz_ = 0;
  Index l_nnz_ = 0;
  Index b_nnz_ = 0;
  Index fill_nnz_ = 0;
  Index two_by_two_ = 0;
  std::uint64_t flops_ = 0;
  Inertia inertia_;
  std::vector<Step> steps_;
};

}  // namespace kktbt
