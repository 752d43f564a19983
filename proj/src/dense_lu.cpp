#include "kktbt/dense_lu.hpp"

#include <cmath>

namespace kktbt {

LUFactors::LUFactors(const DenseMatrix& block, Index block_index) {
  if (block.rows() != block.cols()) throw DimensionError("LU of a non-square block");
  const Index n = block.rows();
  if (n == 0) return;
  lu_.compute(block);
  const double scale = block.cwiseAbs().maxCoeff();
  const auto& packed = lu_.matrixLU();
  for (Index i = 0; i < n; ++i) {
    if (!(std::abs(packed(i, i)) >= kSingularTol * scale) || scale == 0.0)
      throw SingularBlockError(block_index, "pivot " + std::to_string(i) + " below threshold");
  }
  for (Index k = 0; k < n; ++k) {
    const auto m = static_cast<std::uint64_t>(n - k - 1);
    factor_flops_ += m + 2 * m * m;
  }
}

Permutation LUFactors::row_permutation() const {
  const auto& idx = lu_.permutationP().indices();
  std::vector<Index> forward(static_cast<std::size_t>(dim()));
  for (Index i = 0; i < dim(); ++i) forward[static_cast<std::size_t>(idx[i])] = i;
  return Permutation(std::move(forward));
}

Index LUFactors::row_swaps() const {
  // Minimal transposition count: size minus number of cycles.
  const auto p = row_permutation();
  std::vector<bool> seen(static_cast<std::size_t>(p.size()), false);
  Index cycles = 0;
  for (Index i = 0; i < p.size(); ++i) {
    if (seen[static_cast<std::size_t>(i)]) continue;
    ++cycles;
    for (Index j = i; !seen[static_cast<std::size_t>(j)]; j = p[j]) seen[static_cast<std::size_t>(j)] = true;
  }
  return p.size() - cycles;
}

Index LUFactors::factor_nnz() const {
  return static_cast<Index>((lu_.matrixLU().array() != 0.0).count());
}

}  // namespace kktbt
