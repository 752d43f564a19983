#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "kktbt/random.hpp"
#include "kktbt/sparse.hpp"

namespace testing_support {

using kktbt::DenseMatrix;
using kktbt::Index;
using kktbt::Permutation;
using kktbt::Rng;
using kktbt::SparseMatrix;
using kktbt::Triplet;

inline Permutation random_permutation(Index n, Rng& rng) {
  std::vector<Index> f(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = i;
  for (Index i = n - 1; i > 0; --i)
    std::swap(f[static_cast<std::size_t>(i)], f[rng.below(static_cast<std::uint64_t>(i + 1))]);
  return Permutation(f);
}

/// `nnz` distinct positions with values uniform in [-1, 1] excluding 0.
inline std::vector<Triplet> random_triplets(Index rows, Index cols, Index nnz, Rng& rng) {
  std::set<std::pair<Index, Index>> used;
  std::vector<Triplet> t;
  while (static_cast<Index>(t.size()) < nnz) {
    const auto i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(rows)));
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(cols)));
    if (!used.insert({i, j}).second) continue;
    double v = rng.uniform(-1.0, 1.0);
    if (v == 0.0) v = 0.5;
    t.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  return t;
}

inline SparseMatrix random_sparse(Index rows, Index cols, Index nnz, Rng& rng) {
  return kktbt::to_compressed(rows, cols, random_triplets(rows, cols, nnz, rng));
}

inline DenseMatrix random_dense(Index rows, Index cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

inline DenseMatrix random_symmetric(Index n, Rng& rng) {
  DenseMatrix m = random_dense(n, n, rng);
  return (m + m.transpose()) / 2.0;
}

/// R^T diag(d) R with R random (almost surely nonsingular).
inline DenseMatrix congruent(const std::vector<double>& d, Rng& rng) {
  const auto n = static_cast<Index>(d.size());
  const DenseMatrix R = random_dense(n, n, rng) + 2.0 * DenseMatrix::Identity(n, n);
  DenseMatrix D = DenseMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) D(i, i) = d[static_cast<std::size_t>(i)];
  DenseMatrix m = R.transpose() * D * R;
  return (m + m.transpose()) / 2.0;
}

}  // namespace testing_support
