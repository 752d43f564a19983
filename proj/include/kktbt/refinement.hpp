#pragma once

#include <chrono>
#include <cstdint>
#include <utility>

#include "kktbt/common.hpp"
#include "kktbt/sparse.hpp"

namespace kktbt {

class SchurFactors;

struct RefinementOptions {
  /// Stop once max|r - M x| < tol.
  double tol = 1e-5;
  int max_iters = 10;
};

struct SolveReport {
  Vector x;
  /// max|r - M x| against the full assembled matrix.
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  Inertia inertia;
  std::uint64_t solve_flops = 0;
  double solve_seconds = 0.0;
};

/// Iterative refinement around any solver `solve(rhs, FlopCounter*) -> Vector`.
/// The residual is always recomputed from `M_full`.
template <typename SolveFn>
SolveReport refine(SolveFn&& solve, const SparseMatrix& M_full, const Vector& r, RefinementOptions opts = {}) {
  if (!(opts.tol > 0.0) || opts.max_iters < 0) throw ParameterError("refinement needs tol > 0 and max_iters >= 0");
  if (M_full.rows() != r.size() || M_full.cols() != r.size())
    throw DimensionError("refinement: matrix and rhs dimensions differ");
  const auto start = std::chrono::steady_clock::now();
  FlopCounter flops;
  SolveReport rep;
  rep.x = solve(r, &flops);
  const auto nnz = static_cast<std::uint64_t>(M_full.nonZeros());
  auto residual = [&](Vector& res) {
    res = r - M_full * rep.x;
    flops.add(2 * nnz + static_cast<std::uint64_t>(r.size()));
    return res.size() > 0 ? res.cwiseAbs().maxCoeff() : 0.0;
  };
  Vector res;
  rep.residual = residual(res);
  while (!(rep.residual < opts.tol) && rep.iterations < opts.max_iters) {
    rep.x += solve(res, &flops);
    ++rep.iterations;
    rep.residual = residual(res);
  }
  rep.converged = rep.residual < opts.tol;
  rep.solve_flops = flops.flops;
  rep.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

/// Schur backsolve with refinement against the full matrix; fills inertia
/// from the factors.
SolveReport solve_refined(const SchurFactors& f, const SparseMatrix& M_full, const Vector& r,
                          RefinementOptions opts = {});

}  // namespace kktbt
