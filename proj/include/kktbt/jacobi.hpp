#pragma once

#include <cmath>

#include <Eigen/Core>

#include "kktbt/common.hpp"

namespace kktbt {

struct JacobiOptions {
  /// Stop once the off-diagonal Frobenius norm is below this times ||M||_F.
  double off_tol = 1e-12;
  /// Eigenvalues with |lambda| <= zero_tol * max|M| are counted as zero.
  double zero_tol = 1e-9;
  int max_sweeps = 100;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. Slow but
/// independent of any factorization; used as the inertia oracle.
template <typename Derived>
Vec<typename Derived::Scalar> jacobi_eigenvalues(const Eigen::MatrixBase<Derived>& m, JacobiOptions opts = {}) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  if (m.rows() != m.cols()) throw DimensionError("eigenvalues of a non-square matrix");
  const Index n = m.rows();
  Dense<Scalar> a = m;
  const Scalar fro = a.norm();
  auto off_norm = [&] {
    Scalar s{0};
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return sqrt(s);
  };

  for (int sweep = 0; sweep < opts.max_sweeps && off_norm() > Scalar(opts.off_tol) * fro; ++sweep) {
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(q, p);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) / (abs(theta) + sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        // Rotate columns p and q (contiguous), then mirror into rows.
        for (Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const Scalar arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(q, p) = a(p, q) = Scalar(0);
        for (Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          a(p, r) = a(r, p);
          a(q, r) = a(r, q);
        }
      }
    }
  }
  return a.diagonal();
}

template <typename Derived>
Inertia inertia_oracle(const Eigen::MatrixBase<Derived>& m, JacobiOptions opts = {}) {
  using Scalar = typename Derived::Scalar;
  const Scalar maxnorm = m.size() > 0 ? m.cwiseAbs().maxCoeff() : Scalar(0);
  const Scalar tol = Scalar(opts.zero_tol) * maxnorm;
  Inertia in;
  for (const Scalar lambda : jacobi_eigenvalues(m, opts)) {
    if (lambda > tol)
      ++in.positive;
    else if (lambda < -tol)
      ++in.negative;
    else
      ++in.zero;
  }
  return in;
}

}  // namespace kktbt
