#include "kktbt/schur.hpp"

#include <chrono>
#include <string>

#include "kktbt/refinement.hpp"

namespace kktbt {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void append_shifted(std::vector<Triplet>& out, const SparseMatrix& m, Index row0, Index col0) {
  for (Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      out.emplace_back(static_cast<int>(row0 + it.row()), static_cast<int>(col0 + j), it.value());
}

}  // namespace

SparseMatrix assemble_pivot_matrix(const SymmetricSparse& W_yy, const SparseMatrix& J) {
  const Index n_y = W_yy.dim();
  if (J.rows() != n_y || J.cols() != n_y) throw DimensionError("J must be n_y x n_y");
  std::vector<Triplet> t;
  append_shifted(t, W_yy.lower(), 0, 0);
  append_shifted(t, J, n_y, 0);
  return SymmetricSparse(to_compressed(2 * n_y, 2 * n_y, t)).full();
}

SparseMatrix assemble_kkt(const SymmetricSparse& A, const SparseMatrix& B, const SymmetricSparse& W_yy,
                          const SparseMatrix& J) {
  const Index n_A = A.dim(), n_y = W_yy.dim(), n = n_A + 2 * n_y;
  if (B.rows() != 2 * n_y || B.cols() != n_A) throw DimensionError("B must be n_C x n_A");
  if (J.rows() != n_y || J.cols() != n_y) throw DimensionError("J must be n_y x n_y");
  std::vector<Triplet> t;
  append_shifted(t, A.lower(), 0, 0);
  append_shifted(t, B, n_A, 0);
  append_shifted(t, W_yy.lower(), n_A, n_A);
  append_shifted(t, J, n_A + n_y, n_A);
  return SymmetricSparse(to_compressed(n, n, t)).full();
}

Index SchurFactors::factor_nnz() const { return bt_.factor_nnz() + s_factors_.factor_nnz() + B_.nonZeros(); }

void SchurFactors::perturb_schur_factors(Index i, Index j, double delta) {
  if (i < 0 || j < 0 || i >= n_A_ || j >= n_A_) throw DimensionError("perturbation index outside S");
  DenseMatrix s = S_;
  s(i, j) += delta;
  if (i != j) s(j, i) += delta;
  s_factors_ = bunch_kaufman(s, bk_);
}

SchurFactors schur_factorize(const SymmetricSparse& A, const SparseMatrix& B, const SymmetricSparse& W_yy,
                             const SparseMatrix& J, const BlockStructure& j_structure, const SchurOptions& opts) {
  const Index n_A = A.dim(), n_y = W_yy.dim();
  if (J.rows() != n_y || J.cols() != n_y) throw DimensionError("J must be square of dimension n_y");
  if (j_structure.dim() != n_y) throw DimensionError("J block structure does not match n_y");
  if (B.rows() != 2 * n_y || B.cols() != n_A) throw DimensionError("B must be n_C x n_A");
  if (opts.primal_dim < 0 || opts.primal_dim > n_A) throw ParameterError("primal_dim outside the A block");
  const Matching mt = maximum_matching(J);
  if (mt.size < n_y)
    throw StructuralError("J is structurally singular (matching size " + std::to_string(mt.size) + " of " +
                          std::to_string(n_y) + ")");

  SchurFactors f;
  f.n_A_ = n_A;
  f.n_y_ = n_y;
  f.bk_ = opts.bk;
  f.B_ = B;
  f.B_.makeCompressed();

  auto t0 = Clock::now();
  const PivotPermutation pp = structured_pivot_permutation(n_y);
  f.bt_ = bt_factorize(assemble_pivot_matrix(W_yy, J), pp.row, pp.col, pivot_block_structure(j_structure), opts.bt);
  f.counters_.factor_pivot_flops = f.bt_.factor_flops();
  f.counters_.factor_pivot_seconds = seconds_since(t0);

  t0 = Clock::now();
  std::vector<Triplet> bt;
  for (Index j = 0; j < f.B_.outerSize(); ++j) {
    SparseMatrix::InnerIterator it(f.B_, j);
    if (!it) continue;
    const auto col = static_cast<int>(f.nonzero_cols_.size());
    f.nonzero_cols_.push_back(j);
    for (; it; ++it) bt.emplace_back(static_cast<int>(it.row()), col, it.value());
  }
  const Index k = static_cast<Index>(f.nonzero_cols_.size());
  DenseMatrix S = A.dense();
  if (k > 0) {
    const SparseMatrix Bk = to_compressed(2 * n_y, k, bt);
    FlopCounter fc;
    const DenseMatrix X = bt_solve_original(f.bt_, DenseMatrix(Bk), &fc);
    const DenseMatrix G = Bk.transpose() * X;
    const auto uk = static_cast<std::uint64_t>(k);
    fc.add(2 * static_cast<std::uint64_t>(Bk.nonZeros()) * uk + uk * uk);
    for (Index b = 0; b < k; ++b)
      for (Index a = 0; a < k; ++a) S(f.nonzero_cols_[a], f.nonzero_cols_[b]) -= G(a, b);
    f.counters_.build_schur_flops = fc.flops;
  }
  const double smax = S.size() > 0 ? S.cwiseAbs().maxCoeff() : 0.0;
  const double amax = S.size() > 0 ? (S - S.transpose()).cwiseAbs().maxCoeff() : 0.0;
  f.asymmetry_ = smax > 0.0 ? amax / smax : 0.0;
  f.S_ = (S + S.transpose()) / 2.0;
  if (opts.primal_dim > 0) f.S_.diagonal().head(opts.primal_dim).array() += opts.primal_shift;
  f.counters_.build_schur_seconds = seconds_since(t0);

  t0 = Clock::now();
  f.s_factors_ = bunch_kaufman(f.S_, opts.bk);
  f.counters_.factor_schur_flops = f.s_factors_.flops();
  f.counters_.factor_schur_seconds = seconds_since(t0);
  return f;
}

Vector schur_solve(const SchurFactors& f, const Vector& r, FlopCounter* flops) {
  if (r.size() != f.dim()) throw DimensionError("rhs length does not match KKT dimension");
  const Index n_A = f.n_A(), n_C = f.n_C();
  const Vector r_A = r.head(n_A), r_C = r.tail(n_C);
  const auto bnnz = static_cast<std::uint64_t>(f.B().nonZeros());

  const Vector t = bt_solve_original(f.bt(), r_C, flops);
  const Vector r_S = r_A - f.B().transpose() * t;
  count_flops(flops, 2 * bnnz);
  const Vector x_A = f.s_factors().solve(r_S, flops);
  const Vector r_bar = r_C - f.B() * x_A;
  count_flops(flops, 2 * bnnz);
  Vector x(f.dim());
  x.head(n_A) = x_A;
  x.tail(n_C) = bt_solve_original(f.bt(), r_bar, flops);
  return x;
}

Inertia schur_inertia(const SchurFactors& f) { return Inertia{f.n_y(), f.n_y(), 0} + f.s_factors().inertia(); }

bool check_inertia_target(const Inertia& i, Index n, Index m) { return i == Inertia{n, m, 0}; }

SolveReport solve_refined(const SchurFactors& f, const SparseMatrix& M_full, const Vector& r, RefinementOptions opts) {
  SolveReport rep = refine([&](const Vector& rhs, FlopCounter* fc) { return schur_solve(f, rhs, fc); }, M_full, r, opts);
  rep.inertia = schur_inertia(f);
  return rep;
}

}  // namespace kktbt
