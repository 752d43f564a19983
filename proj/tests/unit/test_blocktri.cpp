#include <doctest.h>

#include "kktbt/block_triangular.hpp"
#include "kktbt/generator.hpp"
#include "kktbt/network.hpp"
#include "kktbt/schur.hpp"
#include "../support/oracles.hpp"
#include "../support/random_matrices.hpp"

using namespace kktbt;
using testing_support::random_dense;
using testing_support::random_permutation;

namespace {

SparseMatrix from_dense(const DenseMatrix& d) { return d.sparseView(); }

BlockStructure random_blocks(Index n, Index max_size, Rng& rng) {
  std::vector<Index> b{0};
  while (b.back() < n)
    b.push_back(std::min(n, b.back() + 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_size)))));
  return BlockStructure(b);
}

// Block lower triangular T with well-conditioned dense diagonal blocks and
// off-diagonal blocks of mixed density. Some diagonal blocks are identities.
DenseMatrix random_block_lower(const BlockStructure& s, Rng& rng) {
  DenseMatrix t = DenseMatrix::Zero(s.dim(), s.dim());
  for (Index bi = 0; bi < s.num_blocks(); ++bi) {
    const Index r0 = s.begin(bi), rs = s.size(bi);
    if (rng.bernoulli(0.2)) {
      t.block(r0, r0, rs, rs).setIdentity();
    } else {
      t.block(r0, r0, rs, rs) = random_dense(rs, rs, rng) + static_cast<double>(rs + 1) * DenseMatrix::Identity(rs, rs);
    }
    for (Index bj = 0; bj < bi; ++bj) {
      const double density = rng.bernoulli(0.3) ? 0.8 : 0.1;
      for (Index i = r0; i < r0 + rs; ++i)
        for (Index j = s.begin(bj); j < s.end(bj); ++j)
          if (rng.bernoulli(density)) t(i, j) = rng.uniform(-1.0, 1.0);
    }
  }
  return t;
}

Index off_block_nnz(const DenseMatrix& t, const BlockStructure& s) {
  Index nnz = 0;
  for (Index i = 0; i < t.rows(); ++i)
    for (Index j = 0; j < t.cols(); ++j)
      if (t(i, j) != 0.0 && s.block_of(i) != s.block_of(j)) ++nnz;
  return nnz;
}

NeuralNetSpec small_net(std::vector<Index> widths, std::uint64_t seed) {
  return make_random_network(widths, Activation::Tanh, Activation::Linear, seed);
}

}  // namespace

TEST_CASE("forward substitution on [[1,0],[2,1]]") {
  DenseMatrix m(2, 2);
  m << 1, 0, 2, 1;
  const BTFactors f = bt_factorize(from_dense(m), Permutation::identity(2), Permutation::identity(2),
                                   BlockStructure::singletons(2));
  CHECK(f.identity_block_count() == 2);
  CHECK(f.factor_flops() == 0);
  DenseMatrix rhs(2, 1);
  rhs << 3, 7;
  const DenseMatrix x = bt_solve(f, rhs);
  CHECK(x(0, 0) == 3.0);
  CHECK(x(1, 0) == 1.0);
}

TEST_CASE("lower bidiagonal with 1x1 blocks keeps the diagonal entries as factors") {
  DenseMatrix m = DenseMatrix::Zero(4, 4);
  for (Index i = 0; i < 4; ++i) m(i, i) = 2.0 + static_cast<double>(i);
  for (Index i = 1; i < 4; ++i) m(i, i - 1) = -1.0;
  const BTFactors f = bt_factorize(from_dense(m), Permutation::identity(4), Permutation::identity(4),
                                   BlockStructure::singletons(4));
  for (Index b = 0; b < 4; ++b) {
    const auto& d = f.diagonal_blocks()[static_cast<std::size_t>(b)];
    CHECK_FALSE(d.identity);
    CHECK(d.lu.packed()(0, 0) == m(b, b));
  }
  CHECK(f.reconstruct() == m);
}

TEST_CASE("two-layer identity block system") {
  DenseMatrix m = DenseMatrix::Identity(4, 4);
  m.block(2, 0, 2, 2).setOnes();
  const BTFactors f = bt_factorize(from_dense(m), Permutation::identity(4), Permutation::identity(4),
                                   BlockStructure({0, 2, 4}));
  CHECK(f.identity_block_count() == 2);
  CHECK(f.off_diagonal_blocks(1).front().storage == BlockStorage::Dense);
  DenseMatrix rhs(4, 1);
  rhs << 1, 1, 0, 0;
  const DenseMatrix x = bt_solve(f, rhs);
  DenseMatrix expected(4, 1);
  expected << 1, 1, -2, -2;
  CHECK(x == expected);
}

TEST_CASE("near-identity diagonal blocks are factorized") {
  DenseMatrix m = DenseMatrix::Identity(2, 2);
  m(1, 1) = 1.0 + 1e-15;
  const BTFactors f =
      bt_factorize(from_dense(m), Permutation::identity(2), Permutation::identity(2), BlockStructure({0, 2}));
  CHECK(f.identity_block_count() == 0);
}

TEST_CASE("original-coordinate solves of C = [[4,1],[1,0]]") {
  const SymmetricSparse wyy(to_compressed(1, 1, std::vector<Triplet>{{0, 0, 4.0}}));
  const SparseMatrix J = to_compressed(1, 1, std::vector<Triplet>{{0, 0, 1.0}});
  const SparseMatrix C = assemble_pivot_matrix(wyy, J);
  CHECK(DenseMatrix(C) == (DenseMatrix(2, 2) << 4, 1, 1, 0).finished());
  const auto pp = structured_pivot_permutation(1);
  const BTFactors f = bt_factorize(C, pp.row, pp.col, pivot_block_structure(BlockStructure::singletons(1)));
  CHECK(f.identity_block_count() == 2);
  const DenseMatrix x1 = bt_solve_original(f, (DenseMatrix(2, 1) << 1, 0).finished());
  CHECK(x1(0, 0) == 0.0);
  CHECK(x1(1, 0) == 1.0);
  const DenseMatrix x2 = bt_solve_original(f, (DenseMatrix(2, 1) << 0, 1).finished());
  CHECK(x2(0, 0) == 1.0);
  CHECK(x2(1, 0) == -4.0);
}

TEST_CASE("NN pivot matrix: identity fast path and dense oracle") {
  const NeuralNetSpec net = small_net({6, 6, 6, 6, 6}, 4);
  KktShape shape;
  shape.num_x = 8;
  shape.num_cons = 3;
  const KKTSystem k = generate_kkt(net, shape, 4);
  const SparseMatrix C = k.pivot_matrix();
  const auto pp = structured_pivot_permutation(k.n_y);
  const BTFactors f = bt_factorize(C, pp.row, pp.col, pivot_block_structure(k.j_structure));
  CHECK(f.identity_block_count() == f.structure().num_blocks());
  CHECK(f.factor_flops() == 0);
  Rng rng(9);
  const DenseMatrix rhs = random_dense(C.rows(), 5, rng);
  CHECK(oracle::rel_diff(bt_solve_original(f, rhs), oracle::gauss_solve(DenseMatrix(C), rhs)) <= 1e-10);
}

TEST_CASE("random NN-structured C of dimension 40") {
  // Widths summing to n_y = 20 over z and y blocks.
  const NeuralNetSpec net = small_net({5, 4, 3, 3}, 12);
  REQUIRE(2 * net.n_y() == 40);
  KktShape shape;
  shape.num_x = 6;
  shape.num_cons = 2;
  shape.pivot_hessian_per_row = 3.0;
  const KKTSystem k = generate_kkt(net, shape, 12);
  const SparseMatrix C = k.pivot_matrix();
  const auto pp = structured_pivot_permutation(k.n_y);
  const BTFactors f = bt_factorize(C, pp.row, pp.col, pivot_block_structure(k.j_structure));
  Rng rng(3);
  const DenseMatrix rhs = random_dense(40, 1, rng);
  CHECK(oracle::rel_diff(bt_solve_original(f, rhs), oracle::gauss_solve(DenseMatrix(C), rhs)) <= 1e-10);
}

TEST_CASE("reconstruction of three dense 4x4 diagonal blocks") {
  Rng rng(21);
  const BlockStructure s({0, 4, 8, 12});
  const DenseMatrix t = random_block_lower(s, rng);
  const BTFactors f = bt_factorize(from_dense(t), Permutation::identity(12), Permutation::identity(12), s);
  CHECK(oracle::rel_diff(f.reconstruct(), t) <= 1e-12);
}

TEST_CASE("random structured instances against dense LU") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Rng rng(seed);
    const Index n = 1 + static_cast<Index>(rng.below(seed % 10 == 0 ? 300 : 80));
    const BlockStructure s = random_blocks(n, 1 + static_cast<Index>(rng.below(8)), rng);
    const DenseMatrix t = random_block_lower(s, rng);
    const Permutation pr = random_permutation(n, rng), pc = random_permutation(n, rng);
    const SparseMatrix m = permute(from_dense(t), pr.inverse(), pc.inverse());
    const BTFactors f = bt_factorize(m, pr, pc, s);
    const Index q = 1 + static_cast<Index>(rng.below(40));
    const DenseMatrix rhs = random_dense(n, q, rng);

    CHECK_MESSAGE(oracle::rel_diff(bt_solve(f, rhs), oracle::gauss_solve(t, rhs)) <= 1e-10, "seed ", seed);
    CHECK_MESSAGE(oracle::rel_diff(bt_solve_original(f, rhs), oracle::gauss_solve(DenseMatrix(m), rhs)) <= 1e-10,
                  "seed ", seed);
    CHECK(f.off_diagonal_nnz() == off_block_nnz(t, s));
    CHECK(oracle::rel_diff(f.reconstruct(), t) <= 1e-12);
  }
}

TEST_CASE("solve FLOP count is exact") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    const Index n = 2 + static_cast<Index>(rng.below(40));
    const BlockStructure s = random_blocks(n, 5, rng);
    const DenseMatrix t = random_block_lower(s, rng);
    const BTFactors f = bt_factorize(from_dense(t), Permutation::identity(n), Permutation::identity(n), s);
    const auto q = static_cast<std::uint64_t>(1 + rng.below(70));
    std::uint64_t expected = 0;
    for (Index bi = 0; bi < s.num_blocks(); ++bi) {
      const auto rs = static_cast<std::uint64_t>(s.size(bi));
      const DenseMatrix d = t.block(s.begin(bi), s.begin(bi), s.size(bi), s.size(bi));
      if (d != DenseMatrix::Identity(s.size(bi), s.size(bi))) expected += (2 * rs * rs - rs) * q;
      for (Index bj = 0; bj < bi; ++bj) {
        const DenseMatrix o = t.block(s.begin(bi), s.begin(bj), s.size(bi), s.size(bj));
        const auto nnz = static_cast<std::uint64_t>((o.array() != 0.0).count());
        if (nnz == 0) continue;
        const auto area = static_cast<std::uint64_t>(o.size());
        const bool diagonal_pattern = o.rows() == o.cols() && DenseMatrix(o.diagonal().asDiagonal()) == o;
        // Diagonal storage multiplies every stored diagonal value.
        if (diagonal_pattern)
          expected += 2 * q * static_cast<std::uint64_t>(o.rows());
        else
          expected += 2 * q * (2 * nnz >= area ? area : nnz);
      }
    }
    FlopCounter c;
    bt_solve(f, random_dense(n, static_cast<Index>(q), rng), &c);
    CHECK(c.flops == expected);
  }
}

TEST_CASE("J solve FLOPs follow the network widths") {
  const NeuralNetSpec net = small_net({3, 5, 4, 2}, 8);
  const NnJacobian jac = nn_jacobian(net, Vector::Constant(3, 0.1));
  const BTFactors f = bt_factorize(jac.J, Permutation::identity(net.n_y()), Permutation::identity(net.n_y()),
                                   jac.structure);
  const std::uint64_t q = 3;
  std::uint64_t expected = 0;
  for (std::size_t l = 1; l < net.widths.size(); ++l) {
    expected += 2 * static_cast<std::uint64_t>(net.widths[l]) * q;
    if (l >= 2) expected += 2 * static_cast<std::uint64_t>(net.widths[l] * net.widths[l - 1]) * q;
  }
  FlopCounter c;
  Rng rng(1);
  bt_solve(f, random_dense(net.n_y(), 3, rng), &c);
  CHECK(c.flops == expected);
  CHECK(f.identity_block_count() == 2 * net.layers());
}

TEST_CASE("solving with J reproduces the linearized forward pass") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const NeuralNetSpec net =
        make_random_network({4, 6, 5, 3}, seed % 2 ? Activation::Sigmoid : Activation::Tanh, Activation::Linear, seed);
    const Vector x = random_dense(4, 1, rng);
    const Vector dx = random_dense(4, 1, rng);
    const NnJacobian jac = nn_jacobian(net, x);
    const BTFactors f =
        bt_factorize(jac.J, Permutation::identity(net.n_y()), Permutation::identity(net.n_y()), jac.structure);
    Vector rhs = Vector::Zero(net.n_y());
    rhs.head(net.widths[1]) = net.weights[0] * dx;
    const Vector dv = bt_solve(f, rhs);

    const auto layers = forward_pass(net, x);
    Vector dy = dx;
    for (Index l = 1; l <= net.layers(); ++l) {
      const auto li = static_cast<std::size_t>(l - 1);
      const Vector dz = net.weights[li] * dy;
      dy = dz;
      for (Index i = 0; i < dz.size(); ++i) dy(i) = activate_d1(net.activations[li], layers[li].z(i)) * dz(i);
      CHECK(oracle::rel_diff(dv.segment(net.z_offset(l), dz.size()), dz) <= 1e-12);
      CHECK(oracle::rel_diff(dv.segment(net.y_offset(l), dy.size()), dy) <= 1e-12);
    }
  }
}

TEST_CASE("errors") {
  DenseMatrix upper = DenseMatrix::Identity(2, 2);
  upper(0, 1) = 1.0;
  CHECK_THROWS_AS(bt_factorize(from_dense(upper), Permutation::identity(2), Permutation::identity(2),
                               BlockStructure::singletons(2)),
                  StructuralError);

  DenseMatrix singular = DenseMatrix::Identity(4, 4);
  singular.block(2, 2, 2, 2).setOnes();
  try {
    bt_factorize(from_dense(singular), Permutation::identity(4), Permutation::identity(4), BlockStructure({0, 2, 4}));
    FAIL("expected a singular block");
  } catch (const SingularBlockError& e) {
    CHECK(e.block() == 1);
  }

  const BTFactors f =
      bt_factorize(from_dense(DenseMatrix::Identity(3, 3)), Permutation::identity(3), Permutation::identity(3),
                   BlockStructure::singletons(3));
  CHECK_THROWS_AS(bt_solve(f, DenseMatrix::Zero(2, 1)), DimensionError);
  CHECK_THROWS_AS(bt_solve_original(f, DenseMatrix::Zero(4, 1)), DimensionError);
}

TEST_CASE("panel width does not change results") {
  Rng rng(77);
  const BlockStructure s = random_blocks(30, 4, rng);
  const DenseMatrix t = random_block_lower(s, rng);
  const DenseMatrix rhs = random_dense(30, 70, rng);
  BtOptions narrow;
  narrow.panel_width = 3;
  const BTFactors a = bt_factorize(from_dense(t), Permutation::identity(30), Permutation::identity(30), s);
  const BTFactors b = bt_factorize(from_dense(t), Permutation::identity(30), Permutation::identity(30), s, narrow);
  CHECK(oracle::rel_diff(bt_solve(a, rhs), bt_solve(b, rhs)) <= 1e-14);
}
