#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "kktbt/network.hpp"
#include "kktbt/structure.hpp"
#include "kktbt/symbolic_fill.hpp"
#include "../support/oracles.hpp"
#include "../support/random_matrices.hpp"

using namespace kktbt;
using testing_support::random_permutation;

namespace {

SparseMatrix pattern(Index rows, Index cols, const std::vector<std::pair<Index, Index>>& entries) {
  std::vector<Triplet> t;
  for (const auto& [i, j] : entries) t.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
  return to_compressed(rows, cols, t);
}

SparseMatrix identity_pattern(Index n) {
  SparseMatrix m(n, n);
  m.setIdentity();
  return m;
}

// Unit-diagonal block lower triangular matrix with random strictly lower
// entries inside and below the diagonal blocks.
SparseMatrix random_block_lower(const BlockStructure& s, double density, Rng& rng) {
  std::vector<Triplet> t;
  for (Index j = 0; j < s.dim(); ++j) {
    t.emplace_back(static_cast<int>(j), static_cast<int>(j), 1.0);
    for (Index i = j + 1; i < s.dim(); ++i)
      if (rng.bernoulli(density)) t.emplace_back(static_cast<int>(i), static_cast<int>(j), rng.uniform(-1.0, 1.0));
  }
  return to_compressed(s.dim(), s.dim(), t);
}

BlockStructure random_blocks(Index n, Rng& rng) {
  std::vector<Index> b{0};
  while (b.back() < n) b.push_back(std::min(n, b.back() + 1 + static_cast<Index>(rng.below(3))));
  return BlockStructure(b);
}

SparseMatrix assemble_c(const SparseMatrix& J) {
  const Index n = J.rows();
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), 2.0);
  for (const auto& e : to_triplets(J)) {
    t.emplace_back(static_cast<int>(n + e.row()), e.col(), e.value());
    t.emplace_back(e.col(), static_cast<int>(n + e.row()), e.value());
  }
  return to_compressed(2 * n, 2 * n, t);
}

// Independent check: nothing strictly above the block diagonal.
bool upper_blocks_empty(const SparseMatrix& m, const BlockStructure& s) {
  std::vector<Index> block(static_cast<std::size_t>(s.dim()));
  for (Index b = 0; b < s.num_blocks(); ++b)
    for (Index i = s.begin(b); i < s.end(b); ++i) block[static_cast<std::size_t>(i)] = b;
  for (Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      if (block[static_cast<std::size_t>(it.row())] < block[static_cast<std::size_t>(j)]) return false;
  return true;
}

SparseMatrix saddle_of(const SparseMatrix& B) {
  const Index r = B.rows(), c = B.cols();
  std::vector<Triplet> t;
  for (Index i = 0; i < r + c; ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
  for (const auto& e : to_triplets(B)) {
    t.emplace_back(static_cast<int>(c + e.row()), e.col(), 1.0);
    t.emplace_back(e.col(), static_cast<int>(c + e.row()), 1.0);
  }
  return to_compressed(r + c, r + c, t);
}

std::set<std::pair<Index, Index>> as_set(const FillReport& r) { return {r.fill.begin(), r.fill.end()}; }

}  // namespace

// ------------------------------------------------- structured permutation

TEST_CASE("structured pivot permutation for n_y = 2 and n_y = 1") {
  const auto p2 = structured_pivot_permutation(2);
  CHECK(p2.col.forward() == std::vector<Index>{0, 1, 3, 2});
  CHECK(p2.row.forward() == std::vector<Index>{2, 3, 1, 0});
  const auto p1 = structured_pivot_permutation(1);
  CHECK(p1.col.forward() == std::vector<Index>{0, 1});
  CHECK(p1.row.forward() == std::vector<Index>{1, 0});
  CHECK(structured_pivot_permutation(0).row.size() == 0);
}

TEST_CASE("structured permutation of C with a lower triangular J") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const BlockStructure s = BlockStructure::singletons(5);
    const SparseMatrix J = random_block_lower(s, 0.5, rng);
    const auto p = structured_pivot_permutation(5);
    const SparseMatrix pc = permute(assemble_c(J), p.row, p.col);
    for (Index j = 0; j < pc.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(pc, j); it; ++it) CHECK(it.row() >= j);
  }
}

TEST_CASE("pivot block structure is J's blocks then the reversed transpose blocks") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    const Index n = 1 + static_cast<Index>(rng.below(12));
    const BlockStructure s = random_blocks(n, rng);
    const SparseMatrix J = random_block_lower(s, 0.4, rng);
    const BlockStructure ps = pivot_block_structure(s);
    std::vector<Index> expected = s.sizes();
    const auto sizes = s.sizes();
    expected.insert(expected.end(), sizes.rbegin(), sizes.rend());
    CHECK(ps.sizes() == expected);

    const auto p = structured_pivot_permutation(n);
    const SparseMatrix pc = permute(assemble_c(J), p.row, p.col);
    CHECK(upper_blocks_empty(pc, ps));
    CHECK(is_block_lower_triangular(pc, ps));
    // Leading diagonal blocks are J's; trailing ones are the mirrored J^T.
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        CHECK((pc.coeff(i, j) != 0) == (J.coeff(i, j) != 0));
        CHECK((pc.coeff(n + i, n + j) != 0) == (J.coeff(n - 1 - j, n - 1 - i) != 0));
      }
  }
}

TEST_CASE("block structure validation") {
  CHECK_THROWS_AS(BlockStructure({1, 2}), DimensionError);
  CHECK_THROWS_AS(BlockStructure({0, 2, 2}), DimensionError);
  const BlockStructure s({0, 2, 5});
  CHECK(s.block_of(4) == 1);
  CHECK(s.size(1) == 3);
  CHECK_THROWS_AS(s.block_of(5), DimensionError);
}

// --------------------------------------------------------------- matching

TEST_CASE("maximum matching small cases") {
  const Matching id = maximum_matching(identity_pattern(4));
  CHECK(id.size == 4);
  for (Index j = 0; j < 4; ++j) CHECK(id.row_of_col[static_cast<std::size_t>(j)] == j);
  const Matching full = maximum_matching(pattern(2, 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  CHECK(full.size == 2);
}

TEST_CASE("maximum matching equals exhaustive search") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    Rng rng(seed);
    const Index n = 1 + static_cast<Index>(rng.below(7));
    std::vector<std::pair<Index, Index>> e;
    if (seed % 2) {
      // Planted perfect matching plus noise.
      const Permutation p = random_permutation(n, rng);
      for (Index i = 0; i < n; ++i) e.push_back({i, p[i]});
    }
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (rng.bernoulli(0.2)) e.push_back({i, j});
    const SparseMatrix m = pattern(n, n, e);
    const Matching mt = maximum_matching(m);
    CHECK(mt.size == oracle::brute_force_matching(m));
    if (seed % 2) CHECK(mt.size == n);
    Index count = 0;
    for (Index j = 0; j < n; ++j) {
      const Index r = mt.row_of_col[static_cast<std::size_t>(j)];
      if (r < 0) continue;
      ++count;
      CHECK(m.coeff(r, j) != 0.0);
      CHECK(mt.col_of_row[static_cast<std::size_t>(r)] == j);
    }
    CHECK(count == mt.size);
  }
}

// -------------------------------------------------------------------- BTF

TEST_CASE("find_btf trivial shapes") {
  SparseMatrix dense(5, 5);
  std::vector<std::pair<Index, Index>> all;
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) all.push_back({i, j});
  const BtfResult d = find_btf(pattern(5, 5, all));
  CHECK(d.structure.num_blocks() == 1);
  CHECK(d.structure.size(0) == 5);

  const BtfResult diag = find_btf(identity_pattern(6));
  CHECK(diag.structure.num_blocks() == 6);
  CHECK(diag.col == Permutation::identity(6));
}

TEST_CASE("find_btf rejects structurally singular input") {
  CHECK_THROWS_AS(find_btf(pattern(3, 3, {{0, 0}, {1, 0}, {2, 0}, {2, 2}})), StructuralError);
}

TEST_CASE("find_btf blocks are the SCCs of the matched matrix") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    Rng rng(seed);
    const Index n = 2 + static_cast<Index>(rng.below(14));
    const Permutation p = random_permutation(n, rng);
    std::vector<std::pair<Index, Index>> e;
    for (Index i = 0; i < n; ++i) e.push_back({i, p[i]});
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (rng.bernoulli(1.5 / static_cast<double>(n))) e.push_back({i, j});
    const SparseMatrix m = pattern(n, n, e);
    const BtfResult r = find_btf(m);
    const SparseMatrix pm = permute(m, r.row, r.col);
    for (Index i = 0; i < n; ++i) CHECK(pm.coeff(i, i) != 0.0);
    CHECK(upper_blocks_empty(pm, r.structure));

    auto classes = oracle::scc_by_closure(pm);
    std::vector<std::vector<Index>> blocks;
    for (Index b = 0; b < r.structure.num_blocks(); ++b) {
      std::vector<Index> members;
      for (Index i = r.structure.begin(b); i < r.structure.end(b); ++i) members.push_back(i);
      blocks.push_back(members);
      CHECK(is_irreducible(extract(pm, r.structure.begin(b), r.structure.end(b), r.structure.begin(b),
                                   r.structure.end(b))));
    }
    std::sort(classes.begin(), classes.end());
    std::sort(blocks.begin(), blocks.end());
    CHECK(blocks == classes);
  }
}

TEST_CASE("find_btf on an NN Jacobian pattern") {
  const NeuralNetSpec net = make_random_network({4, 5, 5, 3}, Activation::Tanh, Activation::Linear, 3);
  const NnJacobian jac = nn_jacobian(net, Vector::Constant(4, 0.3));
  const BtfResult r = find_btf(jac.J);
  const auto classes = oracle::scc_by_closure(permute(jac.J, r.row, r.col));
  CHECK(r.structure.num_blocks() == static_cast<Index>(classes.size()));
  CHECK(r.structure.num_blocks() == net.n_y());
  CHECK(upper_blocks_empty(permute(jac.J, r.row, r.col), r.structure));
}

TEST_CASE("find_btf ties prefer the lowest original index") {
  // Two independent 2-cycles {0,1} and {2,3}: the block holding column 0 first.
  const SparseMatrix m = pattern(4, 4, {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {0, 1}, {1, 0}, {2, 3}, {3, 2}});
  const BtfResult r = find_btf(m);
  CHECK(r.structure.sizes() == std::vector<Index>{2, 2});
  CHECK(std::min(r.col[0], r.col[1]) == 0);
}

// ----------------------------------------- connectivity and irreducibility

TEST_CASE("bipartite connectivity examples") {
  CHECK_FALSE(bipartite_connected(pattern(2, 2, {{0, 0}, {1, 1}})));
  CHECK(bipartite_component_count(pattern(2, 2, {{0, 0}, {1, 1}})) == 2);
  CHECK(bipartite_connected(pattern(2, 2, {{0, 0}, {1, 0}, {1, 1}})));
  std::vector<std::pair<Index, Index>> all;
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 4; ++j) all.push_back({i, j});
  CHECK(bipartite_connected(pattern(3, 4, all)));
  // An empty column is its own component.
  CHECK_FALSE(bipartite_connected(pattern(2, 2, {{0, 0}, {1, 0}})));
}

TEST_CASE("irreducibility examples") {
  CHECK(is_irreducible(pattern(2, 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}})));
  CHECK_FALSE(is_irreducible(pattern(3, 3, {{1, 0}, {2, 1}})));
  CHECK(is_irreducible(identity_pattern(1)));
}

TEST_CASE("connected B makes [[I, B^T], [B, I]] irreducible") {
  int tested = 0;
  for (std::uint64_t seed = 1; tested < 20; ++seed) {
    Rng rng(seed);
    const Index r = 1 + static_cast<Index>(rng.below(4)), c = 1 + static_cast<Index>(rng.below(4));
    std::vector<std::pair<Index, Index>> e;
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j)
        if (rng.bernoulli(0.5)) e.push_back({i, j});
    const SparseMatrix B = pattern(r, c, e);
    if (!bipartite_connected(B)) continue;
    ++tested;
    CHECK(is_irreducible(saddle_of(B)));
    CHECK(oracle::scc_by_closure(saddle_of(B)).size() == 1);
  }
}

// ---------------------------------------------------------- symbolic fill

TEST_CASE("1x1 fill basics") {
  const SymmetricSparse diag(identity_pattern(5));
  CHECK(symbolic_fill_1x1(diag, 2).fill.empty());

  // Arrowhead with the dense row first: pivoting on it fills the rest.
  std::vector<std::pair<Index, Index>> e{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {1, 0}, {2, 0}, {3, 0}};
  const SymmetricSparse arrow(pattern(4, 4, e));
  const FillReport r = symbolic_fill_1x1(arrow, 0);
  CHECK(r.fill_nnz() == 3);
  CHECK(as_set(r) == std::set<std::pair<Index, Index>>{{2, 1}, {3, 1}, {3, 2}});
  CHECK(r.input_nnz == 7);

  const SymmetricSparse zero_pivot(pattern(2, 2, {{1, 0}, {1, 1}}));
  CHECK_THROWS_AS(symbolic_fill_1x1(zero_pivot, 0), StructuralError);
}

TEST_CASE("2x2 fill basics") {
  // D and E both diagonal: pivot {d1, e1} touches nothing else.
  const auto fx = partitioned_fixture_random(3, 1e-9, 1);
  const FillReport r = symbolic_fill_2x2(fx.pattern, fx.pivot(), fx.coupling());
  for (const auto& [i, j] : r.fill) CHECK(fx.in_2x2_allowed(i, j));
  const SymmetricSparse no_coupling(pattern(2, 2, {{0, 0}, {1, 1}}));
  CHECK_THROWS_AS(symbolic_fill_2x2(no_coupling, 0, 1), StructuralError);
}

TEST_CASE("fixture layout") {
  const auto fx = partitioned_fixture_dense(2);
  CHECK(fx.pattern.dim() == 8);
  CHECK(partitioned_fixture_dense(3).pattern.dim() == 12);
  CHECK(fx.block_name(0, 0) == "D11");
  CHECK(fx.block_name(1, 0) == "E11");
  CHECK(fx.block_name(6, 4) == "E33");
  CHECK(fx.block_name(4, 2) == "D32");
  CHECK(fx.block_name(3, 3) == "Z22");
  CHECK(fx.in_e_diagonal_block(1, 0));
  CHECK(fx.in_e_diagonal_block(7, 4));
  CHECK_FALSE(fx.in_e_diagonal_block(7, 0));
  CHECK_THROWS_AS(partitioned_fixture_dense(1), ParameterError);
}

TEST_CASE("1x1 pivot on d11 fills outside the last block row and column only") {
  for (const Index b : {2, 3}) {
    const auto fx = partitioned_fixture_dense(b);
    const FillReport r = symbolic_fill_1x1(fx.pattern, fx.pivot());
    CHECK(as_set(r) == oracle::generic_fill(fx.pattern.full(), {fx.pivot()}, 17));
    CHECK_FALSE(r.fill.empty());
    std::set<int> rows_touched;
    for (const auto& [i, j] : r.fill) {
      CHECK(fx.in_1x1_allowed(i, j));
      rows_touched.insert(fx.group[static_cast<std::size_t>(i)] / 2);
      rows_touched.insert(fx.group[static_cast<std::size_t>(j)] / 2);
    }
    CHECK(rows_touched == std::set<int>{0, 1});
  }
}

TEST_CASE("2x2 pivot on (d11, e11) confines fill to D22, E22, D32, E23, D33") {
  int outside_e_diagonal = 0;
  for (const Index b : {2, 3}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto fx = seed == 1 ? partitioned_fixture_dense(b) : partitioned_fixture_random(b, 0.5, seed);
      const FillReport r = symbolic_fill_2x2(fx.pattern, fx.pivot(), fx.coupling(),
                                             [&](Index i, Index j) { return fx.in_e_diagonal_block(i, j); });
      CHECK(as_set(r) == oracle::generic_fill(fx.pattern.full(), {fx.pivot(), fx.coupling()}, seed));
      for (const auto& [i, j] : r.fill) CHECK_MESSAGE(fx.in_2x2_allowed(i, j), fx.block_name(i, j));
      CHECK(r.inside_blocks + r.outside_blocks == r.fill_nnz());
      outside_e_diagonal += static_cast<int>(r.outside_blocks);

      const FillReport r1 = symbolic_fill_1x1(fx.pattern, fx.pivot());
      CHECK(as_set(r1) == oracle::generic_fill(fx.pattern.full(), {fx.pivot()}, seed + 100));
      for (const auto& [i, j] : r1.fill) CHECK(fx.in_1x1_allowed(i, j));
    }
  }
  CHECK(outside_e_diagonal > 0);
}

TEST_CASE("symbolic fill equals generic elimination on random patterns") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Rng rng(seed);
    const Index n = 2 + static_cast<Index>(rng.below(11));
    std::vector<std::pair<Index, Index>> e;
    for (Index j = 0; j < n; ++j)
      for (Index i = j; i < n; ++i)
        if (rng.bernoulli(i == j ? 0.6 : 0.3)) e.push_back({i, j});
    const SparseMatrix lower = pattern(n, n, e);
    const SymmetricSparse s(lower);
    const SparseMatrix full = s.full();
    const auto p = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    if (full.coeff(p, p) != 0.0) {
      const FillReport r = symbolic_fill_1x1(s, p);
      CHECK(as_set(r) == oracle::generic_fill(full, {p}, seed));
      for (const auto& f : r.fill) CHECK(full.coeff(f.first, f.second) == 0.0);
    }
    for (SparseMatrix::InnerIterator it(full, p); it; ++it) {
      if (it.row() == p) continue;
      const FillReport r = symbolic_fill_2x2(s, p, it.row());
      CHECK(as_set(r) == oracle::generic_fill(full, {p, it.row()}, seed));
      break;
    }
  }
}
