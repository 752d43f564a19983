#include "kktbt/symbolic_fill.hpp"

#include <algorithm>
#include <set>

#include "kktbt/random.hpp"

namespace kktbt {
namespace {

std::vector<Index> neighbours(const SparseMatrix& full, Index col, Index skip0, Index skip1) {
  std::vector<Index> out;
  for (SparseMatrix::InnerIterator it(full, col); it; ++it)
    if (it.row() != skip0 && it.row() != skip1) out.push_back(it.row());
  return out;
}

bool present(const SparseMatrix& full, Index i, Index j) { return full.coeff(i, j) != 0.0; }

void check_index(const SymmetricSparse& pattern, Index i) {
  if (i < 0 || i >= pattern.dim()) throw DimensionError("pivot index " + std::to_string(i) + " out of range");
}

FillReport finish(const SymmetricSparse& pattern, const SparseMatrix& full,
                  const std::set<std::pair<Index, Index>>& candidates, const BlockPredicate& inside) {
  FillReport r;
  r.input_nnz = pattern.nnz();
  // Candidates are (col, row) so the set iterates column-major.
  for (const auto& [j, i] : candidates) {
    if (present(full, i, j)) continue;
    r.fill.emplace_back(i, j);
    if (inside && inside(i, j))
      ++r.inside_blocks;
    else
      ++r.outside_blocks;
  }
  return r;
}

void add_product(std::set<std::pair<Index, Index>>& out, const std::vector<Index>& a, const std::vector<Index>& b) {
  for (const Index i : a)
    for (const Index j : b) out.emplace(std::min(i, j), std::max(i, j));
}

}  // namespace

FillReport symbolic_fill_1x1(const SymmetricSparse& pattern, Index pivot, const BlockPredicate& inside) {
  check_index(pattern, pivot);
  const SparseMatrix full = pattern.full();
  if (!present(full, pivot, pivot))
    throw StructuralError("1x1 pivot " + std::to_string(pivot) + " has a structurally zero diagonal");
  const auto nb = neighbours(full, pivot, pivot, pivot);
  std::set<std::pair<Index, Index>> cand;
  add_product(cand, nb, nb);
  return finish(pattern, full, cand, inside);
}

FillReport symbolic_fill_2x2(const SymmetricSparse& pattern, Index p, Index q, const BlockPredicate& inside) {
  check_index(pattern, p);
  check_index(pattern, q);
  if (p == q) throw StructuralError("2x2 pivot needs two distinct indices");
  const SparseMatrix full = pattern.full();
  if (!present(full, p, q))
    throw StructuralError("2x2 pivot (" + std::to_string(p) + ", " + std::to_string(q) +
                          ") has a structurally zero coupling");
  const auto np = neighbours(full, p, p, q);
  const auto nq = neighbours(full, q, p, q);
  // The pivot inverse is [a_qq -e; -e a_pp] / det, so the p-p (q-q) product
  // only appears when a_qq (a_pp) is structurally nonzero.
  std::set<std::pair<Index, Index>> cand;
  add_product(cand, np, nq);
  if (present(full, q, q)) add_product(cand, np, np);
  if (present(full, p, p)) add_product(cand, nq, nq);
  return finish(pattern, full, cand, inside);
}

namespace {

constexpr int kD1 = 0, kE1 = 1, kD2 = 2, kE2 = 3, kD3 = 4, kE3 = 5;

bool is_d(int g) { return g % 2 == 0; }
int level(int g) { return g / 2 + 1; }

std::vector<int> fixture_groups(Index b) {
  std::vector<int> g;
  auto push = [&](int id, Index count) { g.insert(g.end(), static_cast<std::size_t>(count), id); };
  push(kD1, 1);
  push(kE1, 1);
  push(kD2, b - 1);
  push(kE2, b - 1);
  push(kD3, b);
  push(kE3, b);
  return g;
}

// Whether the block between groups ga and gb is structurally present.
bool block_present(int ga, int gb) {
  if (is_d(ga) && is_d(gb)) return true;
  if (!is_d(ga) && !is_d(gb)) return false;
  const int e = is_d(ga) ? gb : ga;
  const int d = is_d(ga) ? ga : gb;
  // E is block upper triangular in its two diagonal blocks {1,2} and {3}.
  return !(level(e) == 3 && level(d) < 3);
}

PartitionedFixture build_fixture(Index b, double density, std::uint64_t seed, bool dense) {
  if (b < 2) throw ParameterError("partitioned fixture needs block size >= 2");
  PartitionedFixture f;
  f.block = b;
  f.group = fixture_groups(b);
  const Index n = static_cast<Index>(f.group.size());
  // First index of every group, to pair e_t with d_t on E's diagonal.
  std::vector<Index> first(6, -1);
  for (Index i = n - 1; i >= 0; --i) first[static_cast<std::size_t>(f.group[static_cast<std::size_t>(i)])] = i;

  Rng rng(seed);
  std::vector<Triplet> t;
  for (Index j = 0; j < n; ++j) {
    const int gj = f.group[static_cast<std::size_t>(j)];
    for (Index i = j; i < n; ++i) {
      const int gi = f.group[static_cast<std::size_t>(i)];
      if (!block_present(gi, gj)) continue;
      bool keep = dense || rng.bernoulli(density);
      if (i == j && is_d(gi)) keep = true;
      // Keep the diagonal of E's diagonal blocks (e_t, d_t) aligned by offset.
      if (!keep && is_d(gi) != is_d(gj) && level(gi) == level(gj)) {
        const Index ie = is_d(gi) ? j : i, id = is_d(gi) ? i : j;
        const int ge = f.group[static_cast<std::size_t>(ie)], gd = f.group[static_cast<std::size_t>(id)];
        keep = ie - first[static_cast<std::size_t>(ge)] == id - first[static_cast<std::size_t>(gd)];
      }
      if (keep) t.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0 + rng.unit());
    }
  }
  f.pattern = SymmetricSparse(to_compressed(n, n, t));
  return f;
}

}  // namespace

std::string PartitionedFixture::block_name(Index i, Index j) const {
  int gi = group[static_cast<std::size_t>(i)], gj = group[static_cast<std::size_t>(j)];
  if (is_d(gi) && is_d(gj)) {
    const int a = std::max(level(gi), level(gj)), c = std::min(level(gi), level(gj));
    return "D" + std::to_string(a) + std::to_string(c);
  }
  if (!is_d(gi) && !is_d(gj)) {
    const int a = std::max(level(gi), level(gj)), c = std::min(level(gi), level(gj));
    return "Z" + std::to_string(a) + std::to_string(c);
  }
  if (is_d(gi)) std::swap(gi, gj);
  return "E" + std::to_string(level(gi)) + std::to_string(level(gj));
}

bool PartitionedFixture::in_e_diagonal_block(Index i, Index j) const {
  int gi = group[static_cast<std::size_t>(i)], gj = group[static_cast<std::size_t>(j)];
  if (is_d(gi) == is_d(gj)) return false;
  if (is_d(gi)) std::swap(gi, gj);
  const auto diag_block = [](int g) { return level(g) == 3 ? 1 : 0; };
  return diag_block(gi) == diag_block(gj);
}

bool PartitionedFixture::in_1x1_allowed(Index i, Index j) const {
  return group[static_cast<std::size_t>(i)] != kE3 && group[static_cast<std::size_t>(j)] != kE3;
}

bool PartitionedFixture::in_2x2_allowed(Index i, Index j) const {
  const std::string name = block_name(i, j);
  return name == "D22" || name == "E22" || name == "D32" || name == "E23" || name == "D33";
}

PartitionedFixture partitioned_fixture_dense(Index block) { return build_fixture(block, 1.0, 0, true); }

PartitionedFixture partitioned_fixture_random(Index block, double density, std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) throw ParameterError("fixture density must lie in (0, 1]");
  return build_fixture(block, density, seed, false);
}

}  // namespace kktbt
