#include "kktbt/structure.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

namespace kktbt {

const char* to_string(BlockStorage s) noexcept {
  switch (s) {
    case BlockStorage::Diagonal:
      return "diagonal";
    case BlockStorage::Dense:
      return "dense";
    case BlockStorage::Sparse:
      return "sparse";
  }
  return "sparse";
}

std::optional<BlockStorage> block_storage_from_string(std::string_view s) noexcept {
  if (s == "diagonal") return BlockStorage::Diagonal;
  if (s == "dense") return BlockStorage::Dense;
  if (s == "sparse") return BlockStorage::Sparse;
  return std::nullopt;
}

BlockStructure::BlockStructure(std::vector<Index> boundaries) : boundaries_(std::move(boundaries)) {
  if (boundaries_.empty() || boundaries_.front() != 0)
    throw DimensionError("block boundaries must start at 0");
  for (std::size_t i = 1; i < boundaries_.size(); ++i)
    if (boundaries_[i] <= boundaries_[i - 1])
      throw DimensionError("block boundaries must be strictly increasing");
}

BlockStructure BlockStructure::singletons(Index dim) {
  std::vector<Index> b(static_cast<std::size_t>(dim) + 1);
  std::iota(b.begin(), b.end(), Index{0});
  return BlockStructure(std::move(b));
}

std::vector<Index> BlockStructure::sizes() const {
  std::vector<Index> s;
  s.reserve(static_cast<std::size_t>(num_blocks()));
  for (Index b = 0; b < num_blocks(); ++b) s.push_back(size(b));
  return s;
}

Index BlockStructure::block_of(Index i) const {
  if (i < 0 || i >= dim()) throw DimensionError("index " + std::to_string(i) + " outside block structure");
  const auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), i);
  return static_cast<Index>(it - boundaries_.begin()) - 1;
}

std::optional<BlockStorage> BlockStructure::tag(Index row_block, Index col_block) const {
  const auto it = tags_.find({row_block, col_block});
  if (it == tags_.end()) return std::nullopt;
  return it->second;
}

bool is_block_lower_triangular(const SparseMatrix& permuted, const BlockStructure& s) {
  if (permuted.rows() != s.dim() || permuted.cols() != s.dim()) return false;
  for (Index j = 0; j < permuted.outerSize(); ++j) {
    const Index bj = s.block_of(j);
    for (SparseMatrix::InnerIterator it(permuted, j); it; ++it)
      if (s.block_of(it.row()) < bj) return false;
  }
  return true;
}

PivotPermutation structured_pivot_permutation(Index n_y) {
  if (n_y < 0) throw DimensionError("negative pivot dimension");
  std::vector<Index> col(static_cast<std::size_t>(2 * n_y));
  std::vector<Index> row(static_cast<std::size_t>(2 * n_y));
  for (Index i = 0; i < n_y; ++i) {
    col[static_cast<std::size_t>(i)] = i;
    col[static_cast<std::size_t>(n_y + i)] = 2 * n_y - 1 - i;
    row[static_cast<std::size_t>(i)] = n_y + i;
    row[static_cast<std::size_t>(n_y + i)] = n_y - 1 - i;
  }
  return {Permutation(std::move(row)), Permutation(std::move(col))};
}

BlockStructure pivot_block_structure(const BlockStructure& j) {
  const Index nb = j.num_blocks();
  std::vector<Index> b(j.boundaries());
  // Second half: blocks of J in reverse order. Block nb + t mirrors J block nb-1-t.
  for (Index t = 0; t < nb; ++t) b.push_back(b.back() + j.size(nb - 1 - t));
  BlockStructure out(std::move(b));
  const auto mirror = [nb](Index blk) { return 2 * nb - 1 - blk; };
  for (const auto& [key, storage] : j.tags()) {
    const auto [bi, bj] = key;
    out.set_tag(bi, bj, storage);
    // Second half holds R J^T R, whose block (mirror(bj), mirror(bi)) is J_{bi,bj}^T
    // reversed; reversal keeps diagonal and density classifications.
    out.set_tag(mirror(bj), mirror(bi), storage);
  }
  return out;
}

Matching maximum_matching(const SparseMatrix& m) {
  const Index nr = m.rows(), nc = m.cols();
  Matching mt;
  mt.row_of_col.assign(static_cast<std::size_t>(nc), -1);
  mt.col_of_row.assign(static_cast<std::size_t>(nr), -1);
  auto& row_of_col = mt.row_of_col;
  auto& col_of_row = mt.col_of_row;
  const int* outer = m.outerIndexPtr();
  const int* inner = m.innerIndexPtr();
  auto col_begin = [&](Index c) -> Index {
    return outer[c];
  };
  auto col_end = [&](Index c) -> Index {
    return m.isCompressed() ? outer[c + 1] : outer[c] + m.innerNonZeroPtr()[c];
  };

  for (Index c = 0; c < nc; ++c)
    for (Index p = col_begin(c); p < col_end(c); ++p) {
      const Index r = inner[p];
      if (col_of_row[static_cast<std::size_t>(r)] < 0) {
        col_of_row[static_cast<std::size_t>(r)] = c;
        row_of_col[static_cast<std::size_t>(c)] = r;
        ++mt.size;
        break;
      }
    }

  struct Frame {
    Index col;
    Index ptr;
    Index via;
  };
  std::vector<Index> visited(static_cast<std::size_t>(nr), -1);
  std::vector<Frame> stack;
  for (Index c0 = 0; c0 < nc; ++c0) {
    if (row_of_col[static_cast<std::size_t>(c0)] >= 0) continue;
    stack.clear();
    stack.push_back({c0, col_begin(c0), -1});
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.ptr == col_end(top.col)) {
        stack.pop_back();
        continue;
      }
      const Index r = inner[top.ptr++];
      if (visited[static_cast<std::size_t>(r)] == c0) continue;
      visited[static_cast<std::size_t>(r)] = c0;
      const Index owner = col_of_row[static_cast<std::size_t>(r)];
      if (owner < 0) {
        // Augment: each frame's column takes the row it descended through.
        stack.back().via = r;
        for (const Frame& f : stack) {
          row_of_col[static_cast<std::size_t>(f.col)] = f.via;
          col_of_row[static_cast<std::size_t>(f.via)] = f.col;
        }
        ++mt.size;
        break;
      }
      top.via = r;
      stack.push_back({owner, col_begin(owner), -1});
    }
  }
  return mt;
}

namespace {

using Graph = std::vector<std::vector<Index>>;

// Iterative Tarjan. comp[v] receives the component id in order of completion.
std::vector<std::vector<Index>> tarjan(const Graph& g, std::vector<Index>& comp) {
  const Index n = static_cast<Index>(g.size());
  std::vector<Index> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<Index> stack;
  std::vector<std::pair<Index, std::size_t>> call;
  std::vector<std::vector<Index>> comps;
  comp.assign(static_cast<std::size_t>(n), -1);
  Index counter = 0;

  for (Index root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    call.push_back({root, 0});
    while (!call.empty()) {
      auto& [v, next] = call.back();
      const auto vs = static_cast<std::size_t>(v);
      if (next == 0) {
        index[vs] = low[vs] = counter++;
        stack.push_back(v);
        on_stack[vs] = 1;
      }
      bool descended = false;
      while (next < g[vs].size()) {
        const Index w = g[vs][next++];
        const auto ws = static_cast<std::size_t>(w);
        if (index[ws] < 0) {
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[ws]) low[vs] = std::min(low[vs], index[ws]);
      }
      if (descended) continue;
      if (low[vs] == index[vs]) {
        std::vector<Index> c;
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = 0;
          comp[static_cast<std::size_t>(w)] = static_cast<Index>(comps.size());
          c.push_back(w);
        } while (w != v);
        std::sort(c.begin(), c.end());
        comps.push_back(std::move(c));
      }
      const Index finished = v;
      call.pop_back();
      if (!call.empty()) {
        const auto ps = static_cast<std::size_t>(call.back().first);
        low[ps] = std::min(low[ps], low[static_cast<std::size_t>(finished)]);
      }
    }
  }
  return comps;
}

Graph adjacency(const SparseMatrix& m) {
  Graph g(static_cast<std::size_t>(m.rows()));
  for (Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      if (it.row() != j) g[static_cast<std::size_t>(it.row())].push_back(j);
  return g;
}

}  // namespace

std::vector<std::vector<Index>> strongly_connected_components(const SparseMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("strongly connected components of a non-square matrix");
  std::vector<Index> comp;
  return tarjan(adjacency(m), comp);
}

BtfResult find_btf(const SparseMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("block triangular form of a non-square matrix");
  const Index n = m.rows();
  const Matching mt = maximum_matching(m);
  if (mt.size < n)
    throw StructuralError("matrix is structurally singular (matching size " + std::to_string(mt.size) + " of " +
                          std::to_string(n) + ")");

  // Node j stands for column j and its matched row. Edge j -> c when the
  // matched row of j has an entry in column c: c's block must come first.
  Graph g(static_cast<std::size_t>(n));
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      const Index j = mt.col_of_row[static_cast<std::size_t>(it.row())];
      if (j != c) g[static_cast<std::size_t>(j)].push_back(c);
    }
  std::vector<Index> comp;
  const auto comps = tarjan(g, comp);
  const Index nc = static_cast<Index>(comps.size());

  // Kahn on the condensation, prerequisite -> dependent, smallest key first.
  std::vector<std::vector<Index>> succ(static_cast<std::size_t>(nc));
  std::vector<Index> indeg(static_cast<std::size_t>(nc), 0);
  for (Index j = 0; j < n; ++j)
    for (const Index c : g[static_cast<std::size_t>(j)]) {
      const Index a = comp[static_cast<std::size_t>(c)], b = comp[static_cast<std::size_t>(j)];
      if (a != b) {
        succ[static_cast<std::size_t>(a)].push_back(b);
        ++indeg[static_cast<std::size_t>(b)];
      }
    }
  auto key = [&](Index cid) { return comps[static_cast<std::size_t>(cid)].front(); };
  auto later = [&](Index a, Index b) { return key(a) > key(b); };
  std::priority_queue<Index, std::vector<Index>, decltype(later)> ready(later);
  for (Index cid = 0; cid < nc; ++cid)
    if (indeg[static_cast<std::size_t>(cid)] == 0) ready.push(cid);

  std::vector<Index> col_order, row_order, boundaries{0};
  col_order.reserve(static_cast<std::size_t>(n));
  row_order.reserve(static_cast<std::size_t>(n));
  while (!ready.empty()) {
    const Index cid = ready.top();
    ready.pop();
    for (const Index j : comps[static_cast<std::size_t>(cid)]) {
      col_order.push_back(j);
      row_order.push_back(mt.row_of_col[static_cast<std::size_t>(j)]);
    }
    boundaries.push_back(static_cast<Index>(col_order.size()));
    for (const Index s : succ[static_cast<std::size_t>(cid)])
      if (--indeg[static_cast<std::size_t>(s)] == 0) ready.push(s);
  }
  return {Permutation(std::move(row_order)), Permutation(std::move(col_order)), BlockStructure(std::move(boundaries))};
}

bool is_irreducible(const SparseMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("irreducibility of a non-square matrix");
  if (m.rows() <= 1) return true;
  return strongly_connected_components(m).size() == 1;
}

Index bipartite_component_count(const SparseMatrix& b) {
  const Index nr = b.rows(), nc = b.cols();
  std::vector<Index> parent(static_cast<std::size_t>(nr + nc));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  Index count = nr + nc;
  for (Index j = 0; j < b.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(b, j); it; ++it) {
      const Index a = find(it.row()), c = find(nr + j);
      if (a != c) {
        parent[static_cast<std::size_t>(a)] = c;
        --count;
      }
    }
  return count;
}

bool bipartite_connected(const SparseMatrix& b) { return bipartite_component_count(b) <= 1; }

}  // namespace kktbt
