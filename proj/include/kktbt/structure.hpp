#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "kktbt/common.hpp"
#include "kktbt/sparse.hpp"

namespace kktbt {

/// How an off-diagonal block of a block-triangular matrix is stored.
enum class BlockStorage { Diagonal, Dense, Sparse };

const char* to_string(BlockStorage s) noexcept;
std::optional<BlockStorage> block_storage_from_string(std::string_view s) noexcept;

/// Diagonal-block boundaries of a (permuted) square matrix plus optional
/// storage hints for off-diagonal blocks. Boundaries start at 0, end at the
/// dimension and are strictly increasing.
class BlockStructure {
 public:
  BlockStructure() : boundaries_{0} {}
  explicit BlockStructure(std::vector<Index> boundaries);

  static BlockStructure singletons(Index dim);

  Index dim() const noexcept { return boundaries_.back(); }
  Index num_blocks() const noexcept { return static_cast<Index>(boundaries_.size()) - 1; }
  Index begin(Index b) const { return boundaries_[static_cast<std::size_t>(b)]; }
  Index end(Index b) const { return boundaries_[static_cast<std::size_t>(b) + 1]; }
  Index size(Index b) const { return end(b) - begin(b); }
  std::vector<Index> sizes() const;
  const std::vector<Index>& boundaries() const noexcept { return boundaries_; }
  /// Block containing index i.
  Index block_of(Index i) const;

  void set_tag(Index row_block, Index col_block, BlockStorage s) { tags_[{row_block, col_block}] = s; }
  std::optional<BlockStorage> tag(Index row_block, Index col_block) const;
  const std::map<std::pair<Index, Index>, BlockStorage>& tags() const noexcept { return tags_; }

  friend bool operator==(const BlockStructure&, const BlockStructure&) = default;

 private:
  std::vector<Index> boundaries_;
  std::map<std::pair<Index, Index>, BlockStorage> tags_;
};

/// True when every entry of `permuted` lies on or below the block diagonal.
bool is_block_lower_triangular(const SparseMatrix& permuted, const BlockStructure& s);

struct PivotPermutation {
  Permutation row;
  Permutation col;
};

/// Row/column permutations taking C = [W_yy J^T; J 0] (2 n_y square) to block
/// lower triangular form:
///   columns {0..n_y-1, 2n_y-1..n_y}, rows {n_y..2n_y-1, n_y-1..0}.
PivotPermutation structured_pivot_permutation(Index n_y);

/// Block structure of the permuted pivot matrix given the block structure of
/// J: J's diagonal blocks followed by J^T's diagonal blocks in reverse order.
/// Tags on J's off-diagonal blocks are carried over to both copies.
BlockStructure pivot_block_structure(const BlockStructure& j_structure);

struct Matching {
  std::vector<Index> row_of_col;  // -1 if unmatched
  std::vector<Index> col_of_row;  // -1 if unmatched
  Index size = 0;
};

/// Maximum-cardinality bipartite matching (rows vs columns) by augmenting
/// paths. A square matrix is structurally nonsingular iff size == dim.
Matching maximum_matching(const SparseMatrix& m);

/// Strongly connected components of the directed graph with an edge i->j for
/// every off-diagonal entry (i, j). Components are listed in Tarjan order.
std::vector<std::vector<Index>> strongly_connected_components(const SparseMatrix& m);

struct BtfResult {
  Permutation row;
  Permutation col;
  BlockStructure structure;
};

/// Block lower triangular form with irreducible diagonal blocks: a maximum
/// matching places a zero-free diagonal, then strongly connected components of
/// the matched graph become the diagonal blocks. Blocks are in topological
/// order, lowest original column index first among independent blocks.
/// Throws StructuralError if `m` is structurally singular.
BtfResult find_btf(const SparseMatrix& m);

/// Irreducible iff the directed graph of `m` is strongly connected.
bool is_irreducible(const SparseMatrix& m);

/// Connected components of the bipartite graph rows+columns, edges at entries.
Index bipartite_component_count(const SparseMatrix& b);
bool bipartite_connected(const SparseMatrix& b);

}  // namespace kktbt
