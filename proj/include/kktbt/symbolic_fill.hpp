#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kktbt/common.hpp"
#include "kktbt/sparse.hpp"

namespace kktbt {

/// Classifies a lower-triangle position (row >= col) as inside a region of
/// interest, such as the diagonal blocks of some partition.
using BlockPredicate = std::function<bool(Index, Index)>;

/// Structural fill created by eliminating a pivot of a symmetric pattern.
struct FillReport {
  /// Lower-triangle nnz of the input pattern.
  Index input_nnz = 0;
  /// New lower-triangle positions (row >= col), sorted by column then row,
  /// expressed in the original indexing.
  std::vector<std::pair<Index, Index>> fill;
  Index inside_blocks = 0;
  Index outside_blocks = 0;

  Index fill_nnz() const noexcept { return static_cast<Index>(fill.size()); }
};

/// Fill of the Schur complement after a 1x1 pivot on `pivot`. The pivot's
/// diagonal must be structurally nonzero (StructuralError otherwise).
FillReport symbolic_fill_1x1(const SymmetricSparse& pattern, Index pivot, const BlockPredicate& inside = {});

/// Fill of the Schur complement after the 2x2 pivot {p, q}. The coupling
/// entry (p, q) must be structurally nonzero (StructuralError otherwise).
FillReport symbolic_fill_2x2(const SymmetricSparse& pattern, Index p, Index q, const BlockPredicate& inside = {});

/// Pattern of a symmetric matrix of the partitioned form
///
///        d1  e1  d2  e2  d3  e3
///   d1 [ D11 E11^T D21^T E21^T D31^T 0    ]
///   e1 [ E11 0   E12  0   E13  0    ]
///   d2 [ D21 E12^T D22 E22^T D32^T 0    ]
///   e2 [ E21 0   E22  0   E23  0    ]
///   d3 [ D31 E13^T D32 E23^T D33  E33^T ]
///   e3 [ 0   0   0    0   E33  0    ]
///
/// where E = [E_ij] (rows e, columns d) is block upper triangular with
/// structurally nonsingular diagonal blocks. Groups d1, e1 have size 1, d2, e2
/// size b-1 and d3, e3 size b. The pivot is d1 and (e1, d1) = E11 is the 2x2
/// coupling.
struct PartitionedFixture {
  SymmetricSparse pattern;
  Index block = 0;
  /// Group id (0..5 for d1, e1, d2, e2, d3, e3) of every index.
  std::vector<int> group;

  Index pivot() const noexcept { return 0; }
  Index coupling() const noexcept { return 1; }
  /// Name of the block holding lower position (i, j), e.g. "D32" or "E23";
  /// the structurally zero e-e blocks are named "Z21" and so on.
  std::string block_name(Index i, Index j) const;
  /// Inside one of E's diagonal blocks: (e1|e2) x (d1|d2) or e3 x d3.
  bool in_e_diagonal_block(Index i, Index j) const;
  /// Blocks that may receive fill from the 1x1 pivot on d1: anything outside
  /// the last block row and column (e3).
  bool in_1x1_allowed(Index i, Index j) const;
  /// Blocks that may receive fill from the 2x2 pivot {d1, e1}: D22, E22, D32,
  /// E23 and D33.
  bool in_2x2_allowed(Index i, Index j) const;
};

/// Every block listed as present is fully dense (E's diagonal blocks
/// included); E31 = E32 = 0 and e-e blocks are empty.
PartitionedFixture partitioned_fixture_dense(Index block);

/// Same block layout with present blocks sampled at `density`; D and E
/// diagonal blocks always keep their diagonal.
PartitionedFixture partitioned_fixture_random(Index block, double density, std::uint64_t seed);

}  // namespace kktbt
