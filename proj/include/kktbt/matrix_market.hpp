#pragma once

#include <filesystem>
#include <iosfwd>
#include <variant>

#include "kktbt/sparse.hpp"

namespace kktbt::mm {

// Matrix Market "coordinate real general" and "coordinate real symmetric".
// Indices are 1-based on disk and 0-based in memory. Values are written with
// 17 significant digits so a write/read cycle is exact.

using Loaded = std::variant<SparseMatrix, SymmetricSparse>;

/// Reads either flavour. Symmetric files must hold the lower triangle.
Loaded read(std::istream& in);
Loaded read(const std::filesystem::path& path);

SparseMatrix read_general(const std::filesystem::path& path);
SymmetricSparse read_symmetric(const std::filesystem::path& path);

/// Full pattern of whatever the file holds (symmetric files are expanded).
SparseMatrix read_as_full(const std::filesystem::path& path);

/// Entries are emitted sorted by column, then row.
void write(std::ostream& out, const SparseMatrix& m);
void write(std::ostream& out, const SymmetricSparse& m);
void write(const std::filesystem::path& path, const SparseMatrix& m);
void write(const std::filesystem::path& path, const SymmetricSparse& m);

}  // namespace kktbt::mm
