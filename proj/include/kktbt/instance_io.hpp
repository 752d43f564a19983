#pragma once

#include <filesystem>

#include "kktbt/generator.hpp"

namespace kktbt {

/// Writes an instance directory:
///   kkt.mtx  full matrix (symmetric, lower triangle)
///   A.mtx    symmetric;  B.mtx general;  Wyy.mtx symmetric;  J.mtx general
///   meta.json dims, J block boundaries and tags, provenance, rhs, x_true
/// Output is a pure function of the system. Throws IoError.
void write_instance(const std::filesystem::path& dir, const KKTSystem& k);

/// Reads a directory written by write_instance and checks that the blocks
/// agree with the sidecar dimensions and with kkt.mtx. Throws IoError.
KKTSystem read_instance(const std::filesystem::path& dir);

}  // namespace kktbt
