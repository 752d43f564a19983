#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kktbt/common.hpp"
#include "kktbt/generator.hpp"
#include "kktbt/refinement.hpp"

namespace kktbt {

struct BenchOptions {
  RefinementOptions refine;
  /// Timed repetitions per instance; medians are reported.
  int repetitions = 3;
  /// Run the Jacobi inertia oracle when the KKT dimension is at most this.
  Index oracle_max_dim = 300;
};

struct MethodTiming {
  double factor_seconds = 0.0;
  double solve_seconds = 0.0;
  double total() const noexcept { return factor_seconds + solve_seconds; }
};

struct BenchRow {
  std::string id;
  std::string preset;
  std::string scale;
  std::uint64_t seed = 0;
  Index layers = 0;
  double link_density = 0.0;

  // Dimensions: full matrix, pivot matrix C, Schur complement S.
  Index dim = 0;
  Index n_C = 0;
  Index n_A = 0;
  // Lower-triangle nnz of A, C and M; nnz of B and its nonzero columns.
  Index nnz_A = 0;
  Index nnz_B = 0;
  Index nnz_C = 0;
  Index nnz_M = 0;
  Index b_nonzero_columns = 0;

  // Structured method.
  Index structured_factor_nnz = 0;
  Index bt_factor_nnz = 0;
  Index s_factor_nnz = 0;
  Index bt_off_diagonal_nnz = 0;
  Index bt_input_off_diagonal_nnz = 0;
  Index identity_blocks = 0;
  std::uint64_t flops_factor_pivot = 0;
  std::uint64_t flops_build_schur = 0;
  std::uint64_t flops_factor_schur = 0;
  std::uint64_t structured_solve_flops = 0;
  double structured_residual = 0.0;
  int structured_iterations = 0;
  bool structured_converged = false;
  Inertia structured_inertia;
  bool inertia_target_met = false;

  // Baseline.
  bool baseline_ok = false;
  std::string baseline_error;
  Index baseline_factor_nnz = 0;
  Index baseline_fill_nnz = 0;
  std::uint64_t baseline_factor_flops = 0;
  std::uint64_t baseline_solve_flops = 0;
  double baseline_residual = 0.0;
  int baseline_iterations = 0;
  bool baseline_converged = false;
  Inertia baseline_inertia;

  // Cross checks.
  bool inertia_verified = false;
  std::optional<Inertia> oracle_inertia;
  bool inertia_matches_oracle = false;
  double solution_difference = 0.0;
  bool solutions_agree = false;

  MethodTiming structured_timing;
  double factor_pivot_seconds = 0.0;
  double build_schur_seconds = 0.0;
  double factor_schur_seconds = 0.0;
  MethodTiming baseline_timing;

  std::uint64_t structured_factor_flops() const noexcept {
    return flops_factor_pivot + flops_build_schur + flops_factor_schur;
  }
  double nnz_ratio() const;
  double flop_ratio() const;
  /// Baseline (factor + solve) time over structured (factor + solve) time.
  double speedup() const;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  BenchOptions options;
};

/// Runs both pipelines on one generated system.
BenchRow bench_instance(const KKTSystem& k, const BenchOptions& opts = {});

/// Generates and benchmarks every preset x scale x seed cell.
BenchReport run_bench(const std::vector<std::string>& presets, const std::vector<std::string>& scales,
                      const std::vector<std::uint64_t>& seeds, const BenchOptions& opts = {});

/// Machine format. Wall-clock quantities live only under "timing" keys.
nlohmann::json to_json(const BenchRow& row);
nlohmann::json to_json(const BenchReport& report);
/// Copy of a report or row with every "timing" member removed.
nlohmann::json strip_timing(const nlohmann::json& j);

/// Aligned text table.
std::string format_table(const BenchReport& report);

}  // namespace kktbt
