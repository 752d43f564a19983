#include "kktbt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <sstream>

#include "kktbt/jacobi.hpp"
#include "kktbt/schur.hpp"
#include "kktbt/sparse_ldlt.hpp"

namespace kktbt {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

json inertia_json(const Inertia& i) { return json::array({i.positive, i.negative, i.zero}); }

}  // namespace

double BenchRow::nnz_ratio() const {
  return baseline_ok ? ratio(static_cast<double>(baseline_factor_nnz), static_cast<double>(structured_factor_nnz))
                     : 0.0;
}

double BenchRow::flop_ratio() const {
  return baseline_ok
             ? ratio(static_cast<double>(baseline_factor_flops), static_cast<double>(structured_factor_flops()))
             : 0.0;
}

double BenchRow::speedup() const {
  return baseline_ok ? ratio(baseline_timing.total(), structured_timing.total()) : 0.0;
}

BenchRow bench_instance(const KKTSystem& k, const BenchOptions& opts) {
  if (opts.repetitions < 1) throw ParameterError("repetitions must be at least 1");
  BenchRow r;
  r.preset = k.preset;
  r.scale = k.scale;
  r.seed = k.seed;
  r.id = k.preset + "/" + k.scale + "/" + std::to_string(k.seed);
  r.layers = k.layers();
  r.link_density = k.link_density;
  r.dim = k.dim();
  r.n_C = k.n_C();
  r.n_A = k.n_A();

  const SparseMatrix M = k.assemble();
  const SymmetricSparse Msym = SymmetricSparse::from_full(M);
  r.nnz_A = k.A.nnz();
  r.nnz_B = k.B.nonZeros();
  r.nnz_C = k.W_yy.nnz() + k.J.nonZeros();
  r.nnz_M = Msym.nnz();

  std::vector<double> t_pivot, t_build, t_schur, t_solve;
  Vector x_structured;
  for (int rep = 0; rep < opts.repetitions; ++rep) {
    const SchurFactors f = schur_factorize(k.A, k.B, k.W_yy, k.J, k.j_structure);
    const SolveReport s = solve_refined(f, M, k.rhs, opts.refine);
    t_pivot.push_back(f.counters().factor_pivot_seconds);
    t_build.push_back(f.counters().build_schur_seconds);
    t_schur.push_back(f.counters().factor_schur_seconds);
    t_solve.push_back(s.solve_seconds);
    if (rep + 1 < opts.repetitions) continue;
    r.b_nonzero_columns = static_cast<Index>(f.nonzero_columns().size());
    r.structured_factor_nnz = f.factor_nnz();
    r.bt_factor_nnz = f.bt().factor_nnz();
    r.s_factor_nnz = f.s_factors().factor_nnz();
    r.bt_off_diagonal_nnz = f.bt().off_diagonal_nnz();
    r.identity_blocks = f.bt().identity_block_count();
    r.flops_factor_pivot = f.counters().factor_pivot_flops;
    r.flops_build_schur = f.counters().build_schur_flops;
    r.flops_factor_schur = f.counters().factor_schur_flops;
    r.structured_solve_flops = s.solve_flops;
    r.structured_residual = s.residual;
    r.structured_iterations = s.iterations;
    r.structured_converged = s.converged;
    r.structured_inertia = s.inertia;
    r.inertia_target_met = check_inertia_target(s.inertia, k.n(), k.m());
    x_structured = s.x;
  }
  // Off-diagonal nnz of the permuted pivot matrix, counted from the input.
  {
    const PivotPermutation pp = structured_pivot_permutation(k.n_y);
    const BlockStructure bs = pivot_block_structure(k.j_structure);
    const SparseMatrix pc = permute(k.pivot_matrix(), pp.row, pp.col);
    for (Index j = 0; j < pc.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(pc, j); it; ++it)
        r.bt_input_off_diagonal_nnz += bs.block_of(it.row()) != bs.block_of(j);
  }
  r.factor_pivot_seconds = median(t_pivot);
  r.build_schur_seconds = median(t_build);
  r.factor_schur_seconds = median(t_schur);
  r.structured_timing.factor_seconds = r.factor_pivot_seconds + r.build_schur_seconds + r.factor_schur_seconds;
  r.structured_timing.solve_seconds = median(t_solve);

  Vector x_baseline;
  try {
    std::vector<double> t_factor, t_bsolve;
    for (int rep = 0; rep < opts.repetitions; ++rep) {
      const auto t0 = Clock::now();
      const SparseLdltBaseline b(Msym);
      t_factor.push_back(seconds_since(t0));
      const SolveReport s = refine([&](const Vector& rhs, FlopCounter* fc) { return b.solve(rhs, fc); }, M, k.rhs,
                                   opts.refine);
      t_bsolve.push_back(s.solve_seconds);
      if (rep + 1 < opts.repetitions) continue;
      r.baseline_factor_nnz = b.factor_nnz();
      r.baseline_fill_nnz = b.fill_nnz();
      r.baseline_factor_flops = b.flops();
      r.baseline_solve_flops = s.solve_flops;
      r.baseline_residual = s.residual;
      r.baseline_iterations = s.iterations;
      r.baseline_converged = s.converged;
      r.baseline_inertia = b.inertia();
      x_baseline = s.x;
    }
    r.baseline_ok = true;
    r.baseline_timing.factor_seconds = median(t_factor);
    r.baseline_timing.solve_seconds = median(t_bsolve);
  } catch (const BaselineBreakdown& e) {
    r.baseline_ok = false;
    r.baseline_error = e.what();
  }

  if (k.dim() <= opts.oracle_max_dim) {
    r.oracle_inertia = inertia_oracle(DenseMatrix(M));
    r.inertia_verified = true;
    r.inertia_matches_oracle = *r.oracle_inertia == r.structured_inertia;
  }
  if (r.baseline_ok) {
    const double scale = std::max(x_structured.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    r.solution_difference = (x_structured - x_baseline).cwiseAbs().maxCoeff() / scale;
    r.solutions_agree = r.structured_converged && r.baseline_converged && r.solution_difference <= 1e-7;
  }
  return r;
}

BenchReport run_bench(const std::vector<std::string>& presets, const std::vector<std::string>& scales,
                      const std::vector<std::uint64_t>& seeds, const BenchOptions& opts) {
  std::vector<InstanceParams> params;
  for (const auto& p : presets)
    for (const auto& s : scales) params.push_back(instance_preset(p, s));
  BenchReport report;
  report.options = opts;
  for (const auto& p : params)
    for (const auto seed : seeds) report.rows.push_back(bench_instance(generate_instance(p, seed), opts));
  return report;
}

json to_json(const BenchRow& r) {
  json j;
  j["id"] = r.id;
  j["preset"] = r.preset;
  j["scale"] = r.scale;
  j["seed"] = r.seed;
  j["layers"] = r.layers;
  j["link_density"] = r.link_density;
  j["dims"] = {{"matrix", r.dim}, {"pivot", r.n_C}, {"schur", r.n_A}};
  j["nnz"] = {{"A", r.nnz_A}, {"B", r.nnz_B}, {"C", r.nnz_C}, {"M", r.nnz_M}, {"B_nonzero_columns", r.b_nonzero_columns}};
  j["structured"] = {
      {"factor_nnz", r.structured_factor_nnz},
      {"bt_factor_nnz", r.bt_factor_nnz},
      {"schur_factor_nnz", r.s_factor_nnz},
      {"bt_off_diagonal_nnz", r.bt_off_diagonal_nnz},
      {"input_off_diagonal_nnz", r.bt_input_off_diagonal_nnz},
      {"identity_blocks", r.identity_blocks},
      {"flops",
       {{"factor_pivot", r.flops_factor_pivot},
        {"build_schur", r.flops_build_schur},
        {"factor_schur", r.flops_factor_schur},
        {"factor_total", r.structured_factor_flops()},
        {"solve", r.structured_solve_flops}}},
      {"residual", r.structured_residual},
      {"refinement_iterations", r.structured_iterations},
      {"converged", r.structured_converged},
      {"inertia", inertia_json(r.structured_inertia)},
      {"inertia_target_met", r.inertia_target_met}};
  json b = {{"status", r.baseline_ok ? "ok" : "breakdown"}};
  if (r.baseline_ok) {
    b["factor_nnz"] = r.baseline_factor_nnz;
    b["fill_nnz"] = r.baseline_fill_nnz;
    b["flops"] = {{"factor", r.baseline_factor_flops}, {"solve", r.baseline_solve_flops}};
    b["residual"] = r.baseline_residual;
    b["refinement_iterations"] = r.baseline_iterations;
    b["converged"] = r.baseline_converged;
    b["inertia"] = inertia_json(r.baseline_inertia);
  } else {
    b["error"] = r.baseline_error;
  }
  j["baseline"] = b;
  j["ratios"] = {{"factor_nnz", r.nnz_ratio()}, {"factor_flops", r.flop_ratio()}};
  j["checks"] = {{"inertia_verified", r.inertia_verified},
                 {"oracle_inertia", r.oracle_inertia ? inertia_json(*r.oracle_inertia) : json(nullptr)},
                 {"inertia_matches_oracle", r.inertia_matches_oracle},
                 {"solution_difference", r.solution_difference},
                 {"solutions_agree", r.solutions_agree}};
  j["timing"] = {{"structured",
                  {{"factor_pivot", r.factor_pivot_seconds},
                   {"build_schur", r.build_schur_seconds},
                   {"factor_schur", r.factor_schur_seconds},
                   {"factor", r.structured_timing.factor_seconds},
                   {"solve", r.structured_timing.solve_seconds},
                   {"total", r.structured_timing.total()}}},
                 {"baseline",
                  {{"factor", r.baseline_timing.factor_seconds},
                   {"solve", r.baseline_timing.solve_seconds},
                   {"total", r.baseline_timing.total()}}},
                 {"speedup", r.speedup()}};
  return j;
}

json to_json(const BenchReport& report) {
  json rows = json::array();
  Index s_nnz = 0, b_nnz = 0, breakdowns = 0;
  std::uint64_t s_flops = 0, b_flops = 0;
  double s_time = 0.0, b_time = 0.0;
  json warnings = json::array();
  for (const auto& r : report.rows) {
    rows.push_back(to_json(r));
    s_nnz += r.structured_factor_nnz;
    b_nnz += r.baseline_factor_nnz;
    s_flops += r.structured_factor_flops();
    b_flops += r.baseline_factor_flops;
    if (r.baseline_ok) {
      s_time += r.structured_timing.total();
      b_time += r.baseline_timing.total();
    } else {
      ++breakdowns;
      warnings.push_back("baseline breakdown on " + r.id + " excluded from speedup");
    }
  }
  json j;
  j["schema"] = "kktbt-bench";
  j["version"] = 1;
  j["options"] = {{"tol", report.options.refine.tol},
                  {"max_refine", report.options.refine.max_iters},
                  {"repetitions", report.options.repetitions},
                  {"oracle_max_dim", report.options.oracle_max_dim}};
  j["rows"] = rows;
  j["totals"] = {{"instances", report.rows.size()},
                 {"structured_factor_nnz", s_nnz},
                 {"baseline_factor_nnz", b_nnz},
                 {"structured_factor_flops", s_flops},
                 {"baseline_factor_flops", b_flops},
                 {"baseline_breakdowns", breakdowns},
                 {"timing",
                  {{"structured_total", s_time}, {"baseline_total", b_time}, {"speedup", ratio(b_time, s_time)}}}};
  j["warnings"] = warnings;
  return j;
}

json strip_timing(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "timing") out[it.key()] = strip_timing(it.value());
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& e : j) out.push_back(strip_timing(e));
    return out;
  }
  return j;
}

std::string format_table(const BenchReport& report) {
  std::ostringstream os;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-26s %6s %6s %6s %8s %10s %10s %6s %12s %12s %6s %9s %3s %14s %7s %8s\n",
                "instance", "dim", "pivot", "schur", "nnz(M)", "fac.nnz", "base.nnz", "ratio", "fac.flops",
                "base.flops", "ratio", "resid", "it", "inertia", "oracle", "speedup");
  os << buf;
  for (const auto& r : report.rows) {
    std::ostringstream in;
    in << r.structured_inertia;
    const char* oracle = !r.inertia_verified ? "-" : r.inertia_matches_oracle ? "ok" : "MISMATCH";
    if (r.baseline_ok)
      std::snprintf(buf, sizeof buf,
                    "%-26s %6ld %6ld %6ld %8ld %10ld %10ld %6.2f %12llu %12llu %6.2f %9.2e %3d %14s %7s %8.2f\n",
                    r.id.c_str(), static_cast<long>(r.dim), static_cast<long>(r.n_C), static_cast<long>(r.n_A),
                    static_cast<long>(r.nnz_M), static_cast<long>(r.structured_factor_nnz),
                    static_cast<long>(r.baseline_factor_nnz), r.nnz_ratio(),
                    static_cast<unsigned long long>(r.structured_factor_flops()),
                    static_cast<unsigned long long>(r.baseline_factor_flops), r.flop_ratio(), r.structured_residual,
                    r.structured_iterations, in.str().c_str(), oracle, r.speedup());
    else
      std::snprintf(buf, sizeof buf, "%-26s %6ld %6ld %6ld %8ld %10ld %10s %6s %12llu %12s %6s %9.2e %3d %14s %7s %8s\n",
                    r.id.c_str(), static_cast<long>(r.dim), static_cast<long>(r.n_C), static_cast<long>(r.n_A),
                    static_cast<long>(r.nnz_M), static_cast<long>(r.structured_factor_nnz), "breakdown", "-",
                    static_cast<unsigned long long>(r.structured_factor_flops()), "-", "-", r.structured_residual,
                    r.structured_iterations, in.str().c_str(), oracle, "-");
    os << buf;
  }
  return os.str();
}

}  // namespace kktbt
