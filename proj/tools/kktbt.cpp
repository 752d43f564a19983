#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kktbt/bench.hpp"
#include "kktbt/instance_io.hpp"
#include "kktbt/matrix_market.hpp"
#include "kktbt/schur.hpp"
#include "kktbt/sparse_ldlt.hpp"
#include "kktbt/structure.hpp"
#include "kktbt/symbolic_fill.hpp"

namespace {

using namespace kktbt;
using nlohmann::json;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kParameter = 1, kStructural = 2, kNumeric = 3, kIo = 4 };

struct Flags {
  bool json = false;
};

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

int report_error(const Flags& flags, const char* kind, const std::string& message, int code) {
  if (flags.json)
    print_json({{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}});
  else
    std::cerr << "kktbt: " << kind << " error: " << message << '\n';
  return code;
}

json inertia_json(const Inertia& i) { return json::array({i.positive, i.negative, i.zero}); }

std::string inertia_text(const Inertia& i) {
  std::ostringstream os;
  os << i;
  return os.str();
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string preset = "mnist-like";
  std::string scale = "tiny";
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, const Flags& flags) {
  const KKTSystem k = generate_instance(instance_preset(a.preset, a.scale), a.seed);
  write_instance(a.out, k);
  if (flags.json) {
    print_json({{"instance", a.out},
                {"preset", k.preset},
                {"scale", k.scale},
                {"seed", k.seed},
                {"dims", {{"matrix", k.dim()}, {"pivot", k.n_C()}, {"schur", k.n_A()}, {"n_y", k.n_y}}},
                {"nnz", {{"A", k.A.nnz()}, {"B", k.B.nonZeros()}, {"W_yy", k.W_yy.nnz()}, {"J", k.J.nonZeros()}}}});
  } else {
    std::cout << "wrote " << a.out << ": " << k.preset << '/' << k.scale << " seed " << k.seed << ", dim " << k.dim()
              << " (A " << k.n_A() << ", C " << k.n_C() << ")\n";
  }
  return kOk;
}

// ------------------------------------------------------------------- solve

struct SolveArgs {
  std::string instance;
  std::string method = "schur";
  double tol = 1e-5;
  int max_refine = 10;
  std::string out;
};

void write_vector(const fs::path& path, const Vector& x) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  char buf[40];
  for (Index i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x[i]);
    f << buf;
  }
  if (!f) throw IoError("write failed for " + path.string());
}

int cmd_solve(const SolveArgs& a, const Flags& flags) {
  const KKTSystem k = read_instance(a.instance);
  const SparseMatrix M = k.assemble();
  const RefinementOptions ropts{a.tol, a.max_refine};

  json row = {{"instance", a.instance},
              {"method", a.method},
              {"dims", {{"matrix", k.dim()}, {"pivot", k.n_C()}, {"schur", k.n_A()}}}};
  SolveReport s;
  Index factor_nnz = 0;
  std::uint64_t factor_flops = 0;
  double factor_seconds = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  if (a.method == "schur") {
    const SchurFactors f = schur_factorize(k.A, k.B, k.W_yy, k.J, k.j_structure);
    factor_seconds = f.counters().total_seconds();
    s = solve_refined(f, M, k.rhs, ropts);
    factor_nnz = f.factor_nnz();
    factor_flops = f.counters().total_flops();
    row["flops_by_phase"] = {{"factor_pivot", f.counters().factor_pivot_flops},
                             {"build_schur", f.counters().build_schur_flops},
                             {"factor_schur", f.counters().factor_schur_flops}};
  } else {
    const SparseLdltBaseline b(k.assemble_symmetric());
    factor_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    s = refine([&](const Vector& rhs, FlopCounter* fc) { return b.solve(rhs, fc); }, M, k.rhs, ropts);
    s.inertia = b.inertia();
    factor_nnz = b.factor_nnz();
    factor_flops = b.flops();
  }
  const double scale = std::max(k.x_true.cwiseAbs().maxCoeff(), 1.0);
  const double err = (s.x - k.x_true).cwiseAbs().maxCoeff() / scale;

  const fs::path out = a.out.empty() ? fs::path(a.instance) / ("solution-" + a.method + ".txt") : fs::path(a.out);
  write_vector(out, s.x);

  row["solution"] = out.string();
  row["factor_nnz"] = factor_nnz;
  row["flops"] = {{"factor", factor_flops}, {"solve", s.solve_flops}};
  row["residual"] = s.residual;
  row["refinement_iterations"] = s.iterations;
  row["converged"] = s.converged;
  row["inertia"] = inertia_json(s.inertia);
  row["inertia_target_met"] = check_inertia_target(s.inertia, k.n(), k.m());
  row["error_vs_x_true"] = err;
  row["timing"] = {{"factor", factor_seconds}, {"solve", s.solve_seconds}};
  if (flags.json) {
    if (!s.converged)
      row["error"] = {{"kind", "numeric"}, {"message", "refinement did not reach the residual tolerance"},
                      {"exit_code", static_cast<int>(kNumeric)}};
    print_json(row);
  } else {
    std::printf("method %s  dim %ld  factor nnz %ld  factor flops %llu\n", a.method.c_str(),
                static_cast<long>(k.dim()), static_cast<long>(factor_nnz),
                static_cast<unsigned long long>(factor_flops));
    std::printf("residual %.3e after %d refinement iterations (%s)\n", s.residual, s.iterations,
                s.converged ? "converged" : "NOT converged");
    std::printf("inertia %s, target (%ld,%ld,0) %s\n", inertia_text(s.inertia).c_str(), static_cast<long>(k.n()),
                static_cast<long>(k.m()), check_inertia_target(s.inertia, k.n(), k.m()) ? "met" : "not met");
    std::printf("max error vs x_true %.3e; solution written to %s\n", err, out.string().c_str());
    if (!s.converged) std::cerr << "kktbt: numeric error: refinement did not reach the residual tolerance\n";
  }
  return s.converged ? kOk : kNumeric;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string file;
  Index fixture = 0;
  double fixture_density = 1.0;
  std::uint64_t fixture_seed = 1;
  std::optional<Index> pivot;
  std::vector<Index> pivot2;
  std::vector<Index> blocks;
};

json fill_json(const FillReport& r, const std::function<std::string(Index, Index)>& name) {
  std::set<std::string> names;
  json entries = json::array();
  for (const auto& [i, j] : r.fill) {
    entries.push_back({i, j});
    if (name) names.insert(name(i, j));
  }
  json out = {{"input_nnz", r.input_nnz},
              {"fill_nnz", r.fill_nnz()},
              {"inside_blocks", r.inside_blocks},
              {"outside_blocks", r.outside_blocks},
              {"entries", entries}};
  if (name) out["affected_blocks"] = std::vector<std::string>(names.begin(), names.end());
  return out;
}

int cmd_analyze(const AnalyzeArgs& a, const Flags& flags) {
  if (a.file.empty() == (a.fixture == 0)) throw ParameterError("analyze needs exactly one of FILE or --fixture");
  std::optional<PartitionedFixture> fixture;
  SparseMatrix m;
  if (a.fixture > 0) {
    fixture = a.fixture_density >= 1.0 ? partitioned_fixture_dense(a.fixture)
                                       : partitioned_fixture_random(a.fixture, a.fixture_density, a.fixture_seed);
    m = fixture->pattern.full();
  } else {
    m = mm::read_as_full(a.file);
  }
  if (m.rows() != m.cols()) throw ParameterError("analyze needs a square matrix");

  json report = {{"source", a.file.empty() ? "fixture(" + std::to_string(a.fixture) + ")" : a.file},
                 {"dim", m.rows()},
                 {"nnz", m.nonZeros()}};
  const Matching match = maximum_matching(m);
  report["structural_rank"] = match.size;
  if (match.size == m.rows()) {
    const BtfResult btf = find_btf(m);
    report["btf"] = {{"num_blocks", btf.structure.num_blocks()},
                     {"block_sizes", btf.structure.sizes()},
                     {"row_permutation", btf.row.forward()},
                     {"col_permutation", btf.col.forward()}};
    report["irreducible"] = btf.structure.num_blocks() <= 1;
  } else {
    report["btf"] = nullptr;
    report["irreducible"] = false;
  }

  const bool want_fill = a.pivot.has_value() || !a.pivot2.empty();
  std::function<std::string(Index, Index)> name;
  BlockPredicate inside;
  if (fixture) {
    name = [&](Index i, Index j) { return fixture->block_name(i, j); };
    inside = [&](Index i, Index j) { return fixture->in_e_diagonal_block(i, j); };
  } else if (!a.blocks.empty()) {
    auto bs = std::make_shared<BlockStructure>(a.blocks);
    if (bs->dim() != m.rows()) throw ParameterError("--blocks must end at the matrix dimension");
    name = [bs](Index i, Index j) {
      return "(" + std::to_string(bs->block_of(i)) + "," + std::to_string(bs->block_of(j)) + ")";
    };
    inside = [bs](Index i, Index j) { return bs->block_of(i) == bs->block_of(j); };
  }
  std::optional<SymmetricSparse> sym;
  if (want_fill) {
    const SparseMatrix p = pattern_of(m);
    if (SparseMatrix(p - SparseMatrix(p.transpose())).norm() != 0.0)
      throw ParameterError("fill prediction needs a structurally symmetric matrix");
    sym = SymmetricSparse::from_full(m);
  }
  if (a.pivot) report["fill_1x1"] = fill_json(symbolic_fill_1x1(*sym, *a.pivot, inside), name);
  if (!a.pivot2.empty()) {
    if (a.pivot2.size() != 2) throw ParameterError("--pivot2 takes two indices p,q");
    report["fill_2x2"] = fill_json(symbolic_fill_2x2(*sym, a.pivot2[0], a.pivot2[1], inside), name);
  }
  if (fixture && !want_fill) {
    report["fill_1x1"] = fill_json(symbolic_fill_1x1(*(sym = fixture->pattern), fixture->pivot(), inside), name);
    report["fill_2x2"] =
        fill_json(symbolic_fill_2x2(*sym, fixture->pivot(), fixture->coupling(), inside), name);
  }

  if (flags.json) {
    print_json(report);
    return kOk;
  }
  std::cout << "matrix " << report["source"].get<std::string>() << ": dim " << m.rows() << ", nnz " << m.nonZeros()
            << ", structural rank " << match.size << '\n';
  if (report["btf"].is_null()) {
    std::cout << "structurally singular: no block triangular form\n";
  } else {
    const auto sizes = report["btf"]["block_sizes"].get<std::vector<Index>>();
    std::cout << "block triangular form: " << sizes.size() << " diagonal block(s), sizes";
    for (const auto s : sizes) std::cout << ' ' << s;
    std::cout << '\n' << (report["irreducible"].get<bool>() ? "irreducible" : "reducible") << '\n';
  }
  for (const char* key : {"fill_1x1", "fill_2x2"}) {
    if (!report.contains(key)) continue;
    const json& f = report[key];
    std::cout << key << ": " << f["fill_nnz"].get<Index>() << " fill entries";
    if (inside)
      std::cout << " (" << f["inside_blocks"].get<Index>() << " inside blocks, " << f["outside_blocks"].get<Index>()
                << " outside)";
    std::cout << '\n';
    if (f.contains("affected_blocks")) {
      std::cout << "  affected blocks:";
      for (const auto& b : f["affected_blocks"]) std::cout << ' ' << b.get<std::string>();
      std::cout << '\n';
    }
  }
  return kOk;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<std::string> presets;
  std::vector<std::string> scales{"tiny", "small"};
  std::vector<std::uint64_t> seeds{1};
  int num_seeds = 0;
  int repetitions = 3;
  double tol = 1e-5;
  int max_refine = 10;
  std::string out;
};

int cmd_bench(BenchArgs a, const Flags& flags) {
  if (a.presets.empty()) a.presets = preset_names();
  if (a.num_seeds > 0) {
    a.seeds.clear();
    for (int s = 1; s <= a.num_seeds; ++s) a.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  for (const auto& p : a.presets)
    for (const auto& s : a.scales) instance_preset(p, s);
  BenchOptions opts;
  opts.refine = {a.tol, a.max_refine};
  opts.repetitions = a.repetitions;
  const BenchReport report = run_bench(a.presets, a.scales, a.seeds, opts);
  const json j = to_json(report);
  if (!a.out.empty()) {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw IoError("cannot write " + a.out);
    f << j.dump(2) << '\n';
  }
  for (const auto& w : j["warnings"]) std::cerr << "kktbt: warning: " << w.get<std::string>() << '\n';
  if (flags.json) {
    print_json(j);
  } else {
    std::cout << format_table(report);
    const json& t = j["totals"];
    std::cout << "totals: " << t["instances"] << " instances, factor nnz structured " << t["structured_factor_nnz"]
              << " vs baseline " << t["baseline_factor_nnz"] << ", factor flops structured "
              << t["structured_factor_flops"] << " vs baseline " << t["baseline_factor_flops"] << ", speedup "
              << t["timing"]["speedup"].get<double>() << '\n';
  }
  bool all_converged = true;
  for (const auto& r : report.rows) all_converged = all_converged && r.structured_converged;
  return all_converged ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured Schur-complement / block-triangular KKT solver"};
  app.require_subcommand(1);
  Flags flags;
  app.add_flag("--json", flags.json, "Machine-readable output");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic KKT instance directory");
  g->add_option("--preset", gen.preset, "mnist-like | scopf-like | lsv-like | decoupled")->capture_default_str();
  g->add_option("--scale", gen.scale, "tiny | small | medium")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_flag("--json", flags.json);

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Solve an instance directory");
  s->add_option("instance", sol.instance, "Instance directory")->required();
  s->add_option("--method", sol.method)->check(CLI::IsMember({"schur", "baseline"}))->capture_default_str();
  s->add_option("--tol", sol.tol, "Max-norm residual tolerance")->capture_default_str();
  s->add_option("--max-refine", sol.max_refine, "Refinement iteration cap")->capture_default_str();
  s->add_option("--out", sol.out, "Solution file (one value per line)");
  s->add_flag("--json", flags.json);

  AnalyzeArgs an;
  auto* z = app.add_subcommand("analyze", "Structural report for a Matrix Market file");
  z->add_option("file", an.file, "Matrix Market file");
  z->add_option("--fixture", an.fixture, "Use the partitioned fill fixture with this block size instead");
  z->add_option("--fixture-density", an.fixture_density, "Density of the present fixture blocks")
      ->capture_default_str();
  z->add_option("--fixture-seed", an.fixture_seed)->capture_default_str();
  z->add_option("--pivot", an.pivot, "Predict fill of a 1x1 pivot");
  z->add_option("--pivot2", an.pivot2, "Predict fill of a 2x2 pivot p,q")->delimiter(',');
  z->add_option("--blocks", an.blocks, "Diagonal block boundaries b0,b1,...,dim for fill classification")
      ->delimiter(',');
  z->add_flag("--json", flags.json);

  BenchArgs be;
  auto* b = app.add_subcommand("bench", "Compare the structured solver with the sparse baseline");
  b->add_option("--preset", be.presets, "Presets (default: all)")->delimiter(',');
  b->add_option("--scale", be.scales, "Scales")->delimiter(',')->capture_default_str();
  b->add_option("--seed", be.seeds, "Seeds")->delimiter(',')->capture_default_str();
  b->add_option("--seeds", be.num_seeds, "Use seeds 1..N instead of --seed");
  b->add_option("--repetitions", be.repetitions, "Timed repetitions per instance")->capture_default_str();
  b->add_option("--tol", be.tol)->capture_default_str();
  b->add_option("--max-refine", be.max_refine)->capture_default_str();
  b->add_option("--out", be.out, "Also write the JSON report here");
  b->add_flag("--json", flags.json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParameter;
  }

  try {
    if (*g) return cmd_generate(gen, flags);
    if (*s) return cmd_solve(sol, flags);
    if (*z) return cmd_analyze(an, flags);
    if (*b) return cmd_bench(be, flags);
  } catch (const StructuralError& e) {
    return report_error(flags, "structural", e.what(), kStructural);
  } catch (const NumericError& e) {
    return report_error(flags, "numeric", e.what(), kNumeric);
  } catch (const IoError& e) {
    return report_error(flags, "io", e.what(), kIo);
  } catch (const ParameterError& e) {
    return report_error(flags, "parameter", e.what(), kParameter);
  } catch (const DimensionError& e) {
    return report_error(flags, "parameter", e.what(), kParameter);
  } catch (const fs::filesystem_error& e) {
    return report_error(flags, "io", e.what(), kIo);
  }
  return kParameter;
}
