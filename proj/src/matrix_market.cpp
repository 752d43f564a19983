#include "kktbt/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace kktbt::mm {
namespace {

std::string lower_case(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_entries(std::ostream& out, const SparseMatrix& m, const char* symmetry) {
  out << "%%MatrixMarket matrix coordinate real " << symmetry << '\n';
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_value(it.value()) << '\n';
  if (!out) throw IoError("failed writing Matrix Market stream");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  return f;
}

}  // namespace

Loaded read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty Matrix Market stream");
  std::istringstream header(lower_case(line));
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix" || format != "coordinate")
    throw IoError("unsupported Matrix Market header: " + line);
  if (field != "real" && field != "integer") throw IoError("unsupported Matrix Market field: " + field);
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") throw IoError("unsupported Matrix Market symmetry: " + symmetry);

  while (std::getline(in, line))
    if (!line.empty() && line[0] != '%') break;
  long long rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
      throw IoError("bad Matrix Market size line: " + line);
  }
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  for (long long k = 0; k < nnz; ++k) {
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw IoError("truncated Matrix Market entry list");
    if (i < 1 || i > rows || j < 1 || j > cols) throw IoError("Matrix Market index out of range");
    if (symmetric && i < j) throw IoError("symmetric Matrix Market file must store the lower triangle");
    entries.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
  }
  SparseMatrix m = to_compressed(rows, cols, entries);
  if (symmetric) return SymmetricSparse(std::move(m));
  return m;
}

Loaded read(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  return read(f);
}

SparseMatrix read_general(const std::filesystem::path& path) {
  auto loaded = read(path);
  if (auto* g = std::get_if<SparseMatrix>(&loaded)) return std::move(*g);
  throw IoError(path.string() + ": expected a general matrix");
}

SymmetricSparse read_symmetric(const std::filesystem::path& path) {
  auto loaded = read(path);
  if (auto* s = std::get_if<SymmetricSparse>(&loaded)) return std::move(*s);
  throw IoError(path.string() + ": expected a symmetric matrix");
}

SparseMatrix read_as_full(const std::filesystem::path& path) {
  auto loaded = read(path);
  if (auto* s = std::get_if<SymmetricSparse>(&loaded)) return s->full();
  return std::get<SparseMatrix>(std::move(loaded));
}

void write(std::ostream& out, const SparseMatrix& m) { write_entries(out, m, "general"); }
void write(std::ostream& out, const SymmetricSparse& m) { write_entries(out, m.lower(), "symmetric"); }

void write(const std::filesystem::path& path, const SparseMatrix& m) {
  auto f = open_out(path);
  write(f, m);
}

void write(const std::filesystem::path& path, const SymmetricSparse& m) {
  auto f = open_out(path);
  write(f, m);
}

}  // namespace kktbt::mm
