#include "kktbt/instance_io.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include <json.hpp>

#include "kktbt/matrix_market.hpp"

namespace kktbt {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kFormat = "kktbt-instance";
constexpr int kVersion = 1;

json vector_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from(const json& a, Index expected, const char* name) {
  if (!a.is_array() || static_cast<Index>(a.size()) != expected)
    throw IoError(std::string("meta.json: '") + name + "' has the wrong length");
  Vector v(expected);
  for (Index i = 0; i < expected; ++i) v[i] = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

bool same_entries(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
  const auto ta = to_triplets(a), tb = to_triplets(b);
  return std::equal(ta.begin(), ta.end(), tb.begin(), [](const Triplet& x, const Triplet& y) {
    return x.row() == y.row() && x.col() == y.col() && x.value() == y.value();
  });
}

}  // namespace

void write_instance(const fs::path& dir, const KKTSystem& k) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create instance directory " + dir.string());

  mm::write(dir / "kkt.mtx", k.assemble_symmetric());
  mm::write(dir / "A.mtx", k.A);
  mm::write(dir / "B.mtx", k.B);
  mm::write(dir / "Wyy.mtx", k.W_yy);
  mm::write(dir / "J.mtx", k.J);

  json meta;
  meta["format"] = kFormat;
  meta["version"] = kVersion;
  meta["preset"] = k.preset;
  meta["scale"] = k.scale;
  meta["seed"] = k.seed;
  meta["link_density"] = k.link_density;
  json acts = json::array();
  for (const auto a : k.activations) acts.push_back(to_string(a));
  meta["network"] = {{"widths", k.widths}, {"activations", acts}, {"input", vector_json(k.nn_input)}};
  meta["dims"] = {{"num_x", k.num_x}, {"num_cons", k.num_cons}, {"n_y", k.n_y},  {"n_A", k.n_A()},
                  {"n_C", k.n_C()},   {"n", k.n()},               {"m", k.m()},   {"dim", k.dim()}};
  json tags = json::array();
  for (const auto& [key, storage] : k.j_structure.tags())
    tags.push_back({{"row_block", key.first}, {"col_block", key.second}, {"storage", to_string(storage)}});
  meta["j_structure"] = {{"boundaries", k.j_structure.boundaries()}, {"tags", tags}};
  meta["rhs"] = vector_json(k.rhs);
  meta["x_true"] = vector_json(k.x_true);

  std::ofstream out(dir / "meta.json", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
  out << meta.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + (dir / "meta.json").string());
}

KKTSystem read_instance(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("instance directory " + dir.string() + " does not exist");
  std::ifstream in(dir / "meta.json", std::ios::binary);
  if (!in) throw IoError("cannot open " + (dir / "meta.json").string());
  json meta;
  try {
    in >> meta;
  } catch (const json::exception& e) {
    throw IoError(std::string("meta.json: ") + e.what());
  }

  KKTSystem k;
  try {
    if (meta.at("format").get<std::string>() != kFormat || meta.at("version").get<int>() != kVersion)
      throw IoError("meta.json: unsupported format or version");
    k.preset = meta.at("preset").get<std::string>();
    k.scale = meta.at("scale").get<std::string>();
    k.seed = meta.at("seed").get<std::uint64_t>();
    k.link_density = meta.at("link_density").get<double>();
    const json& net = meta.at("network");
    k.widths = net.at("widths").get<std::vector<Index>>();
    for (const auto& a : net.at("activations")) {
      const auto act = activation_from_string(a.get<std::string>());
      if (!act) throw IoError("meta.json: unknown activation");
      k.activations.push_back(*act);
    }
    const json& dims = meta.at("dims");
    k.num_x = dims.at("num_x").get<Index>();
    k.num_cons = dims.at("num_cons").get<Index>();
    k.n_y = dims.at("n_y").get<Index>();
    if (dims.at("dim").get<Index>() != k.dim() || dims.at("n_A").get<Index>() != k.n_A() ||
        dims.at("n_C").get<Index>() != k.n_C())
      throw IoError("meta.json: inconsistent dimensions");
    k.nn_input = vector_from(net.at("input"), k.widths.empty() ? 0 : k.widths.front(), "network.input");

    const json& js = meta.at("j_structure");
    k.j_structure = BlockStructure(js.at("boundaries").get<std::vector<Index>>());
    for (const auto& t : js.at("tags")) {
      const auto s = block_storage_from_string(t.at("storage").get<std::string>());
      if (!s) throw IoError("meta.json: unknown block storage tag");
      k.j_structure.set_tag(t.at("row_block").get<Index>(), t.at("col_block").get<Index>(), *s);
    }
    k.rhs = vector_from(meta.at("rhs"), k.dim(), "rhs");
    k.x_true = vector_from(meta.at("x_true"), k.dim(), "x_true");
  } catch (const json::exception& e) {
    throw IoError(std::string("meta.json: ") + e.what());
  } catch (const DimensionError& e) {
    throw IoError(std::string("meta.json: ") + e.what());
  }

  k.A = mm::read_symmetric(dir / "A.mtx");
  k.B = mm::read_general(dir / "B.mtx");
  k.W_yy = mm::read_symmetric(dir / "Wyy.mtx");
  k.J = mm::read_general(dir / "J.mtx");
  if (k.A.dim() != k.n_A() || k.B.rows() != k.n_C() || k.B.cols() != k.n_A() || k.W_yy.dim() != k.n_y ||
      k.J.rows() != k.n_y || k.J.cols() != k.n_y || k.j_structure.dim() != k.n_y)
    throw IoError("instance blocks disagree with meta.json dimensions");
  const SymmetricSparse kkt = mm::read_symmetric(dir / "kkt.mtx");
  if (!same_entries(kkt.lower(), k.assemble_symmetric().lower()))
    throw IoError("kkt.mtx disagrees with the block files");
  return k;
}

}  // namespace kktbt
