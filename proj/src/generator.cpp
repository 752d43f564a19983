#include "kktbt/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kktbt/random.hpp"
#include "kktbt/schur.hpp"

namespace kktbt {

SparseMatrix KKTSystem::assemble() const { return assemble_kkt(A, B, W_yy, J); }

SymmetricSparse KKTSystem::assemble_symmetric() const { return SymmetricSparse::from_full(assemble()); }

SparseMatrix KKTSystem::pivot_matrix() const { return assemble_pivot_matrix(W_yy, J); }

namespace {

// Signed magnitude in [0.5, 1] so that no sampled entry is negligibly small.
double signed_entry(Rng& rng) {
  const double v = rng.uniform(0.5, 1.0);
  return rng.bernoulli(0.5) ? v : -v;
}

// Random symmetric off-diagonal pattern (lower triangle) on `n` indices with
// per-pair probability `p`, values uniform in [-1, 1].
std::vector<Triplet> random_symmetric_offdiag(Rng& rng, Index n, double p, Index offset,
                                              std::vector<double>& row_abs) {
  std::vector<Triplet> t;
  if (p <= 0.0) return t;
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i)
      if (rng.bernoulli(p)) {
        const double v = rng.uniform(-1.0, 1.0);
        t.emplace_back(static_cast<int>(offset + i), static_cast<int>(offset + j), v);
        row_abs[static_cast<std::size_t>(i)] += std::abs(v);
        row_abs[static_cast<std::size_t>(j)] += std::abs(v);
      }
  return t;
}

void check_shape(const NeuralNetSpec& net, const KktShape& s) {
  net.validate();
  if (s.num_x < net.input_width()) throw ParameterError("num_x must cover the network inputs");
  if (s.num_cons < 0) throw ParameterError("num_cons must be nonnegative");
  if (s.num_cons > s.num_x) throw ParameterError("grad_x f cannot have full row rank with num_cons > num_x");
  if (!(s.link_density >= 0.0 && s.link_density <= 1.0)) throw ParameterError("link_density must lie in [0, 1]");
  if (!(s.hessian_density >= 0.0 && s.hessian_density <= 1.0))
    throw ParameterError("hessian_density must lie in [0, 1]");
  if (!(s.pivot_hessian_per_row >= 0.0) || !(s.constraint_per_row >= 0.0))
    throw ParameterError("per-row densities must be nonnegative");
}

}  // namespace

KKTSystem generate_kkt(const NeuralNetSpec& net, const KktShape& shape, std::uint64_t seed) {
  check_shape(net, shape);
  Rng rng(seed);
  KKTSystem k;
  k.num_x = shape.num_x;
  k.num_cons = shape.num_cons;
  k.n_y = net.n_y();
  k.seed = seed;
  k.widths = net.widths;
  k.activations = net.activations;
  k.link_density = shape.link_density;
  const Index nx = k.num_x, mf = k.num_cons, ny = k.n_y, n0 = net.input_width();

  // Network evaluation point and Jacobian.
  k.nn_input.resize(n0);
  for (Index i = 0; i < n0; ++i) k.nn_input[i] = rng.uniform(-1.0, 1.0);
  const auto layers = forward_pass(net, k.nn_input);
  NnJacobian jac = nn_jacobian(net, k.nn_input);
  k.J = std::move(jac.J);
  k.j_structure = std::move(jac.structure);

  // A = [W_xx, grad_x f^T; grad_x f, 0].
  std::vector<Triplet> a;
  {
    std::vector<double> row_abs(static_cast<std::size_t>(nx), 0.0);
    a = random_symmetric_offdiag(rng, nx, shape.hessian_density, 0, row_abs);
    for (Index i = 0; i < nx; ++i) {
      const double barrier = rng.log_uniform(-2.0, 2.0);
      const double curvature = rng.uniform(-1.0, 1.0);
      const double d = shape.convex ? barrier + row_abs[static_cast<std::size_t>(i)] + std::abs(curvature)
                                    : barrier + curvature;
      a.emplace_back(static_cast<int>(i), static_cast<int>(i), d);
    }
  }
  if (mf > 0) {
    const double p = std::min(1.0, shape.constraint_per_row / static_cast<double>(nx));
    bool full_rank = false;
    std::vector<Triplet> g;
    for (int attempt = 0; attempt < 100 && !full_rank; ++attempt) {
      g.clear();
      for (Index c = 0; c < mf; ++c) {
        bool any = false;
        for (Index j = 0; j < nx; ++j)
          if (rng.bernoulli(p)) {
            g.emplace_back(static_cast<int>(c), static_cast<int>(j), signed_entry(rng));
            any = true;
          }
        if (!any)
          g.emplace_back(static_cast<int>(c), static_cast<int>(rng.below(static_cast<std::uint64_t>(nx))),
                         signed_entry(rng));
      }
      full_rank = maximum_matching(to_compressed(mf, nx, g)).size == mf;
    }
    if (!full_rank) {
      // Pair each unmatched row with a distinct unmatched column.
      const Matching mt = maximum_matching(to_compressed(mf, nx, g));
      Index col = 0;
      for (Index c = 0; c < mf; ++c) {
        if (mt.col_of_row[static_cast<std::size_t>(c)] >= 0) continue;
        while (mt.row_of_col[static_cast<std::size_t>(col)] >= 0) ++col;
        g.emplace_back(static_cast<int>(c), static_cast<int>(col++), signed_entry(rng));
      }
    }
    for (const auto& e : g) a.emplace_back(static_cast<int>(nx + e.row()), e.col(), e.value());
  }
  k.A = SymmetricSparse(to_compressed(nx + mf, nx + mf, a));

  // W_yy: barrier diagonal plus constraint curvature on the z variables.
  {
    std::vector<double> row_abs(static_cast<std::size_t>(ny), 0.0);
    const double p = ny > 1 ? std::min(1.0, shape.pivot_hessian_per_row / static_cast<double>(ny - 1)) : 0.0;
    std::vector<Triplet> w = random_symmetric_offdiag(rng, ny, p, 0, row_abs);
    std::vector<double> curvature(static_cast<std::size_t>(ny), 0.0);
    for (Index l = 1; l <= net.layers(); ++l) {
      const auto& z = layers[static_cast<std::size_t>(l - 1)].z;
      const Activation act = net.activations[static_cast<std::size_t>(l - 1)];
      for (Index i = 0; i < z.size(); ++i)
        curvature[static_cast<std::size_t>(net.z_offset(l) + i)] = rng.uniform(-1.0, 1.0) * activate_d2(act, z[i]);
    }
    for (Index i = 0; i < ny; ++i) {
      const double barrier = rng.log_uniform(-2.0, 2.0);
      const double c = curvature[static_cast<std::size_t>(i)];
      const double d =
          shape.convex ? barrier + row_abs[static_cast<std::size_t>(i)] + std::abs(c) : barrier + c;
      w.emplace_back(static_cast<int>(i), static_cast<int>(i), d);
    }
    k.W_yy = SymmetricSparse(to_compressed(ny, ny, w));
  }

  // B: rows (y, lambda_g), columns (x, lambda_f).
  {
    std::vector<Triplet> b;
    if (shape.link_density > 0.0) {
      const DenseMatrix& W1 = net.weights.front();
      const Index z1 = net.z_offset(1);
      for (Index j = 0; j < n0; ++j)
        for (Index i = 0; i < W1.rows(); ++i)
          b.emplace_back(static_cast<int>(ny + z1 + i), static_cast<int>(j), -W1(i, j));
      // A fraction link_density of the constraints involve network outputs,
      // each linked constraint a random nonempty subset of them.
      const Index yl = net.y_offset(net.layers()), no = net.output_width();
      std::vector<Index> linked;
      for (Index c = 0; c < mf; ++c)
        if (rng.bernoulli(shape.link_density)) linked.push_back(c);
      if (linked.empty() && mf > 0) linked.push_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(mf))));
      for (const Index c : linked) {
        const Index first = static_cast<Index>(rng.below(static_cast<std::uint64_t>(no)));
        for (Index o = 0; o < no; ++o)
          if (o == first || rng.bernoulli(0.5))
            b.emplace_back(static_cast<int>(yl + o), static_cast<int>(nx + c), signed_entry(rng));
      }
    }
    k.B = to_compressed(2 * ny, nx + mf, b);
  }

  k.x_true.resize(k.dim());
  for (Index i = 0; i < k.dim(); ++i) k.x_true[i] = rng.uniform(-1.0, 1.0);
  k.rhs = k.assemble() * k.x_true;
  return k;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"mnist-like", "scopf-like", "lsv-like", "decoupled"};
  return names;
}

const std::vector<std::string>& scale_names() {
  static const std::vector<std::string> names{"tiny", "small", "medium"};
  return names;
}

InstanceParams instance_preset(std::string_view name, std::string_view scale) {
  struct Row {
    std::vector<Index> widths;
    Index num_x;
    Index num_cons;
  };
  using Table = std::map<std::string, Row, std::less<>>;
  // mnist-like: wide input, narrow output, tanh. scopf-like: pivot matrix
  // dominates. lsv-like: sigmoid, A block larger than the pivot matrix.
  static const std::map<std::string, Table, std::less<>> table{
      {"mnist-like",
       {{"tiny", {{12, 10, 10, 4}, 16, 3}},
        {"small", {{16, 16, 16, 10}, 20, 4}},
        {"medium", {{48, 32, 32, 32, 32, 10}, 60, 8}}}},
      {"scopf-like",
       {{"tiny", {{8, 16, 16, 6}, 20, 12}},
        {"small", {{16, 32, 32, 32, 12}, 40, 24}},
        {"medium", {{24, 48, 48, 48, 48, 48, 16}, 60, 36}}}},
      {"lsv-like",
       {{"tiny", {{6, 6, 6, 3}, 60, 30}},
        {"small", {{12, 12, 12, 6}, 200, 100}},
        {"medium", {{20, 24, 24, 10}, 600, 300}}}},
      {"decoupled",
       {{"tiny", {{6, 8, 8, 4}, 10, 4}},
        {"small", {{12, 16, 16, 8}, 24, 8}},
        {"medium", {{24, 32, 32, 32, 16}, 48, 16}}}},
  };
  const auto p = table.find(name);
  if (p == table.end()) throw ParameterError("unknown preset '" + std::string(name) + "'");
  const auto s = p->second.find(scale);
  if (s == p->second.end()) throw ParameterError("unknown scale '" + std::string(scale) + "'");

  InstanceParams out;
  out.preset = std::string(name);
  out.scale = std::string(scale);
  out.widths = s->second.widths;
  out.hidden = name == "lsv-like" ? Activation::Sigmoid : Activation::Tanh;
  out.output = Activation::Linear;
  out.shape.num_x = s->second.num_x;
  out.shape.num_cons = s->second.num_cons;
  out.shape.link_density = name == "decoupled" ? 0.0 : 0.1;
  out.shape.hessian_density = std::min(1.0, 2.0 / static_cast<double>(s->second.num_x));

  Index n_y = 0;
  for (std::size_t l = 1; l < out.widths.size(); ++l) n_y += 2 * out.widths[l];
  if (out.shape.num_x + out.shape.num_cons + 2 * n_y > kMaxPresetDim)
    throw ParameterError("preset exceeds the dimension bound");
  return out;
}

KKTSystem generate_instance(const InstanceParams& p, std::uint64_t seed) {
  const NeuralNetSpec net = make_random_network(p.widths, p.hidden, p.output, derive_seed(seed, 1));
  KKTSystem k = generate_kkt(net, p.shape, derive_seed(seed, 2));
  k.preset = p.preset;
  k.scale = p.scale;
  k.seed = seed;
  return k;
}

}  // namespace kktbt
