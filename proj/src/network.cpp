#include "kktbt/network.hpp"

#include <cmath>
#include <string>

#include "kktbt/random.hpp"

namespace kktbt {

const char* to_string(Activation a) noexcept {
  switch (a) {
    case Activation::Tanh:
      return "tanh";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Linear:
      return "linear";
  }
  return "linear";
}

std::optional<Activation> activation_from_string(std::string_view s) noexcept {
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "linear") return Activation::Linear;
  return std::nullopt;
}

namespace {
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Tanh:
      return std::tanh(z);
    case Activation::Sigmoid:
      return sigmoid(z);
    case Activation::Linear:
      return z;
  }
  return z;
}

double activate_d1(Activation a, double z) {
  switch (a) {
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::Sigmoid: {
      const double s = sigmoid(z);
      return s * (1.0 - s);
    }
    case Activation::Linear:
      return 1.0;
  }
  return 1.0;
}

double activate_d2(Activation a, double z) {
  switch (a) {
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return -2.0 * t * (1.0 - t * t);
    }
    case Activation::Sigmoid: {
      const double s = sigmoid(z);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case Activation::Linear:
      return 0.0;
  }
  return 0.0;
}

Index NeuralNetSpec::n_y() const {
  Index n = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) n += 2 * widths[l];
  return n;
}

Index NeuralNetSpec::z_offset(Index l) const {
  if (l < 1 || l > layers()) throw DimensionError("layer index out of range");
  Index off = 0;
  for (Index k = 1; k < l; ++k) off += 2 * widths[static_cast<std::size_t>(k)];
  return off;
}

void NeuralNetSpec::validate() const {
  if (widths.size() < 2) throw ParameterError("network needs at least one layer");
  const std::size_t L = widths.size() - 1;
  if (activations.size() != L || weights.size() != L || biases.size() != L)
    throw ParameterError("network needs one activation, weight and bias per layer");
  for (const Index w : widths)
    if (w < 1) throw ParameterError("layer widths must be positive");
  for (std::size_t l = 0; l < L; ++l) {
    if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l])
      throw ParameterError("weight matrix " + std::to_string(l + 1) + " has the wrong shape");
    if (biases[l].size() != widths[l + 1])
      throw ParameterError("bias vector " + std::to_string(l + 1) + " has the wrong length");
  }
}

NeuralNetSpec make_random_network(const std::vector<Index>& widths, Activation hidden, Activation output,
                                  std::uint64_t seed) {
  if (widths.size() < 2) throw ParameterError("network needs at least one layer");
  NeuralNetSpec net;
  net.widths = widths;
  net.seed = seed;
  Rng rng(seed);
  const std::size_t L = widths.size() - 1;
  for (std::size_t l = 0; l < L; ++l) {
    if (widths[l] < 1 || widths[l + 1] < 1) throw ParameterError("layer widths must be positive");
    net.activations.push_back(l + 1 == L ? output : hidden);
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
    DenseMatrix W(widths[l + 1], widths[l]);
    for (Index j = 0; j < W.cols(); ++j)
      for (Index i = 0; i < W.rows(); ++i) W(i, j) = rng.uniform(-bound, bound);
    Vector b(widths[l + 1]);
    for (Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-0.1, 0.1);
    net.weights.push_back(std::move(W));
    net.biases.push_back(std::move(b));
  }
  return net;
}

std::vector<LayerValues> forward_pass(const NeuralNetSpec& net, const Vector& x) {
  net.validate();
  if (x.size() != net.input_width()) throw DimensionError("input length does not match network input width");
  std::vector<LayerValues> out;
  out.reserve(static_cast<std::size_t>(net.layers()));
  Vector prev = x;
  for (Index l = 0; l < net.layers(); ++l) {
    const auto ul = static_cast<std::size_t>(l);
    LayerValues v;
    v.z = net.weights[ul] * prev + net.biases[ul];
    v.y = v.z.unaryExpr([a = net.activations[ul]](double z) { return activate(a, z); });
    prev = v.y;
    out.push_back(std::move(v));
  }
  return out;
}

Vector stack_layers(const NeuralNetSpec& net, const std::vector<LayerValues>& layers) {
  Vector v(net.n_y());
  for (Index l = 1; l <= net.layers(); ++l) {
    const auto& lv = layers[static_cast<std::size_t>(l - 1)];
    v.segment(net.z_offset(l), lv.z.size()) = lv.z;
    v.segment(net.y_offset(l), lv.y.size()) = lv.y;
  }
  return v;
}

Vector full_space_residual(const NeuralNetSpec& net, const Vector& x, const Vector& v) {
  net.validate();
  if (x.size() != net.input_width()) throw DimensionError("input length does not match network input width");
  if (v.size() != net.n_y()) throw DimensionError("full-space vector has the wrong length");
  Vector g(v.size());
  Vector prev = x;
  for (Index l = 1; l <= net.layers(); ++l) {
    const auto ul = static_cast<std::size_t>(l - 1);
    const Index w = net.widths[static_cast<std::size_t>(l)];
    const auto z = v.segment(net.z_offset(l), w);
    const auto y = v.segment(net.y_offset(l), w);
    g.segment(net.z_offset(l), w) = z - net.weights[ul] * prev - net.biases[ul];
    g.segment(net.y_offset(l), w) = y - z.unaryExpr([a = net.activations[ul]](double t) { return activate(a, t); });
    prev = y;
  }
  return g;
}

NnJacobian nn_jacobian(const NeuralNetSpec& net, const Vector& x) {
  const auto layers = forward_pass(net, x);
  const Index n = net.n_y();
  std::vector<Triplet> t;
  std::vector<Index> boundaries{0};
  for (Index i = 0; i < n; ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
  for (Index l = 1; l <= net.layers(); ++l) {
    const auto ul = static_cast<std::size_t>(l - 1);
    const Index w = net.widths[static_cast<std::size_t>(l)];
    const Index zo = net.z_offset(l), yo = net.y_offset(l);
    boundaries.push_back(zo + w);
    boundaries.push_back(yo + w);
    const Vector& z = layers[ul].z;
    for (Index i = 0; i < w; ++i)
      t.emplace_back(static_cast<int>(yo + i), static_cast<int>(zo + i), -activate_d1(net.activations[ul], z[i]));
    if (l >= 2) {
      const DenseMatrix& W = net.weights[ul];
      const Index prev_y = net.y_offset(l - 1);
      for (Index j = 0; j < W.cols(); ++j)
        for (Index i = 0; i < W.rows(); ++i)
          t.emplace_back(static_cast<int>(zo + i), static_cast<int>(prev_y + j), -W(i, j));
    }
  }
  NnJacobian out{to_compressed(n, n, t), BlockStructure(std::move(boundaries))};
  for (Index l = 1; l <= net.layers(); ++l) {
    const Index zb = 2 * (l - 1), yb = zb + 1;
    out.structure.set_tag(yb, zb, BlockStorage::Diagonal);
    if (l >= 2) out.structure.set_tag(zb, zb - 1, BlockStorage::Dense);
  }
  return out;
}

}  // namespace kktbt
