#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "kktbt/common.hpp"
#include "kktbt/sparse.hpp"
#include "kktbt/structure.hpp"

namespace kktbt {

enum class Activation { Tanh, Sigmoid, Linear };

const char* to_string(Activation a) noexcept;
std::optional<Activation> activation_from_string(std::string_view s) noexcept;

double activate(Activation a, double z);
/// First derivative.
double activate_d1(Activation a, double z);
/// Second derivative.
double activate_d2(Activation a, double z);

/// Feed-forward network y_l = act_l(W_l y_{l-1} + b_l), l = 1..L, y_0 = x.
struct NeuralNetSpec {
  /// n_0 (input) .. n_L (output).
  std::vector<Index> widths;
  /// One per layer (L entries).
  std::vector<Activation> activations;
  /// W_l is widths[l] x widths[l-1].
  std::vector<DenseMatrix> weights;
  std::vector<Vector> biases;
  std::uint64_t seed = 0;

  Index layers() const noexcept { return static_cast<Index>(activations.size()); }
  Index input_width() const { return widths.front(); }
  Index output_width() const { return widths.back(); }
  /// Number of full-space variables (z_l, y_l for every layer).
  Index n_y() const;
  /// Offset of z_l (l = 1..L) in the (z_1, y_1, ..., z_L, y_L) ordering.
  Index z_offset(Index l) const;
  Index y_offset(Index l) const { return z_offset(l) + widths[static_cast<std::size_t>(l)]; }
  /// Throws ParameterError on inconsistent shapes.
  void validate() const;
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases uniform in
/// [-0.1, 0.1]. Hidden layers use `hidden`, the last layer `output`.
NeuralNetSpec make_random_network(const std::vector<Index>& widths, Activation hidden, Activation output,
                                  std::uint64_t seed);

struct LayerValues {
  Vector z;
  Vector y;
};

/// z_l = W_l y_{l-1} + b_l, y_l = act_l(z_l) for l = 1..L.
std::vector<LayerValues> forward_pass(const NeuralNetSpec& net, const Vector& x);

/// Stacks per-layer values in the (z_1, y_1, ..., z_L, y_L) ordering.
Vector stack_layers(const NeuralNetSpec& net, const std::vector<LayerValues>& layers);

/// Full-space residual g(v; x) with rows (z_1-def, y_1-def, ...):
///   z_l - W_l y_{l-1} - b_l  and  y_l - act_l(z_l).
Vector full_space_residual(const NeuralNetSpec& net, const Vector& x, const Vector& v);

struct NnJacobian {
  SparseMatrix J;
  BlockStructure structure;
};

/// Jacobian of full_space_residual with respect to v, evaluated at the
/// forward-pass point of x. Blocks: one per z_l and one per y_l (identity);
/// below the diagonal -Sigma_l (tagged diagonal) and -W_l, l >= 2 (tagged
/// dense). W_1 multiplies the inputs and is not part of J.
NnJacobian nn_jacobian(const NeuralNetSpec& net, const Vector& x);

}  // namespace kktbt
