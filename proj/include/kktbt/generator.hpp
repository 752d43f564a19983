#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kktbt/common.hpp"
#include "kktbt/network.hpp"
#include "kktbt/sparse.hpp"
#include "kktbt/structure.hpp"

namespace kktbt {

/// Shape of the optimization problem wrapped around a network.
struct KktShape {
  /// x variables; the first n_0 are the network inputs.
  Index num_x = 0;
  /// Equality constraints f(x, y_L) = 0.
  Index num_cons = 0;
  /// Fraction of constraints that involve network outputs (at least one when
  /// positive). Zero decouples the network from the rest of the problem
  /// entirely (B = 0).
  double link_density = 0.1;
  /// Off-diagonal density of W_xx.
  double hessian_density = 0.02;
  /// Expected off-diagonal entries per row of W_yy.
  double pivot_hessian_per_row = 1.0;
  /// Expected entries per row of grad_x f (at least one is always kept).
  double constraint_per_row = 3.0;
  /// Make W_xx and W_yy diagonally dominant with positive diagonal.
  bool convex = false;
};

/// KKT system
///
///   M = [A  B^T]   A = [W_xx  grad_x f^T]   C = [W_yy  J^T]
///       [B  C  ]       [grad_x f   0    ]       [J     0  ]
///
/// ordered (x, lambda_f, y, lambda_g) with y = (z_1, y_1, ..., z_L, y_L).
struct KKTSystem {
  SymmetricSparse A;
  SparseMatrix B;
  SymmetricSparse W_yy;
  SparseMatrix J;
  BlockStructure j_structure;
  Index num_x = 0;
  Index num_cons = 0;
  Index n_y = 0;
  Vector rhs;
  Vector x_true;

  // Provenance.
  std::string preset;
  std::string scale;
  std::uint64_t seed = 0;
  std::vector<Index> widths;
  std::vector<Activation> activations;
  double link_density = 0.0;
  /// Point at which J was evaluated.
  Vector nn_input;

  Index n_A() const noexcept { return num_x + num_cons; }
  Index n_C() const noexcept { return 2 * n_y; }
  Index dim() const noexcept { return n_A() + n_C(); }
  /// Primal variables and equality constraints: the target inertia is (n, m, 0).
  Index n() const noexcept { return num_x + n_y; }
  Index m() const noexcept { return num_cons + n_y; }
  Index layers() const noexcept { return static_cast<Index>(activations.size()); }

  SparseMatrix assemble() const;
  SymmetricSparse assemble_symmetric() const;
  SparseMatrix pivot_matrix() const;
};

/// Builds the KKT system around `net`. Throws ParameterError on infeasible
/// shapes (num_x < n_0, num_cons > num_x, densities outside [0, 1]).
KKTSystem generate_kkt(const NeuralNetSpec& net, const KktShape& shape, std::uint64_t seed);

struct InstanceParams {
  std::string preset;
  std::string scale;
  std::vector<Index> widths;
  Activation hidden = Activation::Tanh;
  Activation output = Activation::Linear;
  KktShape shape;
};

const std::vector<std::string>& preset_names();
const std::vector<std::string>& scale_names();

/// mnist-like, scopf-like, lsv-like or decoupled at tiny, small or medium
/// scale. Throws ParameterError on unknown names.
InstanceParams instance_preset(std::string_view name, std::string_view scale);

/// Network and KKT system from one seed.
KKTSystem generate_instance(const InstanceParams& p, std::uint64_t seed);

/// Largest dimension any preset may produce.
inline constexpr Index kMaxPresetDim = 2000;

}  // namespace kktbt
