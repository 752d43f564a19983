#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace kktbt {

using Index = Eigen::Index;

template <typename Scalar>
using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using DenseMatrix = Dense<double>;
using Vector = Vec<double>;

// Error hierarchy. The CLI maps StructuralError -> 2, NumericError -> 3,
// IoError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class StructuralError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class SingularBlockError : public NumericError {
 public:
  SingularBlockError(Index block, const std::string& what)
      : NumericError("singular diagonal block " + std::to_string(block) + ": " + what),
        block_(block) {}
  Index block() const noexcept { return block_; }

 private:
  Index block_;
};

class BaselineBreakdown : public NumericError {
 public:
  using NumericError::NumericError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Counts of positive, negative and zero eigenvalues of a symmetric matrix.
struct Inertia {
  Index positive = 0;
  Index negative = 0;
  Index zero = 0;

  Index dim() const noexcept { return positive + negative + zero; }
  friend bool operator==(const Inertia&, const Inertia&) = default;
  friend Inertia operator+(Inertia a, const Inertia& b) {
    a.positive += b.positive;
    a.negative += b.negative;
    a.zero += b.zero;
    return a;
  }
  friend std::ostream& operator<<(std::ostream& os, const Inertia& in) {
    return os << '(' << in.positive << ',' << in.negative << ',' << in.zero << ')';
  }
};

// One multiply-add counts as 2 FLOPs, a division as 1.
struct FlopCounter {
  std::uint64_t flops = 0;
  void add(std::uint64_t n) noexcept { flops += n; }
};

inline void count_flops(FlopCounter* c, std::uint64_t n) noexcept {
  if (c) c->add(n);
}

}  // namespace kktbt
