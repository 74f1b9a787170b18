#pragma once

// Finite-dimensional C*-algebras: direct sums of full matrix algebras
// M_{d_1} (+) ... (+) M_{d_r}, their elements, and states on them.
//
// Vectorization convention (used by every superoperator in the library):
// each block is column-stacked, blocks are concatenated in declaration order.
// Entry (i, j) of block k sits at index offset(k) + j * d_k + i.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "cdlab/error.hpp"

namespace cdlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr std::size_t kDefaultElementCap = 4096;

class Algebra {
 public:
  explicit Algebra(std::vector<int> blocks,
                   std::size_t element_cap = kDefaultElementCap);

  /// The full matrix algebra M_d.
  static Algebra full(int d) { return Algebra({d}); }

  const std::vector<int>& blocks() const noexcept { return blocks_; }
  int block_count() const noexcept { return static_cast<int>(blocks_.size()); }
  int block_dim(int k) const { return blocks_.at(static_cast<std::size_t>(k)); }
  /// D = sum of block dimensions.
  int embedding_dim() const noexcept { return embedding_dim_; }
  /// Sum of squared block dimensions; the length of a vectorized element.
  int element_dim() const noexcept { return element_dim_; }
  int block_offset(int k) const { return offsets_.at(static_cast<std::size_t>(k)); }
  std::size_t element_cap() const noexcept { return element_cap_; }
  bool is_single_block() const noexcept { return blocks_.size() == 1; }

  /// A (x) M_n, realized with blocks n * d_k. Throws CapExceeded.
  Algebra amplified(int n) const;

  friend bool operator==(const Algebra& a, const Algebra& b) {
    return a.blocks_ == b.blocks_;
  }

 private:
  std::vector<int> blocks_;
  std::vector<int> offsets_;
  int embedding_dim_ = 0;
  int element_dim_ = 0;
  std::size_t element_cap_;
};

class AlgebraElement {
 public:
  AlgebraElement(Algebra algebra, std::vector<Matrix> blocks);

  /// Element of M_d built from a single square matrix.
  static AlgebraElement from_matrix(const Matrix& m);
  static AlgebraElement zero(const Algebra& algebra);
  static AlgebraElement identity(const Algebra& algebra);
  static AlgebraElement from_vector(const Algebra& algebra, const Vector& v);
  /// The k-th matrix unit of the vectorization basis.
  static AlgebraElement basis(const Algebra& algebra, int index);

  const Algebra& algebra() const noexcept { return algebra_; }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  const Matrix& block(int k) const { return blocks_.at(static_cast<std::size_t>(k)); }

  Vector vectorize() const;
  AlgebraElement adjoint() const;

  AlgebraElement& operator+=(const AlgebraElement& other);
  AlgebraElement& operator-=(const AlgebraElement& other);
  AlgebraElement& operator*=(Complex s);

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator*(AlgebraElement a, Complex s) { return a *= s; }
  friend AlgebraElement operator*(Complex s, AlgebraElement a) { return a *= s; }
  friend AlgebraElement operator-(AlgebraElement a) { return a *= Complex(-1.0); }
  /// Algebra product, blockwise.
  friend AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b);

  /// Exact blockwise equality.
  friend bool operator==(const AlgebraElement& a, const AlgebraElement& b);

 private:
  Algebra algebra_;
  std::vector<Matrix> blocks_;
};

/// Largest singular value over all blocks.
double operator_norm(const AlgebraElement& x);

/// Norm of x - y; throws on algebra mismatch.
double distance(const AlgebraElement& x, const AlgebraElement& y);

/// Default scale-aware positivity tolerance 1e-9 * D * ||x||.
double default_positivity_tol(const AlgebraElement& x);

struct PositivityVerdict {
  bool positive = true;
  double hermiticity_defect = 0.0;
  double min_eigenvalue = 0.0;
  // Witness: block and eigenvector attaining the minimum eigenvalue.
  int block = 0;
  Vector eigenvector;
};

PositivityVerdict is_positive(const AlgebraElement& x, double tol);

class State {
 public:
  State(Algebra algebra, std::vector<Matrix> densities, std::vector<double> weights,
        double tol = 1e-10);

  /// x -> tr(x) / D.
  static State normalized_trace(const Algebra& algebra);
  /// Vector state of a unit vector in one block.
  static State pure(const Algebra& algebra, int block, const Vector& psi);

  const Algebra& algebra() const noexcept { return algebra_; }
  const std::vector<Matrix>& densities() const noexcept { return densities_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  Complex operator()(const AlgebraElement& x) const;

 private:
  Algebra algebra_;
  std::vector<Matrix> densities_;
  std::vector<double> weights_;
};

Complex evaluate_state(const State& omega, const AlgebraElement& x);

// ---------------------------------------------------------------------------
// Seeded sampling. General elements have i.i.d. complex Gaussian entries
// (re + i im) / sqrt(2) with re, im ~ N(0, 1); hermitian ones are (y + y*) / 2;
// positive ones y* y; states use y* y / tr per block and weights from |g|^2.

enum class SampleKind { General, Hermitian, Positive };

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double normal();
  double uniform();
  Complex complex_normal();
  Matrix gaussian(int rows, int cols);
  Matrix hermitian(int d);
  Vector unit_vector(int d);

  AlgebraElement element(const Algebra& algebra, SampleKind kind);
  State state(const Algebra& algebra);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

AlgebraElement random_element(const Algebra& algebra, std::uint64_t seed,
                              SampleKind kind = SampleKind::General);
State random_state(const Algebra& algebra, std::uint64_t seed);

// Pauli matrices on C^2.
Matrix sigma_x();
Matrix sigma_y();
Matrix sigma_z();

}  // namespace cdlab
