#include "cdlab/algebra.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cdlab/linalg.hpp"

namespace cdlab {

// ---------------------------------------------------------------------------
// Algebra

Algebra::Algebra(std::vector<int> blocks, std::size_t element_cap)
    : blocks_(std::move(blocks)), element_cap_(element_cap) {
  if (blocks_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "algebra needs at least one block");
  }
  std::size_t elements = 0;
  for (int d : blocks_) {
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "block dimensions must be >= 1");
    offsets_.push_back(static_cast<int>(elements));
    elements += static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
    embedding_dim_ += d;
  }
  if (elements > element_cap_) {
    std::ostringstream os;
    os << "element dimension " << elements << " exceeds cap " << element_cap_;
    throw Error(ErrorCode::CapExceeded, os.str());
  }
  element_dim_ = static_cast<int>(elements);
}

Algebra Algebra::amplified(int n) const {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "amplification level must be >= 1");
  std::vector<int> blocks;
  blocks.reserve(blocks_.size());
  for (int d : blocks_) blocks.push_back(d * n);
  return Algebra(std::move(blocks), element_cap_);
}

// ---------------------------------------------------------------------------
// AlgebraElement

AlgebraElement::AlgebraElement(Algebra algebra, std::vector<Matrix> blocks)
    : algebra_(std::move(algebra)), blocks_(std::move(blocks)) {
  if (static_cast<int>(blocks_.size()) != algebra_.block_count()) {
    throw Error(ErrorCode::AlgebraMismatch, "block count does not match the algebra");
  }
  for (int k = 0; k < algebra_.block_count(); ++k) {
    const int d = algebra_.block_dim(k);
    if (blocks_[k].rows() != d || blocks_[k].cols() != d) {
      std::ostringstream os;
      os << "block " << k << " has shape " << blocks_[k].rows() << "x" << blocks_[k].cols()
         << ", expected " << d << "x" << d;
      throw Error(ErrorCode::AlgebraMismatch, os.str());
    }
  }
}

AlgebraElement AlgebraElement::from_matrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::InvalidArgument, "matrix must be square");
  return AlgebraElement(Algebra::full(static_cast<int>(m.rows())), {m});
}

AlgebraElement AlgebraElement::zero(const Algebra& algebra) {
  std::vector<Matrix> blocks;
  for (int d : algebra.blocks()) blocks.push_back(Matrix::Zero(d, d));
  return AlgebraElement(algebra, std::move(blocks));
}

AlgebraElement AlgebraElement::identity(const Algebra& algebra) {
  std::vector<Matrix> blocks;
  for (int d : algebra.blocks()) blocks.push_back(Matrix::Identity(d, d));
  return AlgebraElement(algebra, std::move(blocks));
}

AlgebraElement AlgebraElement::from_vector(const Algebra& algebra, const Vector& v) {
  if (v.size() != algebra.element_dim()) {
    throw Error(ErrorCode::AlgebraMismatch, "vector length does not match the algebra");
  }
  std::vector<Matrix> blocks;
  for (int k = 0; k < algebra.block_count(); ++k) {
    const int d = algebra.block_dim(k);
    blocks.push_back(linalg::unvec(v.segment(algebra.block_offset(k), d * d), d, d));
  }
  return AlgebraElement(algebra, std::move(blocks));
}

AlgebraElement AlgebraElement::basis(const Algebra& algebra, int index) {
  if (index < 0 || index >= algebra.element_dim()) {
    throw Error(ErrorCode::InvalidArgument, "basis index out of range");
  }
  Vector v = Vector::Zero(algebra.element_dim());
  v(index) = 1.0;
  return from_vector(algebra, v);
}

Vector AlgebraElement::vectorize() const {
  Vector v(algebra_.element_dim());
  for (int k = 0; k < algebra_.block_count(); ++k) {
    const auto& b = blocks_[k];
    v.segment(algebra_.block_offset(k), b.size()) = linalg::vec(b);
  }
  return v;
}

AlgebraElement AlgebraElement::adjoint() const {
  std::vector<Matrix> blocks;
  blocks.reserve(blocks_.size());
  for (const auto& b : blocks_) blocks.push_back(b.adjoint());
  return AlgebraElement(algebra_, std::move(blocks));
}

namespace {
void require_same(const Algebra& a, const Algebra& b) {
  if (!(a == b)) throw Error(ErrorCode::AlgebraMismatch, "elements belong to different algebras");
}
}  // namespace

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& other) {
  require_same(algebra_, other.algebra_);
  for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] += other.blocks_[k];
  return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& other) {
  require_same(algebra_, other.algebra_);
  for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] -= other.blocks_[k];
  return *this;
}

AlgebraElement& AlgebraElement::operator*=(Complex s) {
  for (auto& b : blocks_) b *= s;
  return *this;
}

AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
  require_same(a.algebra_, b.algebra_);
  std::vector<Matrix> blocks;
  blocks.reserve(a.blocks_.size());
  for (std::size_t k = 0; k < a.blocks_.size(); ++k) blocks.push_back(a.blocks_[k] * b.blocks_[k]);
  return AlgebraElement(a.algebra_, std::move(blocks));
}

bool operator==(const AlgebraElement& a, const AlgebraElement& b) {
  if (!(a.algebra_ == b.algebra_)) return false;
  for (std::size_t k = 0; k < a.blocks_.size(); ++k) {
    if (a.blocks_[k] != b.blocks_[k]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Norms and positivity

double operator_norm(const AlgebraElement& x) {
  double norm = 0.0;
  for (const auto& b : x.blocks()) norm = std::max(norm, linalg::spectral_norm(b));
  return norm;
}

double distance(const AlgebraElement& x, const AlgebraElement& y) {
  return operator_norm(x - y);
}

double default_positivity_tol(const AlgebraElement& x) {
  return 1e-9 * x.algebra().embedding_dim() * std::max(operator_norm(x), 1.0);
}

PositivityVerdict is_positive(const AlgebraElement& x, double tol) {
  if (tol < 0.0) throw Error(ErrorCode::InvalidArgument, "tolerance must be >= 0");
  PositivityVerdict verdict;
  verdict.hermiticity_defect = operator_norm(x - x.adjoint());
  verdict.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int k = 0; k < x.algebra().block_count(); ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::hermitian_part(x.block(k)));
    const double lowest = eig.eigenvalues()(0);
    if (lowest < verdict.min_eigenvalue) {
      verdict.min_eigenvalue = lowest;
      verdict.block = k;
      verdict.eigenvector = eig.eigenvectors().col(0);
    }
  }
  verdict.positive = verdict.hermiticity_defect <= tol && verdict.min_eigenvalue >= -tol;
  return verdict;
}

// ---------------------------------------------------------------------------
// State

State::State(Algebra algebra, std::vector<Matrix> densities, std::vector<double> weights,
             double tol)
    : algebra_(std::move(algebra)), densities_(std::move(densities)), weights_(std::move(weights)) {
  const int r = algebra_.block_count();
  if (static_cast<int>(densities_.size()) != r || static_cast<int>(weights_.size()) != r) {
    throw Error(ErrorCode::AlgebraMismatch, "state needs one density and one weight per block");
  }
  double total = 0.0;
  for (int k = 0; k < r; ++k) {
    const int d = algebra_.block_dim(k);
    const Matrix& rho = densities_[k];
    if (rho.rows() != d || rho.cols() != d) {
      throw Error(ErrorCode::AlgebraMismatch, "density shape does not match its block");
    }
    if (weights_[k] < 0.0) throw Error(ErrorCode::InvalidArgument, "state weights must be >= 0");
    total += weights_[k];
    if ((rho - rho.adjoint()).norm() > tol) {
      throw Error(ErrorCode::NotHermitian, "density matrix is not hermitian");
    }
    if (std::abs(rho.trace() - Complex(1.0)) > tol) {
      throw Error(ErrorCode::InvalidArgument, "density matrix must have trace 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::hermitian_part(rho), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()(0) < -tol) {
      throw Error(ErrorCode::InvalidArgument, "density matrix has a negative eigenvalue");
    }
  }
  if (std::abs(total - 1.0) > tol) {
    throw Error(ErrorCode::InvalidArgument, "state weights must sum to 1");
  }
}

State State::normalized_trace(const Algebra& algebra) {
  std::vector<Matrix> densities;
  std::vector<double> weights;
  const double total = algebra.embedding_dim();
  for (int d : algebra.blocks()) {
    densities.push_back(Matrix::Identity(d, d) / static_cast<double>(d));
    weights.push_back(d / total);
  }
  return State(algebra, std::move(densities), std::move(weights));
}

State State::pure(const Algebra& algebra, int block, const Vector& psi) {
  if (block < 0 || block >= algebra.block_count()) {
    throw Error(ErrorCode::InvalidArgument, "block index out of range");
  }
  if (psi.size() != algebra.block_dim(block)) {
    throw Error(ErrorCode::AlgebraMismatch, "vector length does not match the block");
  }
  const Vector unit = psi.normalized();
  std::vector<Matrix> densities;
  std::vector<double> weights;
  for (int k = 0; k < algebra.block_count(); ++k) {
    const int d = algebra.block_dim(k);
    if (k == block) {
      densities.push_back(unit * unit.adjoint());
      weights.push_back(1.0);
    } else {
      densities.push_back(Matrix::Identity(d, d) / static_cast<double>(d));
      weights.push_back(0.0);
    }
  }
  return State(algebra, std::move(densities), std::move(weights));
}

Complex State::operator()(const AlgebraElement& x) const {
  if (!(x.algebra() == algebra_)) {
    throw Error(ErrorCode::AlgebraMismatch, "state and element belong to different algebras");
  }
  Complex value = 0.0;
  for (int k = 0; k < algebra_.block_count(); ++k) {
    if (weights_[k] == 0.0) continue;
    value += weights_[k] * (densities_[k] * x.block(k)).trace();
  }
  return value;
}

Complex evaluate_state(const State& omega, const AlgebraElement& x) { return omega(x); }

// ---------------------------------------------------------------------------
// Sampling

double Sampler::normal() { return normal_(engine_); }

double Sampler::uniform() { return uniform_(engine_); }

Complex Sampler::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Complex(re, im) / std::sqrt(2.0);
}

Matrix Sampler::gaussian(int rows, int cols) {
  Matrix m(rows, cols);
  // Fill in column-major order so the stream layout is fixed.
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = complex_normal();
  return m;
}

Matrix Sampler::hermitian(int d) {
  const Matrix y = gaussian(d, d);
  return (y + y.adjoint()) / 2.0;
}

Vector Sampler::unit_vector(int d) {
  Vector v = gaussian(d, 1).col(0);
  return v / v.norm();
}

AlgebraElement Sampler::element(const Algebra& algebra, SampleKind kind) {
  std::vector<Matrix> blocks;
  for (int d : algebra.blocks()) {
    const Matrix y = gaussian(d, d);
    switch (kind) {
      case SampleKind::General: blocks.push_back(y); break;
      case SampleKind::Hermitian: blocks.push_back((y + y.adjoint()) / 2.0); break;
      case SampleKind::Positive: blocks.push_back(y.adjoint() * y); break;
    }
  }
  return AlgebraElement(algebra, std::move(blocks));
}

State Sampler::state(const Algebra& algebra) {
  std::vector<Matrix> densities;
  std::vector<double> weights;
  double total = 0.0;
  for (int d : algebra.blocks()) {
    const Matrix y = gaussian(d, d);
    Matrix rho = y.adjoint() * y;
    rho /= rho.trace().real();
    densities.push_back(linalg::hermitian_part(rho));
    const double w = std::norm(complex_normal()) + 1e-3;
    weights.push_back(w);
    total += w;
  }
  for (auto& w : weights) w /= total;
  return State(algebra, std::move(densities), std::move(weights));
}

AlgebraElement random_element(const Algebra& algebra, std::uint64_t seed, SampleKind kind) {
  Sampler sampler(seed);
  return sampler.element(algebra, kind);
}

State random_state(const Algebra& algebra, std::uint64_t seed) {
  Sampler sampler(seed);
  return sampler.state(algebra);
}

Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Matrix sigma_y() {
  Matrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

Matrix sigma_z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

}  // namespace cdlab
