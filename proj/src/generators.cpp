#include "cdlab/generators.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cdlab/linalg.hpp"

namespace cdlab {
namespace {

constexpr double kHermitianInputTol = 1e-12;

void require_hermitian(const AlgebraElement& h, const char* what) {
  const double defect = operator_norm(h - h.adjoint());
  if (defect > kHermitianInputTol) {
    std::ostringstream os;
    os << what << " is not hermitian (defect " << defect << ")";
    throw Error(ErrorCode::NotHermitian, os.str());
  }
}

// Block-diagonal assembly of per-block superoperator matrices.
Matrix block_diagonal(const Algebra& algebra, const std::vector<Matrix>& per_block) {
  const int n = algebra.element_dim();
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k < algebra.block_count(); ++k) {
    const int off = algebra.block_offset(k);
    m.block(off, off, per_block[k].rows(), per_block[k].cols()) = per_block[k];
  }
  return m;
}

// vec(A x B) = (B^T (x) A) vec(x).
Matrix sandwich(const Matrix& left, const Matrix& right) {
  return linalg::kron(right.transpose(), left);
}

}  // namespace

// ---------------------------------------------------------------------------
// Superoperator

Superoperator::Superoperator(Algebra algebra, Matrix matrix, std::string label,
                             std::string origin)
    : algebra_(std::move(algebra)),
      matrix_(std::move(matrix)),
      label_(std::move(label)),
      origin_(std::move(origin)) {
  const int n = algebra_.element_dim();
  if (matrix_.rows() != n || matrix_.cols() != n) {
    std::ostringstream os;
    os << "superoperator matrix is " << matrix_.rows() << "x" << matrix_.cols()
       << ", algebra element dimension is " << n;
    throw Error(ErrorCode::AlgebraMismatch, os.str());
  }
}

Superoperator Superoperator::identity(const Algebra& algebra) {
  const int n = algebra.element_dim();
  return Superoperator(algebra, Matrix::Identity(n, n), "identity");
}

Superoperator Superoperator::zero(const Algebra& algebra) {
  const int n = algebra.element_dim();
  return Superoperator(algebra, Matrix::Zero(n, n), "zero");
}

Superoperator Superoperator::from_map(
    const Algebra& algebra, const std::function<AlgebraElement(const AlgebraElement&)>& map,
    std::string label) {
  const int n = algebra.element_dim();
  Matrix m(n, n);
  for (int c = 0; c < n; ++c) {
    const AlgebraElement image = map(AlgebraElement::basis(algebra, c));
    if (!(image.algebra() == algebra)) {
      throw Error(ErrorCode::AlgebraMismatch, "map leaves the algebra");
    }
    m.col(c) = image.vectorize();
  }
  return Superoperator(algebra, std::move(m), std::move(label), "from_map");
}

AlgebraElement Superoperator::operator()(const AlgebraElement& x) const {
  if (!(x.algebra() == algebra_)) {
    throw Error(ErrorCode::AlgebraMismatch, "superoperator applied to an element of another algebra");
  }
  return AlgebraElement::from_vector(algebra_, matrix_ * x.vectorize());
}

Superoperator operator*(const Superoperator& a, const Superoperator& b) {
  if (!(a.algebra_ == b.algebra_)) throw Error(ErrorCode::AlgebraMismatch, "composition across algebras");
  return Superoperator(a.algebra_, a.matrix_ * b.matrix_, a.label_ + "*" + b.label_);
}

Superoperator operator+(const Superoperator& a, const Superoperator& b) {
  if (!(a.algebra_ == b.algebra_)) throw Error(ErrorCode::AlgebraMismatch, "sum across algebras");
  return Superoperator(a.algebra_, a.matrix_ + b.matrix_, a.label_ + "+" + b.label_);
}

Superoperator operator-(const Superoperator& a, const Superoperator& b) {
  if (!(a.algebra_ == b.algebra_)) throw Error(ErrorCode::AlgebraMismatch, "difference across algebras");
  return Superoperator(a.algebra_, a.matrix_ - b.matrix_, a.label_ + "-" + b.label_);
}

Superoperator operator*(Complex s, const Superoperator& a) {
  return Superoperator(a.algebra_, s * a.matrix_, a.label_, a.origin_);
}

AlgebraElement apply_generator(const Superoperator& delta, const AlgebraElement& x) {
  return delta(x);
}

// ---------------------------------------------------------------------------
// Constructors

Superoperator commutator_derivation(const AlgebraElement& hamiltonian) {
  require_hermitian(hamiltonian, "hamiltonian");
  const Algebra& alg = hamiltonian.algebra();
  std::vector<Matrix> per_block;
  const Complex i(0.0, 1.0);
  for (int k = 0; k < alg.block_count(); ++k) {
    const int d = alg.block_dim(k);
    const Matrix id = Matrix::Identity(d, d);
    const Matrix& h = hamiltonian.block(k);
    per_block.push_back(i * (sandwich(h, id) - sandwich(id, h)));
  }
  return Superoperator(alg, block_diagonal(alg, per_block), "commutator",
                       "commutator_derivation");
}

Superoperator lindblad_generator(const AlgebraElement& hamiltonian,
                                 const std::vector<AlgebraElement>& jumps) {
  require_hermitian(hamiltonian, "hamiltonian");
  const Algebra& alg = hamiltonian.algebra();
  for (const auto& v : jumps) {
    if (!(v.algebra() == alg)) {
      throw Error(ErrorCode::AlgebraMismatch, "jump operator lives in a different algebra");
    }
  }
  Matrix m = commutator_derivation(hamiltonian).matrix();
  std::vector<Matrix> per_block;
  for (int k = 0; k < alg.block_count(); ++k) {
    const int d = alg.block_dim(k);
    const Matrix id = Matrix::Identity(d, d);
    Matrix dissipator = Matrix::Zero(d * d, d * d);
    for (const auto& jump : jumps) {
      const Matrix& v = jump.block(k);
      const Matrix vv = v.adjoint() * v;
      dissipator += sandwich(v.adjoint(), v) - 0.5 * (sandwich(vv, id) + sandwich(id, vv));
    }
    per_block.push_back(std::move(dissipator));
  }
  m += block_diagonal(alg, per_block);
  std::ostringstream prov;
  prov << "lindblad_generator(jumps=" << jumps.size() << ")";
  return Superoperator(alg, std::move(m), jumps.empty() ? "commutator" : "lindblad", prov.str());
}

Matrix weyl_operator(int d, int p, int q) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "weyl dimension must be >= 1");
  p = ((p % d) + d) % d;
  q = ((q % d) + d) % d;
  Matrix w = Matrix::Zero(d, d);
  // (X^p Z^q)|j> = z^{q j} |j + p>.
  for (int j = 0; j < d; ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>((q * j) % d) / d;
    w((j + p) % d, j) = std::polar(1.0, angle);
  }
  return w;
}

WeylWeights squared_min_length_weights(int d) {
  WeylWeights weights;
  for (int p = 0; p < d; ++p) {
    for (int q = 0; q < d; ++q) {
      const int mp = std::min(p, d - p);
      const int mq = std::min(q, d - q);
      weights[{p, q}] = static_cast<double>(mp * mp + mq * mq);
    }
  }
  return weights;
}

Superoperator weyl_damping_generator(int d, const WeylWeights& weights) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "weyl dimension must be >= 1");
  const Algebra alg = Algebra::full(d);
  Matrix m = Matrix::Zero(d * d, d * d);
  for (const auto& [index, c] : weights) {
    const auto [p, q] = index;
    if (p < 0 || p >= d || q < 0 || q >= d) {
      throw Error(ErrorCode::InvalidArgument, "weyl index out of range");
    }
    if (c < 0.0) throw Error(ErrorCode::InvalidArgument, "weyl weights must be >= 0");
    if (p == 0 && q == 0) {
      if (c != 0.0) {
        throw Error(ErrorCode::InvalidArgument, "c(0,0) must be 0 for a unital generator");
      }
      continue;
    }
    if (c == 0.0) continue;
    const Vector w = linalg::vec(weyl_operator(d, p, q));
    // Weyl operators are orthogonal with <W, W> = d in the trace pairing.
    m -= (c / d) * (w * w.adjoint());
  }
  return Superoperator(alg, std::move(m), "weyl", "weyl_damping_generator");
}

// ---------------------------------------------------------------------------
// Amplification

Superoperator amplify_generator(const Superoperator& delta, int n) {
  const Algebra& base = delta.algebra();
  const Algebra amp = base.amplified(n);
  const Matrix& src = delta.matrix();
  Matrix m = Matrix::Zero(amp.element_dim(), amp.element_dim());

  // Amplified vec index of entry (a, b) inside block (i, j) of base block k.
  auto amp_index = [&](int k, int i, int j, int a, int b) {
    const int d = base.block_dim(k);
    return amp.block_offset(k) + (j * d + b) * (n * d) + (i * d + a);
  };

  for (int kr = 0; kr < base.block_count(); ++kr) {
    const int dr = base.block_dim(kr);
    for (int kc = 0; kc < base.block_count(); ++kc) {
      const int dc = base.block_dim(kc);
      for (int br = 0; br < dr; ++br) {
        for (int ar = 0; ar < dr; ++ar) {
          const int row = base.block_offset(kr) + br * dr + ar;
          for (int bc = 0; bc < dc; ++bc) {
            for (int ac = 0; ac < dc; ++ac) {
              const Complex value = src(row, base.block_offset(kc) + bc * dc + ac);
              if (value == Complex(0.0)) continue;
              for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                  m(amp_index(kr, i, j, ar, br), amp_index(kc, i, j, ac, bc)) = value;
            }
          }
        }
      }
    }
  }
  std::ostringstream label;
  label << delta.label() << "_" << n;
  return Superoperator(amp, std::move(m), label.str(), "amplify_generator");
}

AlgebraElement block_matrix(const std::vector<std::vector<AlgebraElement>>& entries) {
  const int n = static_cast<int>(entries.size());
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty block matrix");
  const Algebra base = entries[0].at(0).algebra();
  const Algebra amp = base.amplified(n);
  std::vector<Matrix> blocks;
  for (int k = 0; k < base.block_count(); ++k) {
    const int d = base.block_dim(k);
    Matrix big(n * d, n * d);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(entries[i].size()) != n) {
        throw Error(ErrorCode::InvalidArgument, "block matrix must be square");
      }
      for (int j = 0; j < n; ++j) {
        if (!(entries[i][j].algebra() == base)) {
          throw Error(ErrorCode::AlgebraMismatch, "block matrix entries from different algebras");
        }
        big.block(i * d, j * d, d, d) = entries[i][j].block(k);
      }
    }
    blocks.push_back(std::move(big));
  }
  return AlgebraElement(amp, std::move(blocks));
}

AlgebraElement block_entry(const AlgebraElement& amplified, const Algebra& base, int n, int i,
                           int j) {
  if (!(amplified.algebra() == base.amplified(n))) {
    throw Error(ErrorCode::AlgebraMismatch, "element is not in the amplified algebra");
  }
  std::vector<Matrix> blocks;
  for (int k = 0; k < base.block_count(); ++k) {
    const int d = base.block_dim(k);
    blocks.push_back(amplified.block(k).block(i * d, j * d, d, d));
  }
  return AlgebraElement(base, std::move(blocks));
}

AlgebraElement amplify_element(const AlgebraElement& x, int n) {
  const AlgebraElement zero = AlgebraElement::zero(x.algebra());
  std::vector<std::vector<AlgebraElement>> entries(static_cast<std::size_t>(n),
                                                   std::vector<AlgebraElement>(static_cast<std::size_t>(n), zero));
  for (int i = 0; i < n; ++i) entries[i][i] = x;
  return block_matrix(entries);
}

// ---------------------------------------------------------------------------
// Checks and fixed maps

HermitianMapVerdict is_hermitian_map(const Superoperator& delta, double tol) {
  HermitianMapVerdict verdict;
  const Algebra& alg = delta.algebra();
  for (int c = 0; c < alg.element_dim(); ++c) {
    const AlgebraElement e = AlgebraElement::basis(alg, c);
    const double defect = distance(delta(e.adjoint()), delta(e).adjoint());
    if (defect > verdict.max_defect) {
      verdict.max_defect = defect;
      verdict.worst_basis_index = c;
    }
  }
  verdict.hermitian = verdict.max_defect <= tol;
  return verdict;
}

double leibniz_defect(const Superoperator& delta,
                      const std::vector<std::pair<AlgebraElement, AlgebraElement>>& pairs) {
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    const AlgebraElement lhs = delta(x * y);
    const AlgebraElement rhs = delta(x) * y + x * delta(y);
    worst = std::max(worst, distance(lhs, rhs));
  }
  return worst;
}

Superoperator transpose_map(const Algebra& algebra) {
  Superoperator t = Superoperator::from_map(
      algebra,
      [](const AlgebraElement& x) {
        std::vector<Matrix> blocks;
        for (const auto& b : x.blocks()) blocks.push_back(b.transpose());
        return AlgebraElement(x.algebra(), std::move(blocks));
      },
      "transpose");
  return t;
}

Superoperator depolarizing_generator(int d, double gamma) {
  const Algebra alg = Algebra::full(d);
  const Vector id = linalg::vec(Matrix::Identity(d, d));
  // tr(a) = vec(1)^* vec(a).
  Matrix m = (gamma / d) * (id * id.adjoint()) - gamma * Matrix::Identity(d * d, d * d);
  return Superoperator(alg, std::move(m), "depolarizing", "depolarizing_generator");
}

}  // namespace cdlab
