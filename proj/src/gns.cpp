#include "cdlab/gns.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cdlab/linalg.hpp"

namespace cdlab {
namespace {

Matrix orthogonal_complement_of(const Vector& omega) {
  const auto n = omega.size();
  return Matrix::Identity(n, n) - omega * omega.adjoint();
}

// Per-element amplified state omega (x) tr_n on A (x) M_n.
State amplified_state(const State& state, int n) {
  const Algebra amp = state.algebra().amplified(n);
  std::vector<Matrix> densities;
  for (const auto& rho : state.densities()) {
    densities.push_back(linalg::kron(Matrix::Identity(n, n), rho) / static_cast<double>(n));
  }
  return State(amp, std::move(densities), state.weights());
}

double two_sided_defect(const Matrix& l, const Matrix& pa, const Matrix& pda) {
  return linalg::spectral_norm(l * pa + pa * l.adjoint() - pda);
}

}  // namespace

// ---------------------------------------------------------------------------
// GNS

Matrix left_multiplication(const AlgebraElement& a) {
  const Algebra& alg = a.algebra();
  const int n = alg.element_dim();
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k < alg.block_count(); ++k) {
    const int d = alg.block_dim(k);
    const int off = alg.block_offset(k);
    // vec(a E) = (I (x) a) vec(E) under column stacking.
    for (int col = 0; col < d; ++col) m.block(off + col * d, off + col * d, d, d) = a.block(k);
  }
  return m;
}

GnsRepresentation gns_construct(const State& state, double rank_tol) {
  if (!(rank_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "rank tolerance must be > 0");
  const Algebra& alg = state.algebra();
  const int n = alg.element_dim();

  // G(j, i) = omega(e_j* e_i). For E_ab, E_cd in block k: E_dc E_ab = [c == a] E_db,
  // and omega(E_db) = w_k rho_k(b, d).
  Matrix gram = Matrix::Zero(n, n);
  for (int k = 0; k < alg.block_count(); ++k) {
    const int d = alg.block_dim(k);
    const int off = alg.block_offset(k);
    const Matrix& rho = state.densities()[static_cast<std::size_t>(k)];
    const double w = state.weights()[static_cast<std::size_t>(k)];
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        for (int dd = 0; dd < d; ++dd) {
          gram(off + dd * d + a, off + b * d + a) = w * rho(b, dd);
        }
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::hermitian_part(gram));
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double top = lambda(n - 1);
  const double cutoff = rank_tol * top;
  for (int i = 0; i < n; ++i) {
    const double v = std::abs(lambda(i));
    if (v > cutoff / 10.0 && v < cutoff * 10.0) {
      std::ostringstream os;
      os << "Gram eigenvalue " << lambda(i) << " is within a factor 10 of the rank cutoff "
         << cutoff;
      throw Error(ErrorCode::RankAmbiguity, os.str());
    }
  }
  int rank = 0;
  while (rank < n && lambda(n - 1 - rank) > cutoff) ++rank;

  GnsRepresentation rep(alg, state);
  rep.rank_tol_ = rank_tol;
  rep.gram_spectrum_ = lambda;
  const Matrix w = eig.eigenvectors().rightCols(rank);
  const Eigen::VectorXd sqrt_l = lambda.tail(rank).cwiseSqrt();
  rep.coordinates_ = sqrt_l.cast<Complex>().asDiagonal() * w.adjoint();
  rep.synthesis_ = w * sqrt_l.cwiseInverse().cast<Complex>().asDiagonal();
  rep.omega_ = rep.coordinates_ * AlgebraElement::identity(alg).vectorize();
  rep.basis_images_.reserve(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) rep.basis_images_.push_back(rep.pi(AlgebraElement::basis(alg, c)));
  return rep;
}

Vector GnsRepresentation::vector(const AlgebraElement& x) const {
  if (!(x.algebra() == algebra_)) throw Error(ErrorCode::AlgebraMismatch, "element algebra");
  return coordinates_ * x.vectorize();
}

Matrix GnsRepresentation::pi(const AlgebraElement& x) const {
  if (!(x.algebra() == algebra_)) throw Error(ErrorCode::AlgebraMismatch, "element algebra");
  return coordinates_ * left_multiplication(x) * synthesis_;
}

double GnsRepresentation::gram_residual() const {
  const int n = algebra_.element_dim();
  std::vector<Vector> vectors;
  std::vector<AlgebraElement> basis;
  for (int c = 0; c < n; ++c) {
    basis.push_back(AlgebraElement::basis(algebra_, c));
    vectors.push_back(coordinates_.col(c));
  }
  double worst = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Complex inner = vectors[b].dot(vectors[a]);  // <pi(a)Omega, pi(b)Omega>
      const Complex expected = state_(basis[b].adjoint() * basis[a]);
      worst = std::max(worst, std::abs(inner - expected));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Implementing operators

const char* to_string(ImplementingForm form) {
  switch (form) {
    case ImplementingForm::OneSided: return "one-sided";
    case ImplementingForm::TwoSided: return "two-sided";
    case ImplementingForm::Skew: return "skew";
  }
  return "unknown";
}

double implementation_residual(const Superoperator& delta, const GnsRepresentation& rep,
                               const ImplementingOperator& op) {
  const Algebra& alg = rep.algebra();
  double worst = 0.0;
  for (int c = 0; c < alg.element_dim(); ++c) {
    const AlgebraElement e = AlgebraElement::basis(alg, c);
    const AlgebraElement de = delta(e);
    if (op.form == ImplementingForm::TwoSided) {
      worst = std::max(worst, two_sided_defect(op.matrix, rep.basis_image(c), rep.pi(de)));
    } else {
      worst = std::max(worst, (op.matrix * rep.vector(e) - rep.vector(de)).norm());
    }
  }
  return worst;
}

namespace {

// L with L xi(b) = xi(delta b) for all b, optionally L = M (I - Omega Omega*).
Matrix one_sided_solution(const Superoperator& delta, const GnsRepresentation& rep,
                          bool kill_cyclic) {
  Matrix x = rep.coordinates();
  const Matrix y = rep.coordinates() * delta.matrix();
  const Matrix p = orthogonal_complement_of(rep.cyclic_vector());
  if (kill_cyclic) x = p * x;
  // L X = Y  <=>  X* L* = Y*.
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(x.adjoint());
  Matrix l = cod.solve(y.adjoint()).adjoint();
  if (kill_cyclic) l = l * p;
  return l;
}

// L pi(a) + pi(a) L* = pi(delta a), real-linear in L = M P; solved for
// (Re M, Im M) in the least-squares sense with minimal norm.
Matrix two_sided_solution(const Superoperator& delta, const GnsRepresentation& rep,
                          bool kill_cyclic) {
  const Algebra& alg = rep.algebra();
  const int n = alg.element_dim();
  const int k = rep.dim();
  const Matrix p = kill_cyclic ? orthogonal_complement_of(rep.cyclic_vector())
                               : Matrix::Identity(k, k);
  std::vector<Matrix> images;
  std::vector<Matrix> targets;
  for (int c = 0; c < n; ++c) {
    images.push_back(rep.basis_image(c));
    targets.push_back(rep.pi(delta(AlgebraElement::basis(alg, c))));
  }
  const Eigen::Index block_rows = 2 * static_cast<Eigen::Index>(k) * k;
  Eigen::MatrixXd system(block_rows * n, 2 * k * k);
  Eigen::VectorXd rhs(block_rows * n);
  for (int c = 0; c < n; ++c) {
    const Eigen::Index row = c * block_rows;
    const Vector t = linalg::vec(targets[c]);
    rhs.segment(row, k * k) = t.real();
    rhs.segment(row + k * k, k * k) = t.imag();
  }
  for (int part = 0; part < 2; ++part) {
    const Complex unit = part == 0 ? Complex(1.0) : Complex(0.0, 1.0);
    for (int q = 0; q < k; ++q) {
      for (int pp = 0; pp < k; ++pp) {
        // L = unit * E_{pp,q} P has row pp equal to unit * P.row(q).
        Matrix l = Matrix::Zero(k, k);
        l.row(pp) = unit * p.row(q);
        const Eigen::Index col = part * k * k + q * k + pp;
        for (int c = 0; c < n; ++c) {
          const Vector v = linalg::vec(l * images[c] + images[c] * l.adjoint());
          system.block(c * block_rows, col, k * k, 1) = v.real();
          system.block(c * block_rows + k * k, col, k * k, 1) = v.imag();
        }
      }
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(system);
  const Eigen::VectorXd sol = cod.solve(rhs);
  Matrix m(k, k);
  for (int q = 0; q < k; ++q) {
    for (int pp = 0; pp < k; ++pp) {
      m(pp, q) = Complex(sol(q * k + pp), sol(k * k + q * k + pp));
    }
  }
  return m * p;
}

}  // namespace

ImplementingOperator fit_implementing_operator(const Superoperator& delta,
                                               const GnsRepresentation& rep,
                                               ImplementingForm form, bool kill_cyclic) {
  if (!(delta.algebra() == rep.algebra())) {
    throw Error(ErrorCode::AlgebraMismatch, "generator and representation use different algebras");
  }
  ImplementingOperator op;
  op.form = form;
  op.kills_cyclic = kill_cyclic;
  op.matrix = form == ImplementingForm::TwoSided ? two_sided_solution(delta, rep, kill_cyclic)
                                                 : one_sided_solution(delta, rep, kill_cyclic);
  op.residual = implementation_residual(delta, rep, op);
  return op;
}

ImplementingOperator implementing_operator(const Superoperator& delta,
                                           const GnsRepresentation& rep, ImplementingForm form,
                                           bool kill_cyclic, double tol) {
  ImplementingOperator op = fit_implementing_operator(delta, rep, form, kill_cyclic);
  if (op.residual > tol) {
    std::ostringstream os;
    os << "generator is not implementable in the " << to_string(form) << " form"
       << (kill_cyclic ? " with L Omega = 0" : "") << " (residual " << op.residual << ")";
    throw Error(ErrorCode::NotImplementable, os.str());
  }
  return op;
}

OperatorDissipativity operator_dissipativity(const Matrix& l, double tol) {
  OperatorDissipativity out;
  if (l.size() == 0) {
    out.dissipative = true;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::hermitian_part(l));
  const Eigen::Index last = eig.eigenvalues().size() - 1;
  out.max_eigenvalue = eig.eigenvalues()(last);
  out.dissipative = out.max_eigenvalue <= tol;
  if (!out.dissipative) out.witness = eig.eigenvectors().col(last);
  return out;
}

SkewImplementation skew_implementing_operator(const Superoperator& delta,
                                              const GnsRepresentation& rep, double tol) {
  const Algebra& alg = rep.algebra();
  const HermitianMapVerdict herm = is_hermitian_map(delta, tol);
  if (!herm.hermitian) {
    std::ostringstream os;
    os << "generator is not a hermitian map (defect " << herm.max_defect << ")";
    throw Error(ErrorCode::HypothesisViolation, os.str());
  }
  std::vector<std::pair<AlgebraElement, AlgebraElement>> pairs;
  for (int a = 0; a < alg.element_dim(); ++a) {
    for (int b = 0; b < alg.element_dim(); ++b) {
      pairs.emplace_back(AlgebraElement::basis(alg, a), AlgebraElement::basis(alg, b));
    }
  }
  const double leibniz = leibniz_defect(delta, pairs);
  if (leibniz > tol) {
    std::ostringstream os;
    os << "generator is not a derivation (Leibniz defect " << leibniz << ")";
    throw Error(ErrorCode::HypothesisViolation, os.str());
  }
  for (int c = 0; c < alg.element_dim(); ++c) {
    const double v = std::abs(rep.state()(delta(AlgebraElement::basis(alg, c))));
    if (v > tol) {
      std::ostringstream os;
      os << "state does not annihilate the generator (|omega(delta(e_" << c << "))| = " << v << ")";
      throw Error(ErrorCode::HypothesisViolation, os.str());
    }
  }

  SkewImplementation out;
  out.op = fit_implementing_operator(delta, rep, ImplementingForm::Skew, false);
  const Matrix& s = out.op.matrix;
  out.skew_defect = linalg::spectral_norm(s + s.adjoint());
  for (int c = 0; c < alg.element_dim(); ++c) {
    const Matrix& pb = rep.basis_image(c);
    const Matrix pdb = rep.pi(delta(AlgebraElement::basis(alg, c)));
    out.commutator_residual =
        std::max(out.commutator_residual, linalg::spectral_norm(pdb - (s * pb - pb * s)));
  }
  if (out.op.residual > tol || out.skew_defect > tol || out.commutator_residual > tol) {
    std::ostringstream os;
    os << "no skew implementation: fit residual " << out.op.residual << ", ||S + S*|| "
       << out.skew_defect << ", commutator residual " << out.commutator_residual;
    throw Error(ErrorCode::NotImplementable, os.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Amplified pipeline

namespace {

// K_n = C^{n^2} (x) K, where C^{n^2} carries the trace GNS space of M_n in
// orthonormal coordinates vec(X) / sqrt(n).
struct AmplifiedRepresentation {
  const GnsRepresentation& rep;
  int n;

  Matrix pi(const AlgebraElement& x) const {
    const Algebra& base = rep.algebra();
    const int k = rep.dim();
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n) * n * k, static_cast<Eigen::Index>(n) * n * k);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Matrix pij = rep.pi(block_entry(x, base, n, i, j));
        if (pij.isZero(0.0)) continue;
        // lambda(E_ij) = I (x) E_ij maps e_(col m, row j) to e_(col m, row i).
        for (int m = 0; m < n; ++m) out.block((m * n + i) * k, (m * n + j) * k, k, k) += pij;
      }
    }
    return out;
  }

  Vector omega() const {
    const int k = rep.dim();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(n) * n * k);
    for (int m = 0; m < n; ++m) {
      out.segment((m * n + m) * k, k) = rep.cyclic_vector() / std::sqrt(static_cast<double>(n));
    }
    return out;
  }

  Matrix lift(const Matrix& l) const {
    return linalg::kron(Matrix::Identity(n * n, n * n), l);
  }
};

}  // namespace

PipelineReport implementation_pipeline(const Superoperator& delta, const State& state,
                                       const PipelineOptions& options) {
  if (options.n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 1");
  const GnsRepresentation rep = gns_construct(state, options.rank_tol);
  if (!rep.faithful()) {
    std::ostringstream os;
    os << "hypotheses not met: state is not faithful (GNS dimension " << rep.dim() << " < "
       << rep.algebra().element_dim() << ")";
    throw Error(ErrorCode::HypothesisViolation, os.str());
  }
  PipelineReport report;
  report.hilbert_dim = rep.dim();
  report.gram_residual = rep.gram_residual();
  report.implementation =
      fit_implementing_operator(delta, rep, ImplementingForm::TwoSided, true);
  if (report.implementation.residual > options.tol) {
    std::ostringstream os;
    os << "hypotheses not met: no two-sided implementation with L Omega = 0 (residual "
       << report.implementation.residual << ")";
    throw Error(ErrorCode::HypothesisViolation, os.str());
  }
  const Matrix& l = report.implementation.matrix;
  report.skew_defect = linalg::spectral_norm(l + l.adjoint());
  report.cyclic_norm = (l * rep.cyclic_vector()).norm();
  report.dissipativity = operator_dissipativity(l, options.tol);

  Sampler sampler(options.seed);
  bool levels_ok = true;
  for (int n = 1; n <= options.n_max; ++n) {
    const Superoperator amp = amplify_generator(delta, n);
    const State omega_n = amplified_state(state, n);
    const AmplifiedRepresentation krep{rep, n};
    const Matrix ln = krep.lift(l);
    const Vector om = krep.omega();

    AmplifiedCheck check;
    check.n = n;
    check.cyclic_norm = (ln * om).norm();
    std::vector<AlgebraElement> samples;
    samples.push_back(AlgebraElement::identity(amp.algebra()));
    for (int s = 0; s < options.sample_count; ++s) {
      samples.push_back(sampler.element(amp.algebra(), SampleKind::General));
    }
    check.samples = static_cast<int>(samples.size());
    for (const auto& a : samples) {
      const double scale = std::max(1.0, std::pow(operator_norm(a), 2));
      const AlgebraElement da = amp(a);
      const Complex value = omega_n(a.adjoint() * da);
      const Matrix pa = krep.pi(a);
      const Vector xi = pa * om;
      const Complex predicted = xi.dot(ln * xi);
      check.max_real_part = std::max(check.max_real_part, value.real() / scale);
      check.identity_residual = std::max(check.identity_residual, std::abs(value - predicted) / scale);
      check.implementation_residual =
          std::max(check.implementation_residual, two_sided_defect(ln, pa, krep.pi(da)) / scale);
    }
    check.passed = check.max_real_part <= options.tol && check.cyclic_norm <= options.tol &&
                   check.identity_residual <= options.tol &&
                   check.implementation_residual <= options.tol;
    levels_ok = levels_ok && check.passed;
    report.levels.push_back(check);
  }

  CertifyOptions certify = options.certify;
  certify.n_max = options.n_max;
  report.certification = certify_completely_dissipative(delta, certify);
  report.passed = levels_ok && report.dissipativity.dissipative;
  // The pipeline succeeding predicts that certification passes.
  report.consistent = !report.passed || report.certification.passed;
  return report;
}

}  // namespace cdlab
