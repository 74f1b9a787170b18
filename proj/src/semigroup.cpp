#include "cdlab/semigroup.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cdlab/linalg.hpp"

namespace cdlab {

Superoperator resolvent(const Superoperator& delta, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolvent parameter must be > 0");
  const Algebra& alg = delta.algebra();
  const int n = alg.element_dim();
  const Matrix system = Matrix::Identity(n, n) - alpha * delta.matrix();
  Eigen::PartialPivLU<Matrix> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > 1.0 / kMaxResolventCondition)) {
    std::ostringstream os;
    os << "resolvent does not exist at alpha = " << alpha << " (condition estimate "
       << (rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity()) << ")";
    throw Error(ErrorCode::ResolventDoesNotExist, os.str());
  }
  std::ostringstream prov;
  prov << "resolvent(alpha=" << alpha << ")";
  return Superoperator(alg, lu.inverse(), "R[" + delta.label() + "]", prov.str());
}

Superoperator resolvent_at(const Superoperator& delta, double k) {
  if (!(k > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolvent point must be > 0");
  // (k - delta)^{-1} = (1/k) (I - delta / k)^{-1}.
  const Superoperator r = resolvent(delta, 1.0 / k);
  return Superoperator(delta.algebra(), r.matrix() / k, r.label(), r.origin());
}

Superoperator euler_approximant(const Superoperator& delta, double t, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "euler step count must be >= 1");
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "euler time must be >= 0");
  const Algebra& alg = delta.algebra();
  if (t == 0.0) return Superoperator::identity(alg);
  const Matrix factor = resolvent(delta, t / n).matrix();
  Matrix result = Matrix::Identity(alg.element_dim(), alg.element_dim());
  Matrix base = factor;
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) result = result * base;
    if (e > 1) base = base * base;
  }
  std::ostringstream prov;
  prov << "euler_approximant(t=" << t << ", n=" << n << ")";
  return Superoperator(alg, std::move(result), "E[" + delta.label() + "]", prov.str());
}

Superoperator exp_generator(const Superoperator& delta, double t) {
  std::ostringstream prov;
  prov << "exp_generator(t=" << t << ")";
  return Superoperator(delta.algebra(), linalg::expm(t * delta.matrix()),
                       "exp[" + delta.label() + "]", prov.str());
}

Superoperator recover_generator(const std::function<Superoperator(double)>& tau, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "difference step must be > 0");
  const Superoperator step = tau(h);
  const int n = step.algebra().element_dim();
  return Superoperator(step.algebra(), (step.matrix() - Matrix::Identity(n, n)) / h,
                       "recovered", "recover_generator");
}

double superoperator_distance(const Superoperator& a, const Superoperator& b) {
  if (!(a.algebra() == b.algebra())) {
    throw Error(ErrorCode::AlgebraMismatch, "superoperators on different algebras");
  }
  return linalg::spectral_norm(a.matrix() - b.matrix());
}

// ---------------------------------------------------------------------------
// Complete positivity

ChoiMatrix choi_matrix(const Superoperator& map) {
  const Algebra& alg = map.algebra();
  if (!alg.is_single_block()) {
    throw Error(ErrorCode::UnsupportedStructure,
                "unsupported structure: use blockwise CP probe for direct sums");
  }
  const int d = alg.block_dim(0);
  ChoiMatrix choi;
  choi.source_label = map.label();
  choi.matrix = Matrix::Zero(d * d, d * d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      // E_ij is basis index j * d + i under column stacking.
      const AlgebraElement image = map(AlgebraElement::basis(alg, j * d + i));
      choi.matrix.block(i * d, j * d, d, d) = image.block(0);
    }
  }
  choi.hermiticity_defect = linalg::spectral_norm(choi.matrix - choi.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::hermitian_part(choi.matrix));
  choi.min_eigenvalue = eig.eigenvalues()(0);
  choi.min_eigenvector = eig.eigenvectors().col(0);
  return choi;
}

CpVerdict is_completely_positive(const Superoperator& map, double tol) {
  CpVerdict verdict;
  verdict.choi = choi_matrix(map);
  verdict.completely_positive =
      verdict.choi.hermiticity_defect <= tol && verdict.choi.min_eigenvalue >= -tol;
  if (!verdict.completely_positive) {
    const Algebra& alg = map.algebra();
    const int d = alg.block_dim(0);
    std::vector<std::vector<AlgebraElement>> entries;
    for (int i = 0; i < d; ++i) {
      std::vector<AlgebraElement> row;
      for (int j = 0; j < d; ++j) row.push_back(AlgebraElement::basis(alg, j * d + i));
      entries.push_back(std::move(row));
    }
    verdict.witness_element = block_matrix(entries);
  }
  return verdict;
}

PositivityProbe blockwise_positivity_probe(const Superoperator& map, int n_max, int samples,
                                           std::uint64_t seed, double tol) {
  if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 1");
  PositivityProbe probe;
  probe.samples_per_level = samples;
  probe.min_eigenvalue = std::numeric_limits<double>::infinity();
  Sampler sampler(seed);
  for (int n = 1; n <= n_max; ++n) {
    const Superoperator amp = amplify_generator(map, n);
    probe.levels_tested = n;
    for (int s = 0; s < samples; ++s) {
      const AlgebraElement x = sampler.element(amp.algebra(), SampleKind::Positive);
      const PositivityVerdict v = is_positive(amp(x), tol * std::max(1.0, operator_norm(x)));
      if (v.min_eigenvalue < probe.min_eigenvalue) {
        probe.min_eigenvalue = v.min_eigenvalue;
        probe.worst_level = n;
      }
      if (!v.positive && probe.passed) {
        probe.passed = false;
        probe.witness = x;
      }
    }
  }
  return probe;
}

// ---------------------------------------------------------------------------
// Identities

ResolventIdentityVerdict check_resolvent_identity(const Superoperator& delta, double k1, double k2,
                                                  double tol) {
  const Matrix r1 = resolvent_at(delta, k1).matrix();
  const Matrix r2 = resolvent_at(delta, k2).matrix();
  ResolventIdentityVerdict verdict;
  verdict.residual = linalg::spectral_norm((r1 - r2) - (k2 - k1) * (r1 * r2));
  verdict.holds = verdict.residual <= tol;
  return verdict;
}

SchwarzVerdict check_schwarz_inequality(const Superoperator& map, const AlgebraElement& x,
                                        double tol) {
  const AlgebraElement one = AlgebraElement::identity(map.algebra());
  const double unital_defect = distance(map(one), one);
  if (unital_defect > tol) {
    std::ostringstream os;
    os << "map is not unital (||T(1) - 1|| = " << unital_defect << ")";
    throw Error(ErrorCode::HypothesisViolation, os.str());
  }
  const AlgebraElement tx = map(x);
  SchwarzVerdict verdict;
  verdict.positivity = is_positive(map(x.adjoint() * x) - tx.adjoint() * tx, tol);
  verdict.holds = verdict.positivity.positive;
  return verdict;
}

}  // namespace cdlab
