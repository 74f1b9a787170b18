#pragma once

// GNS representations of states on finite-dimensional algebras and
// Hilbert-space operators implementing superoperators in them.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdlab/dissipativity.hpp"
#include "cdlab/generators.hpp"

namespace cdlab {

inline constexpr double kDefaultGramRankTol = 1e-10;

/// Cyclic representation (pi, K, Omega) of `state`.
///
/// With the Gram matrix G(j, i) = omega(e_j* e_i) = W Lambda W*, the class of
/// an element with coefficient vector c has orthonormal coordinates
/// Lambda_r^{1/2} W_r* c, r the numerical rank.
class GnsRepresentation {
 public:
  const Algebra& algebra() const noexcept { return algebra_; }
  const State& state() const noexcept { return state_; }
  int dim() const noexcept { return static_cast<int>(coordinates_.rows()); }
  bool faithful() const noexcept { return dim() == algebra_.element_dim(); }
  double rank_tol() const noexcept { return rank_tol_; }
  /// Eigenvalues of the Gram matrix, ascending.
  const Eigen::VectorXd& gram_spectrum() const noexcept { return gram_spectrum_; }

  /// dim x element_dim map from coefficient vectors to K.
  const Matrix& coordinates() const noexcept { return coordinates_; }
  /// pi(x) Omega.
  Vector vector(const AlgebraElement& x) const;
  Matrix pi(const AlgebraElement& x) const;
  const Vector& cyclic_vector() const noexcept { return omega_; }
  /// pi of basis element c.
  const Matrix& basis_image(int c) const { return basis_images_.at(static_cast<std::size_t>(c)); }

  /// max over the basis square of |<pi(a)Omega, pi(b)Omega> - omega(b* a)|.
  double gram_residual() const;

 private:
  friend GnsRepresentation gns_construct(const State& state, double rank_tol);
  GnsRepresentation(Algebra algebra, State state) : algebra_(std::move(algebra)), state_(std::move(state)) {}

  Algebra algebra_;
  State state_;
  double rank_tol_ = kDefaultGramRankTol;
  Eigen::VectorXd gram_spectrum_;
  Matrix coordinates_;
  Matrix synthesis_;  // W_r Lambda_r^{-1/2}
  Vector omega_;
  std::vector<Matrix> basis_images_;
};

/// Throws RankAmbiguity when a Gram eigenvalue lies within a factor 10 of the
/// cutoff rank_tol * lambda_max.
GnsRepresentation gns_construct(const State& state, double rank_tol = kDefaultGramRankTol);

/// Matrix of x -> a x on coefficient vectors.
Matrix left_multiplication(const AlgebraElement& a);

enum class ImplementingForm { OneSided, TwoSided, Skew };

const char* to_string(ImplementingForm form);

struct ImplementingOperator {
  Matrix matrix;
  ImplementingForm form = ImplementingForm::OneSided;
  /// One-sided and skew: max_b ||L pi(b)Omega - pi(delta b)Omega||.
  /// Two-sided: max_b ||L pi(b) + pi(b) L* - pi(delta b)|| (operator norm).
  double residual = 0.0;
  bool kills_cyclic = false;
};

/// Least-squares fit without a tolerance verdict.
ImplementingOperator fit_implementing_operator(const Superoperator& delta,
                                               const GnsRepresentation& rep,
                                               ImplementingForm form, bool kill_cyclic);

/// As fit_implementing_operator, but throws NotImplementable when the
/// residual exceeds tol.
ImplementingOperator implementing_operator(const Superoperator& delta,
                                           const GnsRepresentation& rep, ImplementingForm form,
                                           bool kill_cyclic, double tol);

/// Recomputes the residual stored in an ImplementingOperator.
double implementation_residual(const Superoperator& delta, const GnsRepresentation& rep,
                               const ImplementingOperator& op);

struct OperatorDissipativity {
  bool dissipative = false;
  /// Largest eigenvalue of (L + L*) / 2.
  double max_eigenvalue = 0.0;
  Vector witness;
};

OperatorDissipativity operator_dissipativity(const Matrix& l, double tol);

/// S with S pi(b) Omega = pi(delta b) Omega for a hermitian derivation and a
/// state annihilating delta. Precondition failures throw HypothesisViolation;
/// a fit that is not skew or misses the commutator identity throws
/// NotImplementable.
struct SkewImplementation {
  ImplementingOperator op;
  double skew_defect = 0.0;           // ||S + S*||
  double commutator_residual = 0.0;   // max_b ||pi(delta b) - (S pi(b) - pi(b) S)||
};

SkewImplementation skew_implementing_operator(const Superoperator& delta,
                                              const GnsRepresentation& rep, double tol);

// ---------------------------------------------------------------------------
// Amplified pipeline

struct AmplifiedCheck {
  int n = 1;
  int samples = 0;
  /// max over samples of Re omega_n(a* delta_n(a)) / max(1, ||a||^2).
  double max_real_part = 0.0;
  /// ||L_n Omega_n||.
  double cyclic_norm = 0.0;
  /// max |omega_n(a* delta_n(a)) - <L_n pi_n(a) Omega_n, pi_n(a) Omega_n>|.
  double identity_residual = 0.0;
  /// max ||L_n pi_n(a) + pi_n(a) L_n* - pi_n(delta_n a)|| over the samples.
  double implementation_residual = 0.0;
  bool passed = false;
};

struct PipelineOptions {
  int n_max = 3;
  int sample_count = 10;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  double rank_tol = kDefaultGramRankTol;
  CertifyOptions certify;
};

struct PipelineReport {
  int hilbert_dim = 0;
  double gram_residual = 0.0;
  ImplementingOperator implementation;
  double skew_defect = 0.0;
  double cyclic_norm = 0.0;  // ||L Omega||
  OperatorDissipativity dissipativity;
  std::vector<AmplifiedCheck> levels;
  DissipativityReport certification;
  /// Pipeline passed at every level and certification agrees.
  bool consistent = false;
  bool passed = false;
};

/// GNS construction, two-sided fit with L Omega = 0, dissipativity of L, the
/// amplified checks with L_n = I (x) L for n <= n_max, and a cross-check
/// against certify_completely_dissipative.
///
/// Throws HypothesisViolation when the state is not faithful or delta has no
/// two-sided implementation with L Omega = 0.
PipelineReport implementation_pipeline(const Superoperator& delta, const State& state,
                                       const PipelineOptions& options = {});

}  // namespace cdlab
