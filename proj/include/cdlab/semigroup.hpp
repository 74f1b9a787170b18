#pragma once

// Resolvents, Euler approximants, exact exponentials, Choi-based complete
// positivity, and generator recovery for superoperators.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "cdlab/generators.hpp"

namespace cdlab {

/// Resolvents whose LU condition estimate exceeds this are refused.
inline constexpr double kMaxResolventCondition = 1e12;

/// (I - alpha delta)^{-1}, alpha > 0.
Superoperator resolvent(const Superoperator& delta, double alpha);

/// R(k) = (k I - delta)^{-1}, k > 0.
Superoperator resolvent_at(const Superoperator& delta, double k);

/// (I - (t/n) delta)^{-n}. t = 0 gives the identity.
Superoperator euler_approximant(const Superoperator& delta, double t, int n);

/// exp(t delta) by Pade scaling and squaring.
Superoperator exp_generator(const Superoperator& delta, double t);

/// Forward difference (tau(h) - I) / h.
Superoperator recover_generator(const std::function<Superoperator(double)>& tau, double h);

/// Spectral norm of the difference of the stored matrices.
double superoperator_distance(const Superoperator& a, const Superoperator& b);

struct ChoiMatrix {
  std::string source_label;
  /// C = sum_ij E_ij (x) T(E_ij); row index i * d + a.
  Matrix matrix;
  double hermiticity_defect = 0.0;
  double min_eigenvalue = 0.0;
  Vector min_eigenvector;
};

/// Single-block algebras only; throws UnsupportedStructure otherwise.
ChoiMatrix choi_matrix(const Superoperator& map);

struct CpVerdict {
  bool completely_positive = false;
  ChoiMatrix choi;
  /// On failure: sum_ij E_ij (x) E_ij at level d is positive, but
  /// <v, T_d(it) v> = min_eigenvalue < 0 for v = choi.min_eigenvector.
  std::optional<AlgebraElement> witness_element;
};

CpVerdict is_completely_positive(const Superoperator& map, double tol);

/// Blockwise probe for direct sums: positivity of T_n on sampled positive
/// elements for n = 1..n_max. A probe, never a certificate.
struct PositivityProbe {
  bool passed = true;
  int levels_tested = 0;
  int samples_per_level = 0;
  double min_eigenvalue = 0.0;
  int worst_level = 0;
  std::optional<AlgebraElement> witness;
};

PositivityProbe blockwise_positivity_probe(const Superoperator& map, int n_max, int samples,
                                           std::uint64_t seed, double tol);

struct ResolventIdentityVerdict {
  bool holds = false;
  double residual = 0.0;
};

/// R(k1) - R(k2) = (k2 - k1) R(k1) R(k2).
ResolventIdentityVerdict check_resolvent_identity(const Superoperator& delta, double k1, double k2,
                                                  double tol);

struct SchwarzVerdict {
  bool holds = false;
  PositivityVerdict positivity;
};

/// T(x* x) >= T(x)* T(x); T must be unital within tol.
SchwarzVerdict check_schwarz_inequality(const Superoperator& map, const AlgebraElement& x,
                                        double tol);

}  // namespace cdlab
