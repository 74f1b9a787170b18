#pragma once

// Dissipativity certification for superoperators on finite-dimensional
// algebras with the operator norm.
//
// Two pointwise tests are run on every element x:
//   norm condition:       ||x - alpha delta(x)|| >= ||x|| on an alpha grid;
//   functional condition: Re f(delta(x)) <= 0 for every norming functional f.
// The norming functionals of x are the states on its top singular subspace,
// so the functional condition is decided exactly as the largest eigenvalue
// of the hermitian part of the compression V* delta(x) U.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdlab/generators.hpp"

namespace cdlab {

/// f(y) = <y u, v> on one block, with unit u, v and x u = ||x|| v.
struct NormingFunctional {
  int block = 0;
  Vector u;
  Vector v;

  Complex operator()(const AlgebraElement& y) const;
};

/// Singular values within this relative distance of the top one are treated
/// as degenerate.
inline constexpr double kDegeneracyThreshold = 1e-8;

/// Norming functional of x maximizing Re f(y), and that maximum.
struct NormingMaximum {
  NormingFunctional functional;
  double value = 0.0;
  int top_multiplicity = 1;
};

NormingMaximum max_norming_value(const AlgebraElement& x, const AlgebraElement& y);

/// 41 log-spaced points in [2^-10, 2^10].
std::vector<double> default_alpha_grid();

struct DissipativityCheck {
  bool norm_condition = true;
  bool functional_condition = true;
  double norm_of_x = 0.0;
  /// min over the grid of ||x - alpha delta(x)|| - ||x||, and where it occurs.
  /// When the grid passes, alpha is also halved below the grid minimum; a
  /// failure found there is reported instead.
  double worst_gap = 0.0;
  double worst_alpha = 0.0;
  /// max Re f(delta(x)) over norming functionals and the maximizer.
  double functional_value = 0.0;
  NormingFunctional functional;

  bool dissipative() const { return norm_condition && functional_condition; }
  bool agree() const { return norm_condition == functional_condition; }
};

DissipativityCheck check_dissipative(const Superoperator& delta, const AlgebraElement& x,
                                     std::span<const double> alpha_grid, double tol);

// ---------------------------------------------------------------------------
// Complete dissipativity

struct CertifyOptions {
  int n_max = 4;
  int sample_count = 20;
  std::vector<double> alpha_grid = default_alpha_grid();
  std::vector<double> t_grid = {0.1, 0.5, 1.0, 2.0};
  std::uint64_t seed = 0;
  double tol = 1e-9;
};

struct ContractivityProbe {
  double t = 0.0;
  /// max over probed x of ||exp(t delta_n)(x)|| / ||x||.
  double max_ratio = 0.0;
  AlgebraElement element;
  double norm_after = 0.0;
};

enum class WitnessKind { None, NormCondition, FunctionalCondition, Contractivity };

const char* to_string(WitnessKind kind);

struct LevelReport {
  int n = 1;
  bool passed = true;
  int elements_tested = 0;
  bool norm_condition = true;
  bool functional_condition = true;
  bool contractivity = true;
  bool methods_agree = true;
  std::vector<ContractivityProbe> probes;

  WitnessKind witness_kind = WitnessKind::None;
  std::optional<AlgebraElement> witness_element;
  double witness_alpha = 0.0;
  double witness_t = 0.0;
  std::optional<NormingFunctional> witness_functional;
  /// Size of the violation: norm shortfall, functional value, or norm growth.
  double violation = 0.0;
};

struct DissipativityReport {
  std::vector<LevelReport> levels;
  bool passed = true;
  std::vector<std::string> methods;
  std::string scope;
  CertifyOptions options;
};

DissipativityReport certify_completely_dissipative(const Superoperator& delta,
                                                   const CertifyOptions& options = {});

/// Re-evaluates a failing level's witness against delta; returns the
/// recomputed violation (same units as LevelReport::violation).
double reproduce_violation(const Superoperator& delta, const LevelReport& level);

/// Elements every level probes besides the matrix units and random samples:
/// the identity and, per block, the flip sum E_ij (x) e_ji and the
/// unnormalized Choi element sum E_ij (x) e_ij.
std::vector<AlgebraElement> structured_probe_elements(const Algebra& base, int n);

// ---------------------------------------------------------------------------
// The dissipation inequality delta(x*x) >= delta(x)*x + x*delta(x)

struct DissipationInequalityVerdict {
  bool holds = false;
  AlgebraElement difference;
  PositivityVerdict positivity;
};

/// Throws HypothesisViolation when ||delta(1)|| > tol.
DissipationInequalityVerdict check_dissipation_inequality(const Superoperator& delta,
                                                          const AlgebraElement& x, double tol);

// ---------------------------------------------------------------------------
// Well-behavedness of derivations

/// The default grid with both signs.
std::vector<double> default_signed_alpha_grid();

struct WellBehavedOptions {
  int sample_count = 20;
  std::vector<double> alpha_grid_signed = default_signed_alpha_grid();
  std::uint64_t seed = 0;
  double tol = 1e-9;
  /// Positive elements tested in addition to the random samples.
  std::vector<AlgebraElement> extra_elements;
};

struct WellBehavedElement {
  AlgebraElement element;
  bool spectral_condition = true;  // a state phi with phi(a) = ||a|| and phi(delta(a)) = 0
  bool exhaustive = true;          // false when the degenerate case was only sampled
  double spectral_value = 0.0;     // smallest |phi(delta(a))| found
  Vector extreme_vector;           // the pure state attaining it
  int top_multiplicity = 1;
  bool norm_condition = true;      // ||a + alpha delta(a)|| >= ||a|| for signed alphas
  double worst_alpha = 0.0;
  double worst_gap = 0.0;
};

struct WellBehavedReport {
  bool well_behaved = true;
  bool spectral_condition = true;
  bool norm_condition = true;
  bool conditions_agree = true;
  bool exhaustive = true;
  int elements_tested = 0;
  std::optional<WellBehavedElement> spectral_witness;
  std::optional<WellBehavedElement> norm_witness;
};

WellBehavedReport check_well_behaved(const Superoperator& delta,
                                     const WellBehavedOptions& options = {});

struct MatricialWellBehavedReport {
  bool well_behaved = true;
  std::vector<WellBehavedReport> levels;
};

MatricialWellBehavedReport check_matricial_well_behaved(const Superoperator& delta, int n_max,
                                                        const WellBehavedOptions& options = {});

}  // namespace cdlab
