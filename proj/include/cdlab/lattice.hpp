#pragma once

// One-dimensional quantum spin chains: interactions, local Hamiltonians,
// the Ruelle summability bound and finite-volume dynamics.
//
// Site lo of a region is the leftmost (most significant) tensor factor.

#include <cstddef>
#include <vector>

#include "cdlab/algebra.hpp"

namespace cdlab {

/// Sites lo..hi of a chain, each carrying C^q.
class LatticeRegion {
 public:
  LatticeRegion(int lo, int hi, int q, std::size_t cap = kDefaultElementCap);

  int lo() const noexcept { return lo_; }
  int hi() const noexcept { return hi_; }
  int q() const noexcept { return q_; }
  int size() const noexcept { return hi_ - lo_ + 1; }
  /// q^size.
  int dim() const noexcept { return dim_; }
  bool contains(int site) const noexcept { return lo_ <= site && site <= hi_; }
  bool contains(const LatticeRegion& other) const noexcept {
    return lo_ <= other.lo_ && other.hi_ <= hi_;
  }
  /// M_{q^size}. Lattice observables never form superoperators, so the
  /// element cap is lifted to dim^2 here.
  Algebra algebra() const;

  friend bool operator==(const LatticeRegion&, const LatticeRegion&) = default;

 private:
  int lo_;
  int hi_;
  int q_;
  int dim_;
};

/// Translation-invariant term: matrix placed on {s + o : o in offsets} for
/// every s. Offsets are stored sorted and shifted so the smallest is 0.
struct InteractionTerm {
  std::vector<int> offsets;
  Matrix matrix;
};

/// Term on a fixed set of absolute sites (sorted, distinct).
struct ExplicitTerm {
  std::vector<int> sites;
  Matrix matrix;
};

class Interaction {
 public:
  explicit Interaction(int q, std::vector<InteractionTerm> terms = {},
                       std::vector<ExplicitTerm> explicit_terms = {});

  int q() const noexcept { return q_; }
  const std::vector<InteractionTerm>& terms() const noexcept { return terms_; }
  const std::vector<ExplicitTerm>& explicit_terms() const noexcept { return explicit_; }
  bool translation_invariant() const noexcept { return explicit_.empty(); }
  /// Largest offset span over the translation-invariant terms.
  int range() const;

 private:
  int q_;
  std::vector<InteractionTerm> terms_;
  std::vector<ExplicitTerm> explicit_;
};

/// J sz sz on neighbours plus h sx on every site (q = 2).
Interaction transverse_field_ising(double j, double h);

/// `local` acting on the given absolute sites of `region`, identity elsewhere.
/// The first listed site is the most significant factor of `local`.
Matrix embed_local(const Matrix& local, const std::vector<int>& sites,
                   const LatticeRegion& region);

/// H(region): every placement of every term whose support lies in region.
AlgebraElement local_hamiltonian(const Interaction& phi, const LatticeRegion& region);

struct RuelleBound {
  /// sum_{n <= n_max} exp(n lambda) contributions[n].
  double value = 0.0;
  /// contributions[n] = sup_s sum_{X containing s, |X| = n + 1} ||Phi(X)||.
  std::vector<double> contributions;
  /// Weighted sum of contributions beyond n_max.
  double tail = 0.0;
  /// True when tail == 0, i.e. the truncation is exact.
  bool exact = true;
};

/// Rejects interactions with explicit terms.
RuelleBound ruelle_bound(const Interaction& phi, double lambda, int n_max);

/// a (x) 1 on the sites of outer not in inner.
AlgebraElement embed_observable(const AlgebraElement& a, const LatticeRegion& inner,
                                const LatticeRegion& outer);

/// exp(i t H) a exp(-i t H) from one eigendecomposition of H(region).
class FiniteVolumeDynamics {
 public:
  FiniteVolumeDynamics(const Interaction& phi, const LatticeRegion& region);

  const LatticeRegion& region() const noexcept { return region_; }
  const AlgebraElement& hamiltonian() const noexcept { return hamiltonian_; }
  Matrix unitary(double t) const;
  AlgebraElement evolve(const AlgebraElement& a, double t) const;

 private:
  LatticeRegion region_;
  AlgebraElement hamiltonian_;
  Eigen::VectorXd energies_;
  Matrix eigenvectors_;
};

AlgebraElement finite_volume_dynamics(const Interaction& phi, const LatticeRegion& region, double t,
                                      const AlgebraElement& a);

struct ConvergenceDiagnostic {
  /// gaps[k] = ||alpha_t^{k+1}(a) - alpha_t^{k}(a)|| inside volumes[k + 1].
  std::vector<double> gaps;
  /// Gaps strictly decreasing, or all zero to roundoff.
  bool approximately_inner = false;
};

/// `a` lives on `support`; each volume must contain it and the volumes must be
/// nested and increasing.
ConvergenceDiagnostic convergence_diagnostic(const Interaction& phi, const AlgebraElement& a,
                                             const LatticeRegion& support, double t,
                                             const std::vector<LatticeRegion>& volumes);

/// ||(alpha_t(a) - a) / t - i[H, a]||, a given on region.
double derivative_check(const Interaction& phi, const LatticeRegion& region,
                        const AlgebraElement& a, double t);

/// Pauli sx/sy/sz on one site of a q = 2 region.
AlgebraElement pauli_at(char axis, int site, const LatticeRegion& region);

}  // namespace cdlab
