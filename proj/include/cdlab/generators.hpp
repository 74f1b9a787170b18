#pragma once

// Superoperators on a finite-dimensional algebra and the generator
// constructors: commutator derivations, Lindblad-form dissipators, Weyl
// damping, and matricial amplification.

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cdlab/algebra.hpp"

namespace cdlab {

/// A linear map on an algebra, stored as a dense matrix acting on the
/// column-stacked vectorization of elements.
class Superoperator {
 public:
  Superoperator(Algebra algebra, Matrix matrix, std::string label = {},
                std::string origin = {});

  static Superoperator identity(const Algebra& algebra);
  static Superoperator zero(const Algebra& algebra);
  /// Tabulates an arbitrary linear map on the vectorization basis.
  static Superoperator from_map(const Algebra& algebra,
                                const std::function<AlgebraElement(const AlgebraElement&)>& map,
                                std::string label = {});

  const Algebra& algebra() const noexcept { return algebra_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  const std::string& label() const noexcept { return label_; }
  const std::string& origin() const noexcept { return origin_; }

  AlgebraElement operator()(const AlgebraElement& x) const;

  /// Composition: (a * b)(x) = a(b(x)).
  friend Superoperator operator*(const Superoperator& a, const Superoperator& b);
  friend Superoperator operator+(const Superoperator& a, const Superoperator& b);
  friend Superoperator operator-(const Superoperator& a, const Superoperator& b);
  friend Superoperator operator*(Complex s, const Superoperator& a);

 private:
  Algebra algebra_;
  Matrix matrix_;
  std::string label_;
  std::string origin_;
};

AlgebraElement apply_generator(const Superoperator& delta, const AlgebraElement& x);

/// delta(a) = i (H a - a H). H must be hermitian within 1e-12.
Superoperator commutator_derivation(const AlgebraElement& hamiltonian);

/// delta(a) = i[H, a] + sum_k (V_k* a V_k - (V_k* V_k a + a V_k* V_k) / 2).
Superoperator lindblad_generator(const AlgebraElement& hamiltonian,
                                 const std::vector<AlgebraElement>& jumps);

// Finite Weyl system on C^d: W(p, q) = X^p Z^q, X the cyclic shift
// X|j> = |j+1 mod d>, Z = diag(1, z, ..., z^{d-1}) with z = exp(2 pi i / d).
using WeylIndex = std::pair<int, int>;
using WeylWeights = std::map<WeylIndex, double>;

Matrix weyl_operator(int d, int p, int q);

/// c(p, q) = m(p)^2 + m(q)^2 with m(k) = min(k, d - k), the squared length
/// of the minimal representative.
WeylWeights squared_min_length_weights(int d);

/// delta(W(v)) = -c(v) W(v). Missing weights are zero; c(0, 0) must be 0.
Superoperator weyl_damping_generator(int d, const WeylWeights& weights);

/// delta_n on A (x) M_n, acting entrywise on (x_ij). Amplified elements are
/// laid out as block matrices sum_ij E_ij (x) x_ij (outer index from M_n) and
/// stored in the canonical vectorization of Algebra::amplified(n), so
/// amplify(amplify(d, m), n) == amplify(d, m n) with no reordering.
Superoperator amplify_generator(const Superoperator& delta, int n);

/// x (x) 1_n: the block-diagonal element with x on each diagonal block.
AlgebraElement amplify_element(const AlgebraElement& x, int n);

/// Assembles sum_ij E_ij (x) entries[i][j] in Algebra::amplified(n).
AlgebraElement block_matrix(const std::vector<std::vector<AlgebraElement>>& entries);

/// Entry (i, j) of an amplified element.
AlgebraElement block_entry(const AlgebraElement& amplified, const Algebra& base, int n, int i,
                           int j);

struct HermitianMapVerdict {
  bool hermitian = true;
  double max_defect = 0.0;
  int worst_basis_index = -1;
};

/// Checks ||delta(e*) - delta(e)*|| <= tol on the matrix-unit basis.
HermitianMapVerdict is_hermitian_map(const Superoperator& delta, double tol);

/// max ||delta(x y) - delta(x) y - x delta(y)|| over the given pairs.
double leibniz_defect(const Superoperator& delta,
                      const std::vector<std::pair<AlgebraElement, AlgebraElement>>& pairs);

// Frequently used fixed maps.
Superoperator transpose_map(const Algebra& algebra);
/// delta(a) = gamma (tr(a) / d * 1 - a) on M_d.
Superoperator depolarizing_generator(int d, double gamma);

}  // namespace cdlab
