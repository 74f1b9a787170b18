#include "cdlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cdlab/linalg.hpp"

namespace cdlab {
namespace {

constexpr double kHermitianTermTol = 1e-12;

int checked_power(int q, int k, std::size_t cap) {
  std::size_t d = 1;
  for (int i = 0; i < k; ++i) {
    d *= static_cast<std::size_t>(q);
    if (d > cap) {
      std::ostringstream os;
      os << "state dimension " << q << "^" << k << " exceeds cap " << cap;
      throw Error(ErrorCode::CapExceeded, os.str());
    }
  }
  return static_cast<int>(d);
}

void validate_term_matrix(const Matrix& m, int q, std::size_t support, const char* what) {
  const int expected = checked_power(q, static_cast<int>(support), kDefaultElementCap);
  if (m.rows() != expected || m.cols() != expected) {
    std::ostringstream os;
    os << what << " matrix is " << m.rows() << "x" << m.cols() << ", expected " << expected
       << "x" << expected;
    throw Error(ErrorCode::AlgebraMismatch, os.str());
  }
  const double defect = linalg::spectral_norm(m - m.adjoint());
  if (defect > kHermitianTermTol) {
    std::ostringstream os;
    os << what << " matrix is not hermitian (defect " << defect << ")";
    throw Error(ErrorCode::NotHermitian, os.str());
  }
}

void require_sorted_distinct(const std::vector<int>& v, const char* what) {
  if (v.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is empty");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] <= v[i - 1]) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be sorted and distinct");
    }
  }
}

Matrix commutator(const Matrix& h, const Matrix& a) { return h * a - a * h; }

}  // namespace

LatticeRegion::LatticeRegion(int lo, int hi, int q, std::size_t cap) : lo_(lo), hi_(hi), q_(q) {
  if (lo > hi) throw Error(ErrorCode::InvalidArgument, "region needs lo <= hi");
  if (q < 2) throw Error(ErrorCode::InvalidArgument, "site dimension q must be >= 2");
  dim_ = checked_power(q, hi - lo + 1, cap);
}

Algebra LatticeRegion::algebra() const {
  return Algebra({dim_}, static_cast<std::size_t>(dim_) * static_cast<std::size_t>(dim_));
}

Interaction::Interaction(int q, std::vector<InteractionTerm> terms,
                         std::vector<ExplicitTerm> explicit_terms)
    : q_(q), terms_(std::move(terms)), explicit_(std::move(explicit_terms)) {
  if (q < 2) throw Error(ErrorCode::InvalidArgument, "site dimension q must be >= 2");
  for (auto& term : terms_) {
    std::sort(term.offsets.begin(), term.offsets.end());
    require_sorted_distinct(term.offsets, "term offsets");
    const int shift = term.offsets.front();
    for (int& o : term.offsets) o -= shift;
    validate_term_matrix(term.matrix, q, term.offsets.size(), "interaction term");
  }
  for (const auto& term : explicit_) {
    require_sorted_distinct(term.sites, "explicit term sites");
    validate_term_matrix(term.matrix, q, term.sites.size(), "explicit term");
  }
}

int Interaction::range() const {
  int r = 0;
  for (const auto& term : terms_) r = std::max(r, term.offsets.back());
  return r;
}

Interaction transverse_field_ising(double j, double h) {
  std::vector<InteractionTerm> terms;
  terms.push_back({{0, 1}, j * linalg::kron(sigma_z(), sigma_z())});
  terms.push_back({{0}, h * sigma_x()});
  return Interaction(2, std::move(terms));
}

Matrix embed_local(const Matrix& local, const std::vector<int>& sites,
                   const LatticeRegion& region) {
  const int q = region.q();
  const int n = region.size();
  const int k = static_cast<int>(sites.size());
  for (int s : sites) {
    if (!region.contains(s)) {
      std::ostringstream os;
      os << "site " << s << " outside region [" << region.lo() << ", " << region.hi() << "]";
      throw Error(ErrorCode::InvalidArgument, os.str());
    }
  }
  const int local_dim = static_cast<int>(local.rows());
  if (local_dim != checked_power(q, k, kDefaultElementCap) || local.cols() != local_dim) {
    throw Error(ErrorCode::AlgebraMismatch, "local matrix does not match its site count");
  }
  // stride[i]: place value of site sites[i] in the region index.
  std::vector<int> stride(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    int p = 1;
    for (int e = 0; e < n - 1 - (sites[i] - region.lo()); ++e) p *= q;
    stride[i] = p;
  }
  auto local_index = [&](int full) {
    int idx = 0;
    for (int i = 0; i < k; ++i) idx = idx * q + (full / stride[i]) % q;
    return idx;
  };
  auto clear_local = [&](int full) {
    for (int i = 0; i < k; ++i) full -= ((full / stride[i]) % q) * stride[i];
    return full;
  };
  auto with_local = [&](int base, int idx) {
    for (int i = k - 1; i >= 0; --i) {
      base += (idx % q) * stride[i];
      idx /= q;
    }
    return base;
  };

  const int dim = region.dim();
  Matrix out = Matrix::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const int lr = local_index(r);
    const int base = clear_local(r);
    for (int lc = 0; lc < local_dim; ++lc) {
      const Complex v = local(lr, lc);
      if (v != Complex(0.0)) out(r, with_local(base, lc)) = v;
    }
  }
  return out;
}

AlgebraElement local_hamiltonian(const Interaction& phi, const LatticeRegion& region) {
  if (phi.q() != region.q()) throw Error(ErrorCode::AlgebraMismatch, "site dimensions differ");
  Matrix h = Matrix::Zero(region.dim(), region.dim());
  for (const auto& term : phi.terms()) {
    for (int s = region.lo(); s + term.offsets.back() <= region.hi(); ++s) {
      std::vector<int> sites;
      for (int o : term.offsets) sites.push_back(s + o);
      h += embed_local(term.matrix, sites, region);
    }
  }
  for (const auto& term : phi.explicit_terms()) {
    if (region.contains(term.sites.front()) && region.contains(term.sites.back())) {
      h += embed_local(term.matrix, term.sites, region);
    }
  }
  return AlgebraElement(region.algebra(), {std::move(h)});
}

RuelleBound ruelle_bound(const Interaction& phi, double lambda, int n_max) {
  if (!phi.translation_invariant()) {
    throw Error(ErrorCode::UnsupportedStructure,
                "Ruelle bound needs a translation-invariant interaction");
  }
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be > 0");
  if (n_max < 0) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 0");

  // Phi(X) sums every term whose pattern lands on X. A pattern with n + 1
  // sites has n + 1 placements containing a given site, all with equal norm.
  std::map<std::vector<int>, Matrix> by_pattern;
  for (const auto& term : phi.terms()) {
    auto [it, inserted] = by_pattern.try_emplace(term.offsets, term.matrix);
    if (!inserted) it->second += term.matrix;
  }
  RuelleBound bound;
  bound.contributions.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (const auto& [pattern, matrix] : by_pattern) {
    const int n = static_cast<int>(pattern.size()) - 1;
    const double c = static_cast<double>(n + 1) * linalg::spectral_norm(matrix);
    const double weighted = std::exp(n * lambda) * c;
    if (n <= n_max) {
      bound.contributions[static_cast<std::size_t>(n)] += c;
    } else {
      bound.tail += weighted;
    }
  }
  for (int n = 0; n <= n_max; ++n) {
    bound.value += std::exp(n * lambda) * bound.contributions[static_cast<std::size_t>(n)];
  }
  bound.exact = bound.tail == 0.0;
  return bound;
}

AlgebraElement embed_observable(const AlgebraElement& a, const LatticeRegion& inner,
                                const LatticeRegion& outer) {
  if (inner.q() != outer.q()) throw Error(ErrorCode::AlgebraMismatch, "site dimensions differ");
  if (!outer.contains(inner)) {
    throw Error(ErrorCode::InvalidArgument, "embedding needs nested regions");
  }
  if (!a.algebra().is_single_block() || a.algebra().block_dim(0) != inner.dim()) {
    throw Error(ErrorCode::AlgebraMismatch, "observable does not live on the inner region");
  }
  std::vector<int> sites;
  for (int s = inner.lo(); s <= inner.hi(); ++s) sites.push_back(s);
  return AlgebraElement(outer.algebra(), {embed_local(a.block(0), sites, outer)});
}

FiniteVolumeDynamics::FiniteVolumeDynamics(const Interaction& phi, const LatticeRegion& region)
    : region_(region), hamiltonian_(local_hamiltonian(phi, region)) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::hermitian_part(hamiltonian_.block(0)));
  energies_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
}

Matrix FiniteVolumeDynamics::unitary(double t) const {
  const Vector phases =
      (Complex(0.0, t) * energies_.cast<Complex>()).array().exp().matrix();
  return eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
}

AlgebraElement FiniteVolumeDynamics::evolve(const AlgebraElement& a, double t) const {
  if (!(a.algebra() == region_.algebra())) {
    throw Error(ErrorCode::AlgebraMismatch, "observable does not live on the region");
  }
  if (t == 0.0) return a;
  const Matrix u = unitary(t);
  return AlgebraElement(region_.algebra(), {u * a.block(0) * u.adjoint()});
}

AlgebraElement finite_volume_dynamics(const Interaction& phi, const LatticeRegion& region, double t,
                                      const AlgebraElement& a) {
  return FiniteVolumeDynamics(phi, region).evolve(a, t);
}

ConvergenceDiagnostic convergence_diagnostic(const Interaction& phi, const AlgebraElement& a,
                                             const LatticeRegion& support, double t,
                                             const std::vector<LatticeRegion>& volumes) {
  if (volumes.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two volumes");
  for (std::size_t k = 0; k < volumes.size(); ++k) {
    if (!volumes[k].contains(support)) {
      throw Error(ErrorCode::InvalidArgument, "volume does not contain the observable support");
    }
    if (k > 0 && (!volumes[k].contains(volumes[k - 1]) || volumes[k] == volumes[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "volumes must be nested and increasing");
    }
  }
  ConvergenceDiagnostic out;
  AlgebraElement previous =
      FiniteVolumeDynamics(phi, volumes[0]).evolve(embed_observable(a, support, volumes[0]), t);
  for (std::size_t k = 1; k < volumes.size(); ++k) {
    AlgebraElement current =
        FiniteVolumeDynamics(phi, volumes[k]).evolve(embed_observable(a, support, volumes[k]), t);
    out.gaps.push_back(
        distance(current, embed_observable(previous, volumes[k - 1], volumes[k])));
    previous = std::move(current);
  }
  const double scale = std::max(1.0, operator_norm(a));
  const bool all_zero = std::all_of(out.gaps.begin(), out.gaps.end(),
                                    [&](double g) { return g <= 1e-12 * scale; });
  bool decreasing = true;
  for (std::size_t k = 1; k < out.gaps.size(); ++k) {
    if (!(out.gaps[k] < out.gaps[k - 1])) decreasing = false;
  }
  out.approximately_inner = all_zero || decreasing;
  return out;
}

double derivative_check(const Interaction& phi, const LatticeRegion& region,
                        const AlgebraElement& a, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be > 0");
  const FiniteVolumeDynamics dyn(phi, region);
  const Matrix quotient = (dyn.evolve(a, t).block(0) - a.block(0)) / t;
  const Matrix generator = Complex(0.0, 1.0) * commutator(dyn.hamiltonian().block(0), a.block(0));
  return linalg::spectral_norm(quotient - generator);
}

AlgebraElement pauli_at(char axis, int site, const LatticeRegion& region) {
  if (region.q() != 2) throw Error(ErrorCode::InvalidArgument, "Pauli observables need q = 2");
  Matrix p;
  switch (axis) {
    case 'x': p = sigma_x(); break;
    case 'y': p = sigma_y(); break;
    case 'z': p = sigma_z(); break;
    default: throw Error(ErrorCode::InvalidArgument, std::string("unknown Pauli axis ") + axis);
  }
  return AlgebraElement(region.algebra(), {embed_local(p, {site}, region)});
}

}  // namespace cdlab
