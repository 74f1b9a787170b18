#include "cdlab/dissipativity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cdlab/linalg.hpp"
#include "cdlab/semigroup.hpp"

namespace cdlab {
namespace {

// Slack for norm comparisons: singular values of small dense matrices are
// accurate to a few ulps of the norm.
constexpr double kRoundoffSlack = 1e-13;
constexpr int kMaxRefinements = 40;
constexpr double kRefinementFloor = 1e-7;

struct TopSubspace {
  int block = 0;
  Matrix left;   // columns v_a with x u_a = sigma v_a
  Matrix right;  // columns u_a
};

std::vector<TopSubspace> top_singular_subspaces(const AlgebraElement& x, double norm) {
  std::vector<TopSubspace> out;
  const double cutoff = norm * (1.0 - kDegeneracyThreshold);
  for (int k = 0; k < x.algebra().block_count(); ++k) {
    Eigen::JacobiSVD<Matrix> svd(x.block(k), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int m = 0;
    while (m < s.size() && s(m) >= cutoff) ++m;
    if (m == 0) continue;
    out.push_back({k, svd.matrixU().leftCols(m), svd.matrixV().leftCols(m)});
  }
  return out;
}

double norm_gap(const AlgebraElement& x, const AlgebraElement& dx, double alpha, double nx) {
  return operator_norm(x - dx * Complex(alpha)) - nx;
}

AlgebraElement unit_block_element(const Algebra& base, int n, int k, int i, int j, int a, int b) {
  const AlgebraElement zero = AlgebraElement::zero(base);
  std::vector<std::vector<AlgebraElement>> entries(static_cast<std::size_t>(n),
                                                   std::vector<AlgebraElement>(static_cast<std::size_t>(n), zero));
  std::vector<Matrix> blocks;
  for (int kk = 0; kk < base.block_count(); ++kk) {
    const int d = base.block_dim(kk);
    blocks.push_back(Matrix::Zero(d, d));
  }
  blocks[k](a, b) = 1.0;
  entries[i][j] = AlgebraElement(base, std::move(blocks));
  return block_matrix(entries);
}

}  // namespace

Complex NormingFunctional::operator()(const AlgebraElement& y) const {
  return v.dot(y.block(block) * u);
}

NormingMaximum max_norming_value(const AlgebraElement& x, const AlgebraElement& y) {
  if (!(x.algebra() == y.algebra())) {
    throw Error(ErrorCode::AlgebraMismatch, "norming functional across algebras");
  }
  NormingMaximum best;
  best.value = -std::numeric_limits<double>::infinity();
  best.top_multiplicity = 0;
  const double nx = operator_norm(x);
  if (nx == 0.0) {
    // Every unit functional norms zero; Re f(y) is then bounded by ||y||.
    best.functional.block = 0;
    const int d = x.algebra().block_dim(0);
    best.functional.u = Vector::Unit(d, 0);
    best.functional.v = Vector::Unit(d, 0);
    best.value = operator_norm(y);
    best.top_multiplicity = x.algebra().embedding_dim();
    return best;
  }
  for (const TopSubspace& top : top_singular_subspaces(x, nx)) {
    best.top_multiplicity += static_cast<int>(top.left.cols());
    const Matrix compressed = top.left.adjoint() * y.block(top.block) * top.right;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::hermitian_part(compressed));
    const Eigen::Index last = eig.eigenvalues().size() - 1;
    const double value = eig.eigenvalues()(last);
    if (value > best.value) {
      const Vector c = eig.eigenvectors().col(last);
      best.value = value;
      best.functional.block = top.block;
      best.functional.u = top.right * c;
      best.functional.v = top.left * c;
    }
  }
  return best;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(std::exp2(-10.0 + 0.5 * k));
  return grid;
}

std::vector<double> default_signed_alpha_grid() {
  std::vector<double> grid;
  for (double a : default_alpha_grid()) {
    grid.push_back(a);
    grid.push_back(-a);
  }
  return grid;
}

DissipativityCheck check_dissipative(const Superoperator& delta, const AlgebraElement& x,
                                     std::span<const double> alpha_grid, double tol) {
  if (alpha_grid.empty()) throw Error(ErrorCode::InvalidArgument, "alpha grid is empty");
  for (double a : alpha_grid) {
    if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha grid must be positive");
  }
  DissipativityCheck check;
  const AlgebraElement dx = delta(x);
  const double nx = operator_norm(x);
  const double ndx = operator_norm(dx);
  check.norm_of_x = nx;

  const NormingMaximum nm = max_norming_value(x, dx);
  check.functional_value = nx == 0.0 ? 0.0 : nm.value;
  check.functional = nm.functional;
  check.functional_condition = check.functional_value <= tol * (nx + ndx);

  check.worst_gap = std::numeric_limits<double>::infinity();
  for (double alpha : alpha_grid) {
    const double gap = norm_gap(x, dx, alpha, nx);
    const double slack = kRoundoffSlack * (nx + alpha * ndx);
    if (gap + slack < 0.0) check.norm_condition = false;
    if (gap < check.worst_gap) {
      check.worst_gap = gap;
      check.worst_alpha = alpha;
    }
  }

  // alpha -> ||x - alpha dx|| - ||x|| is convex and vanishes at 0, so gap / alpha
  // is nondecreasing: a violation anywhere persists as alpha -> 0. Halve below
  // the grid until the first-order term drops under the roundoff floor.
  if (check.norm_condition && nx > 0.0 && ndx > 0.0) {
    double alpha = *std::min_element(alpha_grid.begin(), alpha_grid.end());
    for (int k = 0; k < kMaxRefinements && alpha * ndx > kRefinementFloor * nx; ++k) {
      alpha /= 2.0;
      const double gap = norm_gap(x, dx, alpha, nx);
      if (gap + kRoundoffSlack * (nx + alpha * ndx) < 0.0) {
        check.norm_condition = false;
        check.worst_gap = gap;
        check.worst_alpha = alpha;
        break;
      }
    }
  }
  return check;
}

const char* to_string(WitnessKind kind) {
  switch (kind) {
    case WitnessKind::None: return "none";
    case WitnessKind::NormCondition: return "norm-condition";
    case WitnessKind::FunctionalCondition: return "functional-condition";
    case WitnessKind::Contractivity: return "semigroup-contractivity";
  }
  return "unknown";
}

std::vector<AlgebraElement> structured_probe_elements(const Algebra& base, int n) {
  const Algebra amp = base.amplified(n);
  std::vector<AlgebraElement> out;
  out.push_back(AlgebraElement::identity(amp));
  for (int k = 0; k < base.block_count(); ++k) {
    const int m = std::min(n, base.block_dim(k));
    if (m < 2) continue;
    AlgebraElement flip = AlgebraElement::zero(amp);
    AlgebraElement choi = AlgebraElement::zero(amp);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        flip += unit_block_element(base, n, k, i, j, j, i);
        choi += unit_block_element(base, n, k, i, j, i, j);
      }
    }
    out.push_back(std::move(flip));
    out.push_back(std::move(choi));
  }
  return out;
}

DissipativityReport certify_completely_dissipative(const Superoperator& delta,
                                                   const CertifyOptions& options) {
  if (options.n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 1");
  DissipativityReport report;
  report.options = options;
  report.methods = {"norm-condition", "functional-condition", "semigroup-contractivity"};
  const Algebra& base = delta.algebra();
  Sampler sampler(options.seed);

  for (int n = 1; n <= options.n_max; ++n) {
    const Superoperator amp = amplify_generator(delta, n);
    const Algebra& alg = amp.algebra();
    LevelReport level;
    level.n = n;

    std::vector<AlgebraElement> elements;
    for (int c = 0; c < alg.element_dim(); ++c) elements.push_back(AlgebraElement::basis(alg, c));
    for (auto& e : structured_probe_elements(base, n)) elements.push_back(std::move(e));
    for (int s = 0; s < options.sample_count; ++s) {
      elements.push_back(sampler.element(alg, SampleKind::General));
    }
    level.elements_tested = static_cast<int>(elements.size());

    double worst_norm = 0.0;
    double worst_functional = 0.0;
    std::optional<DissipativityCheck> norm_witness;
    std::optional<DissipativityCheck> functional_witness;
    std::optional<AlgebraElement> norm_element;
    std::optional<AlgebraElement> functional_element;

    for (const auto& x : elements) {
      const DissipativityCheck check = check_dissipative(amp, x, options.alpha_grid, options.tol);
      if (!check.agree()) level.methods_agree = false;
      if (!check.norm_condition) {
        level.norm_condition = false;
        if (-check.worst_gap > worst_norm) {
          worst_norm = -check.worst_gap;
          norm_witness = check;
          norm_element = x;
        }
      }
      if (!check.functional_condition) {
        level.functional_condition = false;
        if (check.functional_value > worst_functional) {
          worst_functional = check.functional_value;
          functional_witness = check;
          functional_element = x;
        }
      }
    }

    double worst_growth = 0.0;
    std::optional<AlgebraElement> growth_element;
    double growth_t = 0.0;
    for (double t : options.t_grid) {
      const Superoperator semigroup = exp_generator(amp, t);
      ContractivityProbe probe{t, 0.0, elements.front(), 0.0};
      for (const auto& x : elements) {
        const double nx = operator_norm(x);
        if (nx == 0.0) continue;
        const double after = operator_norm(semigroup(x));
        if (after / nx > probe.max_ratio) {
          probe.max_ratio = after / nx;
          probe.element = x;
          probe.norm_after = after;
        }
        const double growth = after - nx;
        if (growth > options.tol * std::max(1.0, nx)) {
          level.contractivity = false;
          if (growth > worst_growth) {
            worst_growth = growth;
            growth_element = x;
            growth_t = t;
          }
        }
      }
      level.probes.push_back(std::move(probe));
    }

    level.passed = level.norm_condition && level.functional_condition && level.contractivity;
    if (!level.norm_condition) {
      level.witness_kind = WitnessKind::NormCondition;
      level.witness_element = norm_element;
      level.witness_alpha = norm_witness->worst_alpha;
      level.violation = worst_norm;
    } else if (!level.functional_condition) {
      level.witness_kind = WitnessKind::FunctionalCondition;
      level.witness_element = functional_element;
      level.witness_functional = functional_witness->functional;
      level.violation = worst_functional;
    } else if (!level.contractivity) {
      level.witness_kind = WitnessKind::Contractivity;
      level.witness_element = growth_element;
      level.witness_t = growth_t;
      level.violation = worst_growth;
    }
    report.passed = report.passed && level.passed;
    report.levels.push_back(std::move(level));
  }

  std::ostringstream scope;
  scope << "verified up to n = " << options.n_max << " (sampled elements, exact contractivity probe)";
  if (base.is_single_block() && options.n_max >= base.block_dim(0)) {
    scope << "; n_max >= d = " << base.block_dim(0)
          << ", which suffices for complete positivity of maps into M_d";
  }
  report.scope = scope.str();
  return report;
}

double reproduce_violation(const Superoperator& delta, const LevelReport& level) {
  if (level.witness_kind == WitnessKind::None || !level.witness_element) return 0.0;
  const Superoperator amp = amplify_generator(delta, level.n);
  const AlgebraElement& x = *level.witness_element;
  const double nx = operator_norm(x);
  switch (level.witness_kind) {
    case WitnessKind::NormCondition:
      return -norm_gap(x, amp(x), level.witness_alpha, nx);
    case WitnessKind::FunctionalCondition:
      return (*level.witness_functional)(amp(x)).real();
    case WitnessKind::Contractivity:
      return operator_norm(exp_generator(amp, level.witness_t)(x)) - nx;
    case WitnessKind::None:
      break;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

DissipationInequalityVerdict check_dissipation_inequality(const Superoperator& delta,
                                                          const AlgebraElement& x, double tol) {
  const AlgebraElement one = AlgebraElement::identity(delta.algebra());
  const double unit_defect = operator_norm(delta(one));
  if (unit_defect > tol) {
    std::ostringstream os;
    os << "delta(1) != 0 (norm " << unit_defect << "); the inequality presumes a unital kernel";
    throw Error(ErrorCode::HypothesisViolation, os.str());
  }
  const AlgebraElement dx = delta(x);
  AlgebraElement diff = delta(x.adjoint() * x) - dx.adjoint() * x - x.adjoint() * dx;
  PositivityVerdict positivity = is_positive(diff, tol);
  return {positivity.positive, std::move(diff), std::move(positivity)};
}

// ---------------------------------------------------------------------------
// Well-behavedness

namespace {

WellBehavedElement check_well_behaved_element(const Superoperator& delta, const AlgebraElement& a,
                                              std::span<const double> alphas, double tol,
                                              Sampler& sampler) {
  WellBehavedElement out{a, true, true, 0.0, Vector(), 0, true, 0.0, 0.0};
  const AlgebraElement da = delta(a);
  const double na = operator_norm(a);
  const double nda = operator_norm(da);
  const double scale = tol * (na + nda);

  // Spectral extreme: pure states on the top eigenspace of a.
  struct Compression {
    int block;
    Matrix basis;
    Matrix c;
  };
  std::vector<Compression> compressions;
  double top = -std::numeric_limits<double>::infinity();
  std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> eigs;
  for (int k = 0; k < a.algebra().block_count(); ++k) {
    eigs.emplace_back(linalg::hermitian_part(a.block(k)));
    top = std::max(top, eigs.back().eigenvalues()(eigs.back().eigenvalues().size() - 1));
  }
  const double cutoff = top - kDegeneracyThreshold * std::max(na, 1e-300);
  out.top_multiplicity = 0;
  bool all_hermitian = true;
  for (int k = 0; k < a.algebra().block_count(); ++k) {
    const auto& values = eigs[k].eigenvalues();
    int m = 0;
    while (m < values.size() && values(values.size() - 1 - m) >= cutoff) ++m;
    if (m == 0) continue;
    Matrix basis = eigs[k].eigenvectors().rightCols(m);
    Matrix c = basis.adjoint() * da.block(k) * basis;
    if ((c - c.adjoint()).norm() > scale) all_hermitian = false;
    out.top_multiplicity += m;
    compressions.push_back({k, std::move(basis), std::move(c)});
  }

  if (out.top_multiplicity == 1) {
    const auto& comp = compressions.front();
    out.spectral_value = std::abs(comp.c(0, 0));
    out.extreme_vector = comp.basis.col(0);
    out.spectral_condition = out.spectral_value <= scale;
  } else if (all_hermitian) {
    // States on the eigenspace give the interval [min, max] of the
    // compressed spectra; zero must lie in it.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& comp : compressions) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(linalg::hermitian_part(comp.c));
      const auto& v = eig.eigenvalues();
      const double l = v(0);
      const double h = v(v.size() - 1);
      lo = std::min(lo, l);
      hi = std::max(hi, h);
      double value;
      Vector vec;
      if (l <= 0.0 && h >= 0.0) {
        // cos^2 l + sin^2 h = 0 mixes the two extreme eigenvectors.
        const double w = (h - l) > 0.0 ? h / (h - l) : 1.0;
        vec = std::sqrt(w) * eig.eigenvectors().col(0) +
              std::sqrt(1.0 - w) * eig.eigenvectors().col(v.size() - 1);
        value = 0.0;
      } else if (l > 0.0) {
        vec = eig.eigenvectors().col(0);
        value = l;
      } else {
        vec = eig.eigenvectors().col(v.size() - 1);
        value = -h;
      }
      if (out.extreme_vector.size() == 0 || value < out.spectral_value) {
        out.spectral_value = value;
        out.extreme_vector = comp.basis * vec;
      }
    }
    if (lo <= 0.0 && hi >= 0.0) out.spectral_value = 0.0;
    out.spectral_condition = lo <= scale && hi >= -scale;
  } else {
    // Non-hermitian compression: sampled pure states only.
    out.exhaustive = false;
    out.spectral_value = std::numeric_limits<double>::infinity();
    for (const auto& comp : compressions) {
      const int m = static_cast<int>(comp.c.rows());
      for (int s = 0; s < 20; ++s) {
        const Vector psi = sampler.unit_vector(m);
        const double value = std::abs(psi.dot(comp.c * psi));
        if (value < out.spectral_value) {
          out.spectral_value = value;
          out.extreme_vector = comp.basis * psi;
        }
      }
    }
    out.spectral_condition = out.spectral_value <= scale;
  }

  // ||a + alpha delta(a)|| >= ||a|| for alphas of both signs.
  out.worst_gap = std::numeric_limits<double>::infinity();
  for (double alpha : alphas) {
    const double gap = operator_norm(a + da * Complex(alpha)) - na;
    if (gap < -tol * (na + std::abs(alpha) * nda)) out.norm_condition = false;
    if (gap < out.worst_gap) {
      out.worst_gap = gap;
      out.worst_alpha = alpha;
    }
  }
  return out;
}

WellBehavedReport run_well_behaved(const Superoperator& delta,
                                   const std::vector<AlgebraElement>& extras,
                                   const WellBehavedOptions& options) {
  WellBehavedReport report;
  Sampler sampler(options.seed);
  std::vector<AlgebraElement> elements = extras;
  for (int s = 0; s < options.sample_count; ++s) {
    elements.push_back(sampler.element(delta.algebra(), SampleKind::Positive));
  }
  for (const auto& a : elements) {
    if (!(a.algebra() == delta.algebra())) {
      throw Error(ErrorCode::AlgebraMismatch, "test element from a different algebra");
    }
    WellBehavedElement e =
        check_well_behaved_element(delta, a, options.alpha_grid_signed, options.tol, sampler);
    ++report.elements_tested;
    if (!e.exhaustive) report.exhaustive = false;
    if (e.spectral_condition != e.norm_condition) report.conditions_agree = false;
    if (!e.spectral_condition && report.spectral_condition) {
      report.spectral_condition = false;
      report.spectral_witness = e;
    }
    if (!e.norm_condition && report.norm_condition) {
      report.norm_condition = false;
      report.norm_witness = e;
    }
  }
  report.well_behaved = report.spectral_condition && report.norm_condition;
  return report;
}

}  // namespace

WellBehavedReport check_well_behaved(const Superoperator& delta, const WellBehavedOptions& options) {
  return run_well_behaved(delta, options.extra_elements, options);
}

MatricialWellBehavedReport check_matricial_well_behaved(const Superoperator& delta, int n_max,
                                                        const WellBehavedOptions& options) {
  if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 1");
  MatricialWellBehavedReport report;
  for (int n = 1; n <= n_max; ++n) {
    const Superoperator amp = amplify_generator(delta, n);
    std::vector<AlgebraElement> extras;
    for (const auto& x : options.extra_elements) extras.push_back(amplify_element(x, n));
    WellBehavedReport level = run_well_behaved(amp, extras, options);
    report.well_behaved = report.well_behaved && level.well_behaved;
    report.levels.push_back(std::move(level));
  }
  return report;
}

}  // namespace cdlab
