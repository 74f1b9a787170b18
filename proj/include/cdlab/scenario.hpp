#pragma once

// Scenario files and JSON encodings of elements, operators and reports.
//
// Complex numbers are [re, im]; matrices are row-major nested arrays of
// complex numbers. An element is a matrix (single-block algebras) or
// {"blocks": [matrix, ...]}.

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cdlab/dissipativity.hpp"
#include "cdlab/gns.hpp"
#include "cdlab/lattice.hpp"
#include "cdlab/semigroup.hpp"

namespace cdlab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "cdlab";
inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Encoding

Json to_json(Complex z);
Json to_json(const Matrix& m);
Json vector_to_json(const Vector& v);
Json to_json(const AlgebraElement& x);

/// Parsers name the failing location as a JSON pointer in Error::what().
Complex complex_from_json(const Json& j, const std::string& path);
Matrix matrix_from_json(const Json& j, const std::string& path);
Vector vector_from_json(const Json& j, const std::string& path);
AlgebraElement element_from_json(const Json& j, const Algebra& algebra, const std::string& path);

// ---------------------------------------------------------------------------
// Scenario

struct GeneratorSpec {
  /// commutator | lindblad | weyl | superoperator
  std::string type;
  std::optional<AlgebraElement> hamiltonian;
  std::vector<AlgebraElement> jump_ops;
  int weyl_d = 0;
  /// Empty means the squared-minimal-length weights.
  std::vector<std::tuple<int, int, double>> weyl_weights;
  /// Explicit matrix on vectorized elements (column stacking per block).
  std::optional<Matrix> superoperator;
};

struct LatticeSpec {
  int q = 2;
  std::vector<InteractionTerm> terms;
  std::vector<ExplicitTerm> explicit_terms;
  int lo = 0;
  int hi = 0;
  /// Convergence diagnostic around `site`: single-site observable, radii, time.
  std::optional<std::string> diagnostic_observable;
  int diagnostic_site = 0;
  std::vector<int> diagnostic_radii = {1, 2, 3};
  double diagnostic_t = 0.2;
  double derivative_t = 0.1;
  double ruelle_lambda = 1.0;
};

struct StateSpec {
  /// trace | density | pure
  std::string type = "trace";
  std::vector<Matrix> densities;
  std::vector<double> weights;
  int block = 0;
  Vector vector;
};

struct RunSpec {
  std::vector<double> t_grid = {0.1, 0.5, 1.0, 2.0};
  std::vector<double> alpha_grid = default_alpha_grid();
  int n_max = 4;
  int sample_count = 20;
  std::uint64_t seed = 0;
  double tol = 1e-9;
};

struct Scenario {
  std::vector<int> blocks;
  std::optional<GeneratorSpec> generator;
  std::optional<LatticeSpec> lattice;
  std::optional<StateSpec> state;
  std::vector<std::pair<std::string, AlgebraElement>> observables;
  RunSpec run;

  Algebra algebra() const;
  std::optional<LatticeRegion> region() const;
};

bool operator==(const Scenario& a, const Scenario& b);

Scenario parse_scenario(const Json& j);
/// Throws InvalidArgument for a missing or unreadable file, Schema for
/// malformed JSON.
Scenario load_scenario(const std::string& path);
Json serialize_scenario(const Scenario& s);

Superoperator build_generator(const Scenario& s);
State build_state(const Scenario& s);
Interaction build_interaction(const LatticeSpec& spec);

/// Scenario observables first, then builtins: identity, sigma_x/y/z on M_2,
/// sigma_{x,y,z}@k on q = 2 lattices. Throws InvalidArgument when unknown.
AlgebraElement resolve_observable(const Scenario& s, const std::string& label);

// ---------------------------------------------------------------------------
// Reports

Json report_header(const Scenario& s, const std::string& command);
Json to_json(const DissipativityReport& r);
Json to_json(const CpVerdict& v);
Json to_json(const PositivityProbe& p);
Json to_json(const PipelineReport& r);
Json to_json(const RuelleBound& r);
Json to_json(const ConvergenceDiagnostic& d);

/// "t,observable,re_i_j,im_i_j,..." (re_k_i_j for several blocks) with
/// values printed as %.17g.
std::string trajectory_csv_header(const Algebra& algebra);
std::string trajectory_csv_row(double t, const std::string& label, const AlgebraElement& x);

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace cdlab
