#include "cdlab/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "cdlab/linalg.hpp"

namespace cdlab {
namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Schema, "schema error at " + (path.empty() ? "/" : path) + ": " + what);
}

[[noreturn]] void dimension_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::AlgebraMismatch,
              "dimension mismatch at " + (path.empty() ? "/" : path) + ": " + what);
}

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

void require_object(const Json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) schema_error(path, "expected an object");
  std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.count(key)) schema_error(child(path, key), "unknown field");
  }
}

const Json& field(const Json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) schema_error(child(path, key), "required field is missing");
  return j.at(key);
}

const Json& require_array(const Json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array");
  return j;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "expected an integer");
  return j.get<int>();
}

std::string string_field(const Json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

std::vector<int> int_list(const Json& j, const std::string& path) {
  std::vector<int> out;
  require_array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], child(path, i)));
  return out;
}

std::vector<double> number_list(const Json& j, const std::string& path) {
  std::vector<double> out;
  require_array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], child(path, i)));
  return out;
}

void require_square(const Matrix& m, int d, const std::string& path) {
  if (m.rows() != d || m.cols() != d) {
    std::ostringstream os;
    os << "matrix is " << m.rows() << "x" << m.cols() << ", expected " << d << "x" << d;
    dimension_error(path, os.str());
  }
}

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool same_element(const AlgebraElement& a, const AlgebraElement& b) {
  if (!(a.algebra() == b.algebra())) return false;
  for (int k = 0; k < a.algebra().block_count(); ++k) {
    if (!same_matrix(a.block(k), b.block(k))) return false;
  }
  return true;
}

template <class T, class Eq>
bool same_list(const std::vector<T>& a, const std::vector<T>& b, Eq eq) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!eq(a[i], b[i])) return false;
  }
  return true;
}

template <class T, class Eq>
bool same_optional(const std::optional<T>& a, const std::optional<T>& b, Eq eq) {
  if (a.has_value() != b.has_value()) return false;
  return !a || eq(*a, *b);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Encoding

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

Json to_json(const AlgebraElement& x) {
  if (x.algebra().is_single_block()) return to_json(x.block(0));
  Json blocks = Json::array();
  for (const auto& b : x.blocks()) blocks.push_back(to_json(b));
  return Json{{"blocks", std::move(blocks)}};
}

Complex complex_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) {
    schema_error(path, "complex entry must be [re, im]");
  }
  return {number(j[0], child(path, std::size_t{0})), number(j[1], child(path, std::size_t{1}))};
}

Matrix matrix_from_json(const Json& j, const std::string& path) {
  require_array(j, path);
  if (j.empty()) schema_error(path, "matrix has no rows");
  const std::size_t rows = j.size();
  const std::size_t cols = require_array(j[0], child(path, std::size_t{0})).size();
  if (cols == 0) schema_error(child(path, std::size_t{0}), "matrix row is empty");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = child(path, r);
    require_array(j[r], rp);
    if (j[r].size() != cols) schema_error(rp, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complex_from_json(j[r][c], child(rp, c));
    }
  }
  return m;
}

Vector vector_from_json(const Json& j, const std::string& path) {
  require_array(j, path);
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i], child(path, i));
  }
  return v;
}

AlgebraElement element_from_json(const Json& j, const Algebra& algebra, const std::string& path) {
  std::vector<Matrix> blocks;
  if (j.is_object()) {
    require_object(j, path, {"blocks"});
    const Json& list = require_array(field(j, path, "blocks"), child(path, "blocks"));
    if (static_cast<int>(list.size()) != algebra.block_count()) {
      dimension_error(child(path, "blocks"), "expected " + std::to_string(algebra.block_count()) +
                                                 " blocks, got " + std::to_string(list.size()));
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string bp = child(child(path, "blocks"), k);
      Matrix m = matrix_from_json(list[k], bp);
      require_square(m, algebra.block_dim(static_cast<int>(k)), bp);
      blocks.push_back(std::move(m));
    }
  } else {
    if (!algebra.is_single_block()) {
      dimension_error(path, "the algebra has several blocks; use {\"blocks\": [...]}");
    }
    Matrix m = matrix_from_json(j, path);
    require_square(m, algebra.block_dim(0), path);
    blocks.push_back(std::move(m));
  }
  return AlgebraElement(algebra, std::move(blocks));
}

// ---------------------------------------------------------------------------
// Scenario

Algebra Scenario::algebra() const {
  if (auto r = region()) return r->algebra();
  return Algebra(blocks);
}

std::optional<LatticeRegion> Scenario::region() const {
  if (!lattice) return std::nullopt;
  return LatticeRegion(lattice->lo, lattice->hi, lattice->q);
}

bool operator==(const Scenario& a, const Scenario& b) {
  auto gen_eq = [](const GeneratorSpec& x, const GeneratorSpec& y) {
    return x.type == y.type && same_optional(x.hamiltonian, y.hamiltonian, same_element) &&
           same_list(x.jump_ops, y.jump_ops, same_element) && x.weyl_d == y.weyl_d &&
           x.weyl_weights == y.weyl_weights &&
           same_optional(x.superoperator, y.superoperator, same_matrix);
  };
  auto term_eq = [](const InteractionTerm& x, const InteractionTerm& y) {
    return x.offsets == y.offsets && same_matrix(x.matrix, y.matrix);
  };
  auto explicit_eq = [](const ExplicitTerm& x, const ExplicitTerm& y) {
    return x.sites == y.sites && same_matrix(x.matrix, y.matrix);
  };
  auto lattice_eq = [&](const LatticeSpec& x, const LatticeSpec& y) {
    return x.q == y.q && same_list(x.terms, y.terms, term_eq) &&
           same_list(x.explicit_terms, y.explicit_terms, explicit_eq) && x.lo == y.lo &&
           x.hi == y.hi && x.diagnostic_observable == y.diagnostic_observable &&
           x.diagnostic_site == y.diagnostic_site && x.diagnostic_radii == y.diagnostic_radii &&
           x.diagnostic_t == y.diagnostic_t && x.derivative_t == y.derivative_t &&
           x.ruelle_lambda == y.ruelle_lambda;
  };
  auto state_eq = [](const StateSpec& x, const StateSpec& y) {
    return x.type == y.type && same_list(x.densities, y.densities, same_matrix) &&
           x.weights == y.weights && x.block == y.block &&
           x.vector.size() == y.vector.size() && x.vector == y.vector;
  };
  auto obs_eq = [](const std::pair<std::string, AlgebraElement>& x,
                   const std::pair<std::string, AlgebraElement>& y) {
    return x.first == y.first && same_element(x.second, y.second);
  };
  const RunSpec& r = a.run;
  const RunSpec& s = b.run;
  return a.blocks == b.blocks && same_optional(a.generator, b.generator, gen_eq) &&
         same_optional(a.lattice, b.lattice, lattice_eq) &&
         same_optional(a.state, b.state, state_eq) &&
         same_list(a.observables, b.observables, obs_eq) && r.t_grid == s.t_grid &&
         r.alpha_grid == s.alpha_grid && r.n_max == s.n_max && r.sample_count == s.sample_count &&
         r.seed == s.seed && r.tol == s.tol;
}

namespace {

GeneratorSpec parse_generator(const Json& j, const Algebra& algebra, const std::string& path) {
  require_object(j, path, {"type", "hamiltonian", "jump_ops", "weyl", "matrix"});
  GeneratorSpec g;
  g.type = string_field(field(j, path, "type"), child(path, "type"));
  if (g.type == "commutator" || g.type == "lindblad") {
    if (j.contains("hamiltonian")) {
      g.hamiltonian = element_from_json(j.at("hamiltonian"), algebra, child(path, "hamiltonian"));
    } else if (g.type == "commutator") {
      schema_error(child(path, "hamiltonian"), "required field is missing");
    }
    if (j.contains("jump_ops")) {
      if (g.type == "commutator") schema_error(child(path, "jump_ops"), "commutator takes no jumps");
      const std::string jp = child(path, "jump_ops");
      const Json& list = require_array(j.at("jump_ops"), jp);
      for (std::size_t i = 0; i < list.size(); ++i) {
        g.jump_ops.push_back(element_from_json(list[i], algebra, child(jp, i)));
      }
    }
  } else if (g.type == "weyl") {
    const std::string wp = child(path, "weyl");
    const Json& w = field(j, path, "weyl");
    require_object(w, wp, {"d", "weights"});
    g.weyl_d = integer(field(w, wp, "d"), child(wp, "d"));
    if (g.weyl_d < 2) schema_error(child(wp, "d"), "must be >= 2");
    if (!algebra.is_single_block() || algebra.block_dim(0) != g.weyl_d) {
      dimension_error(child(wp, "d"), "the Weyl system needs the algebra M_d");
    }
    if (w.contains("weights")) {
      const std::string lp = child(wp, "weights");
      const Json& list = w.at("weights");
      if (list.is_string()) {
        if (list.get<std::string>() != "squared_min_length") {
          schema_error(lp, "unknown weight family");
        }
      } else {
        require_array(list, lp);
        for (std::size_t i = 0; i < list.size(); ++i) {
          const std::string ep = child(lp, i);
          if (!list[i].is_array() || list[i].size() != 3) schema_error(ep, "expected [p, q, c]");
          g.weyl_weights.emplace_back(integer(list[i][0], child(ep, std::size_t{0})),
                                      integer(list[i][1], child(ep, std::size_t{1})),
                                      number(list[i][2], child(ep, std::size_t{2})));
        }
      }
    }
  } else if (g.type == "superoperator") {
    const std::string mp = child(path, "matrix");
    Matrix m = matrix_from_json(field(j, path, "matrix"), mp);
    require_square(m, algebra.element_dim(), mp);
    g.superoperator = std::move(m);
  } else {
    schema_error(child(path, "type"), "unknown generator type '" + g.type + "'");
  }
  return g;
}

LatticeSpec parse_lattice(const Json& j, const std::string& path) {
  require_object(j, path, {"q", "terms", "explicit_terms", "region", "diagnostic", "lambda"});
  LatticeSpec l;
  l.q = integer(field(j, path, "q"), child(path, "q"));
  if (l.q < 2) schema_error(child(path, "q"), "must be >= 2");
  const std::string rp = child(path, "region");
  const std::vector<int> region = int_list(field(j, path, "region"), rp);
  if (region.size() != 2 || region[0] > region[1]) schema_error(rp, "expected [lo, hi] with lo <= hi");
  l.lo = region[0];
  l.hi = region[1];
  if (j.contains("terms")) {
    const std::string tp = child(path, "terms");
    const Json& list = require_array(j.at("terms"), tp);
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string ep = child(tp, i);
      require_object(list[i], ep, {"offsets", "matrix"});
      l.terms.push_back({int_list(field(list[i], ep, "offsets"), child(ep, "offsets")),
                         matrix_from_json(field(list[i], ep, "matrix"), child(ep, "matrix"))});
    }
  }
  if (j.contains("explicit_terms")) {
    const std::string tp = child(path, "explicit_terms");
    const Json& list = require_array(j.at("explicit_terms"), tp);
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string ep = child(tp, i);
      require_object(list[i], ep, {"sites", "matrix"});
      l.explicit_terms.push_back({int_list(field(list[i], ep, "sites"), child(ep, "sites")),
                                  matrix_from_json(field(list[i], ep, "matrix"), child(ep, "matrix"))});
    }
  }
  if (j.contains("lambda")) l.ruelle_lambda = number(j.at("lambda"), child(path, "lambda"));
  if (j.contains("diagnostic")) {
    const std::string dp = child(path, "diagnostic");
    const Json& d = j.at("diagnostic");
    require_object(d, dp, {"observable", "site", "radii", "t", "t_small"});
    l.diagnostic_observable = string_field(field(d, dp, "observable"), child(dp, "observable"));
    l.diagnostic_site = integer(field(d, dp, "site"), child(dp, "site"));
    if (d.contains("radii")) l.diagnostic_radii = int_list(d.at("radii"), child(dp, "radii"));
    if (d.contains("t")) l.diagnostic_t = number(d.at("t"), child(dp, "t"));
    if (d.contains("t_small")) l.derivative_t = number(d.at("t_small"), child(dp, "t_small"));
  }
  // Surface term shape and hermiticity problems at parse time.
  try {
    build_interaction(l);
  } catch (const Error& e) {
    dimension_error(path, e.what());
  }
  return l;
}

StateSpec parse_state(const Json& j, const Algebra& algebra, const std::string& path) {
  require_object(j, path, {"type", "densities", "weights", "block", "vector"});
  StateSpec s;
  s.type = string_field(field(j, path, "type"), child(path, "type"));
  if (s.type == "trace") return s;
  if (s.type == "density") {
    const std::string dp = child(path, "densities");
    const Json& list = require_array(field(j, path, "densities"), dp);
    if (static_cast<int>(list.size()) != algebra.block_count()) {
      dimension_error(dp, "one density per block is required");
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
      Matrix m = matrix_from_json(list[k], child(dp, k));
      require_square(m, algebra.block_dim(static_cast<int>(k)), child(dp, k));
      s.densities.push_back(std::move(m));
    }
    if (j.contains("weights")) {
      s.weights = number_list(j.at("weights"), child(path, "weights"));
    } else if (algebra.block_count() == 1) {
      s.weights = {1.0};
    } else {
      schema_error(child(path, "weights"), "required for several blocks");
    }
    if (static_cast<int>(s.weights.size()) != algebra.block_count()) {
      dimension_error(child(path, "weights"), "one weight per block is required");
    }
    return s;
  }
  if (s.type == "pure") {
    if (j.contains("block")) s.block = integer(j.at("block"), child(path, "block"));
    if (s.block < 0 || s.block >= algebra.block_count()) {
      dimension_error(child(path, "block"), "block index out of range");
    }
    s.vector = vector_from_json(field(j, path, "vector"), child(path, "vector"));
    if (s.vector.size() != algebra.block_dim(s.block)) {
      dimension_error(child(path, "vector"), "length does not match the block");
    }
    return s;
  }
  schema_error(child(path, "type"), "unknown state type '" + s.type + "'");
}

RunSpec parse_run(const Json& j, const std::string& path) {
  require_object(j, path, {"t_grid", "alpha_grid", "n_max", "sample_count", "seed", "tol"});
  RunSpec r;
  if (j.contains("t_grid")) r.t_grid = number_list(j.at("t_grid"), child(path, "t_grid"));
  if (j.contains("alpha_grid")) {
    r.alpha_grid = number_list(j.at("alpha_grid"), child(path, "alpha_grid"));
    if (r.alpha_grid.empty()) schema_error(child(path, "alpha_grid"), "must not be empty");
    for (std::size_t i = 0; i < r.alpha_grid.size(); ++i) {
      if (!(r.alpha_grid[i] > 0.0)) schema_error(child(child(path, "alpha_grid"), i), "must be > 0");
    }
  }
  if (j.contains("n_max")) {
    r.n_max = integer(j.at("n_max"), child(path, "n_max"));
    if (r.n_max < 1) schema_error(child(path, "n_max"), "must be >= 1");
  }
  if (j.contains("sample_count")) {
    r.sample_count = integer(j.at("sample_count"), child(path, "sample_count"));
    if (r.sample_count < 0) schema_error(child(path, "sample_count"), "must be >= 0");
  }
  if (j.contains("seed")) {
    const Json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      schema_error(child(path, "seed"), "expected a non-negative integer");
    }
    r.seed = s.get<std::uint64_t>();
  }
  if (j.contains("tol")) {
    r.tol = number(j.at("tol"), child(path, "tol"));
    if (!(r.tol > 0.0)) schema_error(child(path, "tol"), "must be > 0");
  }
  return r;
}

}  // namespace

Scenario parse_scenario(const Json& j) {
  require_object(j, "", {"algebra", "generator", "lattice", "state", "observables", "run"});
  Scenario s;
  const bool has_gen = j.contains("generator");
  const bool has_lat = j.contains("lattice");
  if (has_gen == has_lat) schema_error("", "exactly one of generator and lattice is required");

  if (has_lat) {
    s.lattice = parse_lattice(j.at("lattice"), "/lattice");
    std::optional<LatticeRegion> region;
    try {
      region = s.region();
    } catch (const Error& e) {
      dimension_error("/lattice/region", e.what());
    }
    s.blocks = {region->dim()};
  }
  if (j.contains("algebra")) {
    const Json& a = j.at("algebra");
    require_object(a, "/algebra", {"blocks"});
    std::vector<int> blocks = int_list(field(a, "/algebra", "blocks"), "/algebra/blocks");
    if (blocks.empty()) schema_error("/algebra/blocks", "must not be empty");
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      if (blocks[k] < 1) schema_error(child("/algebra/blocks", k), "must be >= 1");
    }
    if (has_lat && blocks != s.blocks) {
      dimension_error("/algebra/blocks", "does not match the lattice region dimension");
    }
    s.blocks = std::move(blocks);
  } else if (has_gen) {
    schema_error("/algebra", "required field is missing");
  }

  Algebra algebra = [&] {
    try {
      return s.algebra();
    } catch (const Error& e) {
      dimension_error("/algebra", e.what());
    }
  }();
  if (has_gen) s.generator = parse_generator(j.at("generator"), algebra, "/generator");
  if (j.contains("state")) s.state = parse_state(j.at("state"), algebra, "/state");
  if (j.contains("observables")) {
    const Json& obs = j.at("observables");
    if (!obs.is_object()) schema_error("/observables", "expected an object");
    for (const auto& [label, value] : obs.items()) {
      s.observables.emplace_back(label, element_from_json(value, algebra, child("/observables", label)));
    }
  }
  if (j.contains("run")) s.run = parse_run(j.at("run"), "/run");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read scenario file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Schema, "malformed JSON in '" + path + "': " + e.what());
  }
  return parse_scenario(j);
}

Json serialize_scenario(const Scenario& s) {
  Json j;
  j["algebra"] = {{"blocks", s.blocks}};
  if (s.generator) {
    const GeneratorSpec& g = *s.generator;
    Json gj;
    gj["type"] = g.type;
    if (g.hamiltonian) gj["hamiltonian"] = to_json(*g.hamiltonian);
    if (g.type == "lindblad") {
      gj["jump_ops"] = Json::array();
      for (const auto& v : g.jump_ops) gj["jump_ops"].push_back(to_json(v));
    }
    if (g.type == "weyl") {
      Json w{{"d", g.weyl_d}};
      if (g.weyl_weights.empty()) {
        w["weights"] = "squared_min_length";
      } else {
        w["weights"] = Json::array();
        for (const auto& [p, q, c] : g.weyl_weights) w["weights"].push_back({p, q, c});
      }
      gj["weyl"] = std::move(w);
    }
    if (g.superoperator) gj["matrix"] = to_json(*g.superoperator);
    j["generator"] = std::move(gj);
  }
  if (s.lattice) {
    const LatticeSpec& l = *s.lattice;
    Json lj;
    lj["q"] = l.q;
    lj["region"] = {l.lo, l.hi};
    lj["terms"] = Json::array();
    for (const auto& t : l.terms) lj["terms"].push_back({{"offsets", t.offsets}, {"matrix", to_json(t.matrix)}});
    lj["explicit_terms"] = Json::array();
    for (const auto& t : l.explicit_terms) {
      lj["explicit_terms"].push_back({{"sites", t.sites}, {"matrix", to_json(t.matrix)}});
    }
    lj["lambda"] = l.ruelle_lambda;
    if (l.diagnostic_observable) {
      lj["diagnostic"] = {{"observable", *l.diagnostic_observable},
                          {"site", l.diagnostic_site},
                          {"radii", l.diagnostic_radii},
                          {"t", l.diagnostic_t},
                          {"t_small", l.derivative_t}};
    }
    j["lattice"] = std::move(lj);
  }
  if (s.state) {
    const StateSpec& st = *s.state;
    Json sj{{"type", st.type}};
    if (st.type == "density") {
      sj["densities"] = Json::array();
      for (const auto& d : st.densities) sj["densities"].push_back(to_json(d));
      sj["weights"] = st.weights;
    } else if (st.type == "pure") {
      sj["block"] = st.block;
      sj["vector"] = vector_to_json(st.vector);
    }
    j["state"] = std::move(sj);
  }
  Json obs = Json::object();
  for (const auto& [label, x] : s.observables) obs[label] = to_json(x);
  j["observables"] = std::move(obs);
  j["run"] = {{"t_grid", s.run.t_grid},     {"alpha_grid", s.run.alpha_grid},
              {"n_max", s.run.n_max},       {"sample_count", s.run.sample_count},
              {"seed", s.run.seed},         {"tol", s.run.tol}};
  return j;
}

Superoperator build_generator(const Scenario& s) {
  if (!s.generator) throw Error(ErrorCode::InvalidArgument, "scenario has no generator");
  const GeneratorSpec& g = *s.generator;
  const Algebra algebra = s.algebra();
  if (g.type == "commutator") return commutator_derivation(*g.hamiltonian);
  if (g.type == "lindblad") {
    return lindblad_generator(g.hamiltonian.value_or(AlgebraElement::zero(algebra)), g.jump_ops);
  }
  if (g.type == "weyl") {
    if (g.weyl_weights.empty()) {
      return weyl_damping_generator(g.weyl_d, squared_min_length_weights(g.weyl_d));
    }
    WeylWeights weights;
    for (const auto& [p, q, c] : g.weyl_weights) weights[{p, q}] = c;
    return weyl_damping_generator(g.weyl_d, weights);
  }
  if (g.type == "superoperator") {
    return Superoperator(algebra, *g.superoperator, "superoperator", "scenario matrix");
  }
  throw Error(ErrorCode::Schema, "unknown generator type '" + g.type + "'");
}

State build_state(const Scenario& s) {
  const Algebra algebra = s.algebra();
  if (!s.state || s.state->type == "trace") return State::normalized_trace(algebra);
  if (s.state->type == "density") return State(algebra, s.state->densities, s.state->weights);
  return State::pure(algebra, s.state->block, s.state->vector);
}

Interaction build_interaction(const LatticeSpec& spec) {
  return Interaction(spec.q, spec.terms, spec.explicit_terms);
}

AlgebraElement resolve_observable(const Scenario& s, const std::string& label) {
  for (const auto& [name, x] : s.observables) {
    if (name == label) return x;
  }
  const Algebra algebra = s.algebra();
  if (label == "identity") return AlgebraElement::identity(algebra);
  if (label.size() >= 7 && label.rfind("sigma_", 0) == 0) {
    const char axis = label[6];
    if (axis == 'x' || axis == 'y' || axis == 'z') {
      if (label.size() == 7 && algebra.is_single_block() && algebra.block_dim(0) == 2) {
        const Matrix p = axis == 'x' ? sigma_x() : axis == 'y' ? sigma_y() : sigma_z();
        return AlgebraElement(algebra, {p});
      }
      if (label.size() > 8 && label[7] == '@' && s.lattice) {
        try {
          std::size_t used = 0;
          const int site = std::stoi(label.substr(8), &used);
          if (used == label.size() - 8) return pauli_at(axis, site, *s.region());
        } catch (const std::logic_error&) {
          // fall through to the unknown-label error
        }
      }
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown observable '" + label + "'");
}

// ---------------------------------------------------------------------------
// Reports

Json report_header(const Scenario& s, const std::string& command) {
  return Json{{"tool", kToolName},
              {"version", kToolVersion},
              {"command", command},
              {"seed", s.run.seed},
              {"tol", s.run.tol},
              {"scenario", serialize_scenario(s)}};
}

namespace {

Json functional_json(const NormingFunctional& f) {
  return {{"block", f.block}, {"u", vector_to_json(f.u)}, {"v", vector_to_json(f.v)}};
}

}  // namespace

Json to_json(const DissipativityReport& r) {
  Json levels = Json::array();
  for (const auto& l : r.levels) {
    Json lj{{"n", l.n},
            {"verdict", l.passed ? "pass" : "fail"},
            {"elements_tested", l.elements_tested},
            {"norm_condition", l.norm_condition},
            {"functional_condition", l.functional_condition},
            {"contractivity", l.contractivity},
            {"methods_agree", l.methods_agree}};
    Json probes = Json::array();
    for (const auto& p : l.probes) {
      probes.push_back({{"t", p.t},
                        {"max_ratio", p.max_ratio},
                        {"norm_after", p.norm_after},
                        {"element", to_json(p.element)}});
    }
    lj["probes"] = std::move(probes);
    if (l.witness_kind == WitnessKind::None) {
      lj["witness"] = nullptr;
    } else {
      Json w{{"kind", to_string(l.witness_kind)},
             {"violation", l.violation},
             {"element", to_json(*l.witness_element)}};
      if (l.witness_kind == WitnessKind::NormCondition) w["alpha"] = l.witness_alpha;
      if (l.witness_kind == WitnessKind::Contractivity) w["t"] = l.witness_t;
      if (l.witness_kind == WitnessKind::FunctionalCondition) {
        w["functional"] = functional_json(*l.witness_functional);
      }
      lj["witness"] = std::move(w);
    }
    levels.push_back(std::move(lj));
  }
  return Json{{"passed", r.passed},
              {"scope", r.scope},
              {"methods", r.methods},
              {"levels", std::move(levels)},
              {"seed", r.options.seed},
              {"tol", r.options.tol},
              {"n_max", r.options.n_max},
              {"sample_count", r.options.sample_count},
              {"alpha_grid", r.options.alpha_grid},
              {"t_grid", r.options.t_grid}};
}

Json to_json(const CpVerdict& v) {
  Json j{{"completely_positive", v.completely_positive},
         {"choi_min_eigenvalue", v.choi.min_eigenvalue},
         {"choi_hermiticity_defect", v.choi.hermiticity_defect}};
  if (v.witness_element) {
    j["witness"] = {{"element", to_json(*v.witness_element)},
                    {"vector", vector_to_json(v.choi.min_eigenvector)}};
  }
  return j;
}

Json to_json(const PositivityProbe& p) {
  Json j{{"passed", p.passed},
         {"levels_tested", p.levels_tested},
         {"samples_per_level", p.samples_per_level},
         {"min_eigenvalue", p.min_eigenvalue},
         {"worst_level", p.worst_level}};
  if (p.witness) j["witness"] = to_json(*p.witness);
  return j;
}

Json to_json(const PipelineReport& r) {
  Json levels = Json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"n", l.n},
                      {"samples", l.samples},
                      {"max_real_part", l.max_real_part},
                      {"cyclic_norm", l.cyclic_norm},
                      {"identity_residual", l.identity_residual},
                      {"implementation_residual", l.implementation_residual},
                      {"verdict", l.passed ? "pass" : "fail"}});
  }
  Json dissip{{"dissipative", r.dissipativity.dissipative},
              {"max_eigenvalue", r.dissipativity.max_eigenvalue}};
  if (r.dissipativity.witness.size() > 0) dissip["witness"] = vector_to_json(r.dissipativity.witness);
  return Json{{"passed", r.passed},
              {"consistent", r.consistent},
              {"hilbert_dim", r.hilbert_dim},
              {"gram_residual", r.gram_residual},
              {"implementation",
               {{"form", to_string(r.implementation.form)},
                {"residual", r.implementation.residual},
                {"kills_cyclic", r.implementation.kills_cyclic},
                {"matrix", to_json(r.implementation.matrix)}}},
              {"skew_defect", r.skew_defect},
              {"cyclic_norm", r.cyclic_norm},
              {"dissipativity", std::move(dissip)},
              {"levels", std::move(levels)},
              {"certification", to_json(r.certification)}};
}

Json to_json(const RuelleBound& r) {
  return Json{{"value", r.value},
              {"contributions", r.contributions},
              {"tail", r.tail},
              {"exact", r.exact}};
}

Json to_json(const ConvergenceDiagnostic& d) {
  return Json{{"gaps", d.gaps}, {"approximately_inner", d.approximately_inner}};
}

std::string trajectory_csv_header(const Algebra& algebra) {
  std::ostringstream os;
  os << "t,observable";
  const bool multi = !algebra.is_single_block();
  for (int k = 0; k < algebra.block_count(); ++k) {
    const int d = algebra.block_dim(k);
    const std::string prefix = multi ? std::to_string(k) + "_" : "";
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        os << ",re_" << prefix << i << "_" << j << ",im_" << prefix << i << "_" << j;
      }
    }
  }
  os << "\n";
  return os.str();
}

std::string trajectory_csv_row(double t, const std::string& label, const AlgebraElement& x) {
  std::string row = format_double(t) + "," + label;
  for (const auto& b : x.blocks()) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        row += "," + format_double(b(i, j).real()) + "," + format_double(b(i, j).imag());
      }
    }
  }
  row += "\n";
  return row;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::InvalidArgument, "cannot move output into '" + path + "': " + ec.message());
  }
}

}  // namespace cdlab
