#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cdlab/scenario.hpp"

using namespace cdlab;

namespace {
std::string fixture(const std::string& name) { return std::string(CDLAB_FIXTURE_DIR) + "/" + name; }

const char* kMinimal = R"({"algebra": {"blocks": [2]},
  "generator": {"type": "commutator", "hamiltonian": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}})";

ErrorCode code_of(const std::string& text) {
  try {
    parse_scenario(Json::parse(text));
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error for " << text);
  return ErrorCode::InvalidArgument;
}

std::string message_of(const std::string& text) {
  try {
    parse_scenario(Json::parse(text));
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("complex and matrix encodings") {
  CHECK(complex_from_json(Json::parse("[1.5, -2]"), "/x") == Complex(1.5, -2));
  CHECK(complex_from_json(Json::parse("3"), "/x") == Complex(3, 0));
  CHECK_THROWS_AS(complex_from_json(Json::parse("[1]"), "/x"), Error);
  CHECK_THROWS_AS(complex_from_json(Json::parse("\"a\""), "/x"), Error);
  const Matrix m = sigma_y();
  CHECK(matrix_from_json(to_json(m), "/m") == m);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[[1,0]], [[1,0],[2,0]]]"), "/m"), Error);
  Sampler s(2);
  const Vector v = s.unit_vector(3);
  CHECK(vector_from_json(vector_to_json(v), "/v") == v);
  const Algebra a({1, 2});
  const AlgebraElement x = s.element(a, SampleKind::General);
  CHECK(element_from_json(to_json(x), a, "/e") == x);
}

TEST_CASE("minimal scenario parses") {
  const Scenario s = parse_scenario(Json::parse(kMinimal));
  CHECK(s.blocks == std::vector<int>{2});
  REQUIRE(s.generator);
  CHECK(s.generator->type == "commutator");
  CHECK(s.run.seed == 0);
  CHECK(s.run.n_max == 4);
  CHECK(s.run.alpha_grid.size() == 41);
  const Superoperator d = build_generator(s);
  CHECK(distance(d(AlgebraElement::from_matrix(sigma_x())), AlgebraElement::from_matrix(-2.0 * sigma_y())) < 1e-15);
  // Trace state by default.
  CHECK(std::abs(build_state(s)(AlgebraElement::from_matrix(sigma_z()))) == 0.0);
}

TEST_CASE("schema errors name the failing path") {
  const std::string bad_complex =
      R"({"algebra": {"blocks": [2]}, "generator": {"type": "commutator", "hamiltonian": [[[1], [0, 0]], [[0, 0], [-1, 0]]]}})";
  CHECK(code_of(bad_complex) == ErrorCode::Schema);
  CHECK(message_of(bad_complex).find("/generator/hamiltonian/0/0") != std::string::npos);

  const std::string mismatch =
      R"({"algebra": {"blocks": [2]}, "generator": {"type": "commutator", "hamiltonian": [[1,0,0],[0,1,0],[0,0,1]]}})";
  CHECK(code_of(mismatch) == ErrorCode::AlgebraMismatch);
  CHECK(message_of(mismatch).find("/generator/hamiltonian") != std::string::npos);

  CHECK(code_of(R"({"algebra": {"blocks": [2]}})") == ErrorCode::Schema);
  CHECK(code_of(R"({"algebra": {"blocks": [2]}, "generator": {"type": "commutator", "hamiltonian": 1}, "extra": 1})") ==
        ErrorCode::Schema);
  CHECK(message_of(R"({"algebra": {"blocks": [2]}, "generator": {"type": "mystery"}})").find("/generator/type") !=
        std::string::npos);
  CHECK(message_of(R"({"algebra": {"blocks": [2]}, "generator": {"type": "commutator", "hamiltonian": [[1,0],[0,1]]},
                       "run": {"tol": -1}})")
            .find("/run/tol") != std::string::npos);
  CHECK(code_of(R"({"generator": {"type": "commutator", "hamiltonian": [[1,0],[0,1]]}})") == ErrorCode::Schema);
  CHECK(code_of(R"({"algebra": {"blocks": [2]}, "generator": {"type": "weyl", "weyl": {"d": 3}}})") ==
        ErrorCode::AlgebraMismatch);
  CHECK(message_of(R"({"algebra": {"blocks": [2]}, "generator": {"type": "lindblad", "jump_ops": [[[1,0],[0,1]], [[1]]]}})")
            .find("/generator/jump_ops/1") != std::string::npos);
}

TEST_CASE("files") {
  CHECK_NOTHROW(load_scenario(fixture("minimal_commutator.json")));
  try {
    load_scenario(fixture("does_not_exist.json"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  try {
    load_scenario(fixture("not_json.json"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
  }
  CHECK_THROWS_AS(load_scenario(fixture("invalid_complex.json")), Error);
  CHECK_THROWS_AS(load_scenario(fixture("dimension_mismatch.json")), Error);
}

TEST_CASE("round trip parse, serialize, parse") {
  for (const char* name : {"minimal_commutator.json", "lindblad_m2.json", "transpose_minus_identity.json",
                           "weyl_m2.json", "commutator_m3.json", "pure_state_gns.json", "field_single_site.json",
                           "tfim_chain.json", "lindblad_direct_sum.json"}) {
    CAPTURE(name);
    const Scenario a = load_scenario(fixture(name));
    const Scenario b = parse_scenario(serialize_scenario(a));
    CHECK(a == b);
    CHECK(serialize_scenario(b).dump() == serialize_scenario(a).dump());
  }

  const std::string rich = R"({
    "algebra": {"blocks": [1, 2]},
    "generator": {"type": "lindblad",
                  "hamiltonian": {"blocks": [[[0.5]], [[1, [0, 1]], [[0, -1], -1]]]},
                  "jump_ops": [{"blocks": [[[0]], [[0, 1], [0, 0]]]}]},
    "state": {"type": "density", "densities": [[[1]], [[0.5, 0], [0, 0.5]]], "weights": [0.25, 0.75]},
    "observables": {"p": {"blocks": [[[1]], [[0, 0], [0, 0]]]}},
    "run": {"t_grid": [0.5], "alpha_grid": [0.5, 2], "n_max": 2, "sample_count": 3, "seed": 11, "tol": 1e-7}
  })";
  const Scenario a = parse_scenario(Json::parse(rich));
  CHECK(a.run.seed == 11);
  CHECK(a.observables.size() == 1);
  CHECK(a == parse_scenario(serialize_scenario(a)));
  CHECK(std::abs(build_state(a)(AlgebraElement::identity(a.algebra())) - Complex(1.0)) < 1e-15);

  const std::string weyl = R"({"algebra": {"blocks": [3]},
    "generator": {"type": "weyl", "weyl": {"d": 3, "weights": [[0, 1, 0.5], [1, 0, 2]]}}})";
  const Scenario w = parse_scenario(Json::parse(weyl));
  CHECK(w == parse_scenario(serialize_scenario(w)));
  const Superoperator wd = build_generator(w);
  const AlgebraElement x = AlgebraElement::from_matrix(weyl_operator(3, 1, 0));
  CHECK(distance(wd(x), Complex(-2.0) * x) < 1e-13);
}

TEST_CASE("lattice scenarios") {
  const Scenario s = load_scenario(fixture("tfim_chain.json"));
  REQUIRE(s.lattice);
  REQUIRE(s.region());
  CHECK(s.region()->dim() == 128);
  CHECK(s.blocks == std::vector<int>{128});
  const Interaction phi = build_interaction(*s.lattice);
  CHECK(phi.terms().size() == 2);
  const AlgebraElement x3 = resolve_observable(s, "sigma_x@3");
  CHECK(x3 == pauli_at('x', 3, *s.region()));
  CHECK_THROWS_AS(resolve_observable(s, "sigma_x@9"), Error);
  CHECK_THROWS_AS(resolve_observable(s, "sigma_x"), Error);

  const std::string mismatch = R"({"algebra": {"blocks": [4]}, "lattice": {"q": 2, "region": [0, 2]}})";
  CHECK(code_of(mismatch) == ErrorCode::AlgebraMismatch);
  CHECK(code_of(R"({"lattice": {"q": 2, "region": [0, 20]}})") == ErrorCode::AlgebraMismatch);
}

TEST_CASE("observables") {
  const Scenario s = load_scenario(fixture("lindblad_m2.json"));
  CHECK(resolve_observable(s, "sz") == AlgebraElement::from_matrix(sigma_z()));
  CHECK(resolve_observable(s, "sigma_y") == AlgebraElement::from_matrix(sigma_y()));
  CHECK(resolve_observable(s, "identity") == AlgebraElement::identity(s.algebra()));
  try {
    resolve_observable(s, "nope");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("trajectory CSV") {
  CHECK(trajectory_csv_header(Algebra::full(2)) ==
        "t,observable,re_0_0,im_0_0,re_0_1,im_0_1,re_1_0,im_1_0,re_1_1,im_1_1\n");
  CHECK(trajectory_csv_header(Algebra({1, 1})) == "t,observable,re_0_0_0,im_0_0_0,re_1_0_0,im_1_0_0\n");
  const std::string row = trajectory_csv_row(0.5, "x", AlgebraElement::from_matrix(sigma_y()));
  CHECK(row == "0.5,x,0,0,0,-1,0,1,0,0\n");
  const std::string third = trajectory_csv_row(1.0 / 3.0, "x", AlgebraElement::from_matrix(Matrix::Identity(1, 1)));
  CHECK(third == "0.33333333333333331,x,1,0\n");
}

TEST_CASE("reports carry the scenario echo") {
  const Scenario s = load_scenario(fixture("lindblad_m2.json"));
  const Json h = report_header(s, "certify");
  CHECK(h["tool"] == "cdlab");
  CHECK(h["version"] == kToolVersion);
  CHECK(h["seed"] == 7);
  CHECK(parse_scenario(h["scenario"]) == s);
}

TEST_CASE("atomic writes") {
  const auto dir = std::filesystem::temp_directory_path() / "cdlab_scenario_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.txt").string();
  write_file_atomic(path, "first\n");
  write_file_atomic(path, "second\n");
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == "second\n");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(write_file_atomic("/nonexistent_dir/x/out.txt", "x"), Error);
}

}  // TEST_SUITE
