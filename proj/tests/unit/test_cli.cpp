#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

std::string fixture(const std::string& name) { return std::string(CDLAB_FIXTURE_DIR) + "/" + name; }

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(CDLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<double>> parse_csv_numbers(const std::string& csv) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    int col = 0;
    while (std::getline(ls, cell, ',')) {
      if (col++ != 1) row.push_back(std::stod(cell));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("certify exit codes") {
  CHECK(run_cli("certify " + fixture("minimal_commutator.json")).code == 0);
  CHECK(run_cli("certify " + fixture("lindblad_m2.json")).code == 0);
  CHECK(run_cli("certify " + fixture("weyl_m2.json")).code == 0);

  const Run bad = run_cli("certify " + fixture("transpose_minus_identity.json"));
  CHECK(bad.code == 1);
  const auto report = nlohmann::json::parse(bad.out);
  CHECK(report["passed"] == false);
  const auto& levels = report["dissipativity"]["levels"];
  REQUIRE(levels.size() >= 2);
  CHECK(levels[0]["verdict"] == "pass");
  CHECK(levels[1]["verdict"] == "fail");
  CHECK(levels[1].contains("witness"));

  for (const char* name : {"invalid_complex.json", "dimension_mismatch.json", "not_json.json", "missing.json"}) {
    CAPTURE(name);
    const Run r = run_cli(std::string("certify ") + fixture(name));
    CHECK(r.code == 2);
    CHECK(r.out.empty());
  }
  CHECK(run_cli("certify").code == 2);
  CHECK(run_cli("frobnicate " + fixture("lindblad_m2.json")).code == 2);
  CHECK(run_cli("certify " + fixture("lindblad_m2.json") + " --tol -1").code == 2);
  CHECK(run_cli("certify " + fixture("tfim_chain.json")).code == 2);
}

TEST_CASE("lindblad report contents") {
  const Run r = run_cli("certify " + fixture("lindblad_m2.json"));
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["tool"] == "cdlab");
  CHECK(j["seed"] == 7);
  CHECK(j["scenario"]["generator"]["type"] == "lindblad");
  CHECK(j["dissipativity"]["levels"].size() == 4);
  for (const auto& level : j["dissipativity"]["levels"]) CHECK(level["verdict"] == "pass");
  CHECK(j["cp_grid"].size() == 4);
}

TEST_CASE("direct sums use the blockwise probe") {
  const Run r = run_cli("certify " + fixture("lindblad_direct_sum.json"));
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["cp_grid"][0]["method"] == "blockwise-probe");
  CHECK(j["cp_grid"][0]["result"]["samples_per_level"] == 100);
  CHECK(j["dissipativity"]["scope"].get<std::string>().find("n_max >= d") == std::string::npos);
}

TEST_CASE("overrides and output files") {
  const auto dir = std::filesystem::temp_directory_path() / "cdlab_cli_test";
  std::filesystem::create_directories(dir);
  const std::string out = (dir / "report.json").string();
  const Run r = run_cli("certify " + fixture("lindblad_m2.json") + " --n-max 2 --seed 3 --out " + out);
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(out);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["dissipativity"]["levels"].size() == 2);
  CHECK(j["seed"] == 3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reports are byte-reproducible") {
  for (const std::string& args : {"certify " + fixture("lindblad_m2.json"), "certify " + fixture("transpose_minus_identity.json"),
                                 "gns " + fixture("commutator_m3.json"), "lattice " + fixture("tfim_chain.json"),
                                 "evolve " + fixture("lindblad_m2.json") + " --t-grid 0:1:0.25"}) {
    CAPTURE(args);
    const Run a = run_cli(args);
    const Run b = run_cli(args);
    CHECK(!a.out.empty());
    CHECK(a.out == b.out);
    CHECK(a.code == b.code);
  }
}

TEST_CASE("evolve") {
  const Run single = run_cli("evolve " + fixture("lindblad_m2.json") + " --t-grid 0:0:1 --observable sigma_x");
  REQUIRE(single.code == 0);
  const auto rows = parse_csv_numbers(single.out);
  REQUIRE(rows.size() == 1);
  // t, then (re, im) of sigma_x in row-major order.
  const std::vector<double> expected = {0, 0, 0, 1, 0, 1, 0, 0, 0};
  CHECK(rows[0] == expected);

  const double h = 0.75;
  const Run field = run_cli("evolve " + fixture("field_single_site.json") + " --observable sigma_x@0");
  REQUIRE(field.code == 0);
  const auto frows = parse_csv_numbers(field.out);
  REQUIRE(frows.size() == 3);
  for (const auto& row : frows) {
    const double t = row[0];
    const double c = std::cos(2 * h * t);
    const double s = std::sin(2 * h * t);
    // cos(2ht) sigma_x - sin(2ht) sigma_y = [[0, c + i s], [c - i s, 0]].
    CHECK(row[3] == doctest::Approx(c));
    CHECK(row[4] == doctest::Approx(s));
    CHECK(row[5] == doctest::Approx(c));
    CHECK(row[6] == doctest::Approx(-s));
  }

  CHECK(run_cli("evolve " + fixture("lindblad_m2.json") + " --observable nope").code == 2);
  CHECK(run_cli("evolve " + fixture("lindblad_m2.json") + " --t-grid 1:0:0.5").code == 2);
  CHECK(run_cli("evolve " + fixture("minimal_commutator.json")).code == 2);
}

TEST_CASE("lattice and gns") {
  const Run lat = run_cli("lattice " + fixture("tfim_chain.json"));
  CHECK(lat.code == 0);
  const auto lj = nlohmann::json::parse(lat.out);
  CHECK(lj["ruelle_bound"]["value"].get<double>() == doctest::Approx(0.5 + 2 * std::exp(1.0)));
  const auto& gaps = lj["diagnostic"]["gaps"];
  REQUIRE(gaps.size() == 2);
  CHECK(gaps[1].get<double>() < gaps[0].get<double>());

  const Run gns = run_cli("gns " + fixture("commutator_m3.json"));
  CHECK(gns.code == 0);
  CHECK(nlohmann::json::parse(gns.out)["hilbert_dim"] == 9);
  CHECK(run_cli("gns " + fixture("weyl_m2.json")).code == 1);
  const Run pure = run_cli("gns " + fixture("pure_state_gns.json"));
  CHECK(pure.code == 1);
  CHECK(nlohmann::json::parse(pure.out)["status"] == "hypotheses not met");
  CHECK(run_cli("gns " + fixture("tfim_chain.json")).code == 2);
}

TEST_CASE("version") {
  const Run v = run_cli("--version");
  CHECK(v.code == 0);
  CHECK(v.out.find("0.1.0") != std::string::npos);
}

}  // TEST_SUITE
