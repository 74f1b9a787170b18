// cdlab: scenario-driven certification and evolution.
//
// Exit codes: 0 all checks pass, 1 a violation was found (witness in the
// report), 2 invalid input.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdlab/scenario.hpp"

namespace {

using namespace cdlab;

constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitInvalid = 2;

// Sampled positive elements per level when Choi certification is unavailable.
constexpr int kBlockwiseProbeSamples = 100;

struct CommonFlags {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> n_max;
  std::string out;
};

struct EvolveFlags {
  std::string t_grid;
  std::vector<std::string> observables;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("scenario", flags.scenario, "scenario JSON file")->required();
  cmd->add_option("--seed", flags.seed, "override run.seed");
  cmd->add_option("--tol", flags.tol, "override run.tol")->check(CLI::PositiveNumber);
  cmd->add_option("--n-max", flags.n_max, "override run.n_max")->check(CLI::PositiveNumber);
  cmd->add_option("--out", flags.out, "output file (default: stdout)");
}

Scenario load_with_overrides(const CommonFlags& flags) {
  Scenario s = load_scenario(flags.scenario);
  if (flags.seed) s.run.seed = *flags.seed;
  if (flags.tol) s.run.tol = *flags.tol;
  if (flags.n_max) s.run.n_max = *flags.n_max;
  return s;
}

void emit(const CommonFlags& flags, const std::string& content) {
  if (flags.out.empty()) {
    std::cout << content;
  } else {
    write_file_atomic(flags.out, content);
  }
}

std::vector<double> parse_t_grid(const std::string& spec) {
  const auto first = spec.find(':');
  const auto second = spec.find(':', first == std::string::npos ? first : first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "--t-grid expects start:stop:step");
  }
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
  try {
    start = std::stod(spec.substr(0, first));
    stop = std::stod(spec.substr(first + 1, second - first - 1));
    step = std::stod(spec.substr(second + 1));
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, "--t-grid expects numbers start:stop:step");
  }
  if (!(step > 0.0) || stop < start) {
    throw Error(ErrorCode::InvalidArgument, "--t-grid needs step > 0 and stop >= start");
  }
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long k = 0; k <= count; ++k) grid.push_back(start + static_cast<double>(k) * step);
  return grid;
}

CertifyOptions certify_options(const Scenario& s) {
  CertifyOptions o;
  o.n_max = s.run.n_max;
  o.sample_count = s.run.sample_count;
  o.alpha_grid = s.run.alpha_grid;
  o.t_grid = s.run.t_grid;
  o.seed = s.run.seed;
  o.tol = s.run.tol;
  return o;
}

// ---------------------------------------------------------------------------

int run_certify(const CommonFlags& flags) {
  const Scenario s = load_with_overrides(flags);
  if (!s.generator) throw Error(ErrorCode::InvalidArgument, "certify needs a generator scenario");
  const Superoperator delta = build_generator(s);
  const DissipativityReport report = certify_completely_dissipative(delta, certify_options(s));

  bool cp_ok = true;
  Json cp_grid = Json::array();
  for (double t : s.run.t_grid) {
    const Superoperator tau = exp_generator(delta, t);
    Json entry{{"t", t}};
    if (delta.algebra().is_single_block()) {
      const CpVerdict v = is_completely_positive(tau, s.run.tol);
      cp_ok = cp_ok && v.completely_positive;
      entry["method"] = "choi";
      entry["result"] = to_json(v);
    } else {
      const PositivityProbe p = blockwise_positivity_probe(tau, s.run.n_max, kBlockwiseProbeSamples,
                                                           s.run.seed, s.run.tol);
      cp_ok = cp_ok && p.passed;
      entry["method"] = "blockwise-probe";
      entry["result"] = to_json(p);
    }
    cp_grid.push_back(std::move(entry));
  }

  Json out = report_header(s, "certify");
  out["passed"] = report.passed && cp_ok;
  out["dissipativity"] = to_json(report);
  out["cp_grid"] = std::move(cp_grid);
  emit(flags, out.dump(2) + "\n");
  return report.passed && cp_ok ? kExitPass : kExitViolation;
}

int run_evolve(const CommonFlags& flags, const EvolveFlags& evolve) {
  Scenario s = load_with_overrides(flags);
  if (!evolve.t_grid.empty()) s.run.t_grid = parse_t_grid(evolve.t_grid);

  std::vector<std::pair<std::string, AlgebraElement>> observables;
  if (evolve.observables.empty()) {
    observables = s.observables;
  } else {
    for (const auto& label : evolve.observables) {
      observables.emplace_back(label, resolve_observable(s, label));
    }
  }
  if (observables.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no observable: pass --observable or list observables");
  }

  std::string csv = trajectory_csv_header(s.algebra());
  if (s.generator) {
    const Superoperator delta = build_generator(s);
    for (double t : s.run.t_grid) {
      const Superoperator tau = exp_generator(delta, t);
      for (const auto& [label, x] : observables) csv += trajectory_csv_row(t, label, tau(x));
    }
  } else {
    const FiniteVolumeDynamics dyn(build_interaction(*s.lattice), *s.region());
    for (double t : s.run.t_grid) {
      for (const auto& [label, x] : observables) {
        csv += trajectory_csv_row(t, label, dyn.evolve(x, t));
      }
    }
  }
  emit(flags, csv);
  return kExitPass;
}

int run_lattice(const CommonFlags& flags) {
  const Scenario s = load_with_overrides(flags);
  if (!s.lattice) throw Error(ErrorCode::InvalidArgument, "lattice needs a lattice scenario");
  const LatticeSpec& spec = *s.lattice;
  const Interaction phi = build_interaction(spec);
  const LatticeRegion region = *s.region();
  const AlgebraElement h = local_hamiltonian(phi, region);

  Json out = report_header(s, "lattice");
  out["region"] = {{"lo", region.lo()}, {"hi", region.hi()}, {"dim", region.dim()}};
  out["hamiltonian_norm"] = operator_norm(h);
  out["hamiltonian_hermiticity_defect"] = operator_norm(h - h.adjoint());
  if (phi.translation_invariant()) {
    Json rb = to_json(ruelle_bound(phi, spec.ruelle_lambda, s.run.n_max));
    rb["lambda"] = spec.ruelle_lambda;
    rb["n_max"] = s.run.n_max;
    out["ruelle_bound"] = std::move(rb);
  } else {
    out["ruelle_bound"] = nullptr;
  }

  bool ok = true;
  if (spec.diagnostic_observable) {
    const std::string& label = *spec.diagnostic_observable;
    if (spec.q != 2 || label.size() != 7 || label.rfind("sigma_", 0) != 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "diagnostic observable must be sigma_x, sigma_y or sigma_z on a q = 2 chain");
    }
    const int c = spec.diagnostic_site;
    const LatticeRegion support(c, c, spec.q);
    const AlgebraElement a = pauli_at(label[6], c, support);
    std::vector<LatticeRegion> volumes;
    for (int r : spec.diagnostic_radii) volumes.emplace_back(c - r, c + r, spec.q);
    const ConvergenceDiagnostic diag =
        convergence_diagnostic(phi, a, support, spec.diagnostic_t, volumes);
    ok = diag.approximately_inner;

    if (!region.contains(c)) {
      throw Error(ErrorCode::InvalidArgument, "diagnostic site lies outside the region");
    }
    const AlgebraElement ar = embed_observable(a, support, region);
    const double r1 = derivative_check(phi, region, ar, spec.derivative_t);
    const double r2 = derivative_check(phi, region, ar, spec.derivative_t / 2.0);
    Json dj = to_json(diag);
    dj["observable"] = label;
    dj["site"] = c;
    dj["radii"] = spec.diagnostic_radii;
    dj["t"] = spec.diagnostic_t;
    dj["derivative"] = {{"t", spec.derivative_t},
                        {"residual", r1},
                        {"residual_half_t", r2},
                        {"ratio", r2 > 0.0 ? Json(r1 / r2) : Json(nullptr)}};
    out["diagnostic"] = std::move(dj);
  }
  out["passed"] = ok;
  emit(flags, out.dump(2) + "\n");
  return ok ? kExitPass : kExitViolation;
}

int run_gns(const CommonFlags& flags) {
  const Scenario s = load_with_overrides(flags);
  if (!s.generator) throw Error(ErrorCode::InvalidArgument, "gns needs a generator scenario");
  const Superoperator delta = build_generator(s);
  const State state = build_state(s);

  PipelineOptions options;
  options.n_max = s.run.n_max;
  options.seed = s.run.seed;
  options.sample_count = s.run.sample_count;
  options.tol = std::max(s.run.tol, 1e-8);
  options.certify = certify_options(s);

  Json out = report_header(s, "gns");
  const GnsRepresentation rep = gns_construct(state);
  out["hilbert_dim"] = rep.dim();
  out["faithful"] = rep.faithful();
  out["gram_residual"] = rep.gram_residual();
  int code = kExitPass;
  try {
    const PipelineReport report = implementation_pipeline(delta, state, options);
    out["status"] = report.passed && report.consistent ? "pass" : "fail";
    out["pipeline"] = to_json(report);
    if (!(report.passed && report.consistent)) code = kExitViolation;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::HypothesisViolation) throw;
    out["status"] = "hypotheses not met";
    out["reason"] = e.what();
    code = kExitViolation;
  }
  try {
    const SkewImplementation skew = skew_implementing_operator(delta, rep, options.tol);
    out["skew"] = {{"skew_defect", skew.skew_defect},
                   {"commutator_residual", skew.commutator_residual},
                   {"residual", skew.op.residual},
                   {"matrix", to_json(skew.op.matrix)}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::HypothesisViolation && e.code() != ErrorCode::NotImplementable) throw;
    out["skew"] = {{"status", to_string(e.code())}, {"reason", e.what()}};
  }
  emit(flags, out.dump(2) + "\n");
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cdlab: dissipative generators and quantum dynamical semigroups"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

  CommonFlags certify_flags;
  CommonFlags evolve_flags;
  CommonFlags lattice_flags;
  CommonFlags gns_flags;
  EvolveFlags evolve;

  auto* certify = app.add_subcommand("certify", "certify complete dissipativity and CP of exp(t delta)");
  add_common(certify, certify_flags);
  auto* ev = app.add_subcommand("evolve", "write an observable trajectory as CSV");
  add_common(ev, evolve_flags);
  ev->add_option("--t-grid", evolve.t_grid, "start:stop:step");
  ev->add_option("--observable", evolve.observables, "observable label (repeatable)");
  auto* lattice = app.add_subcommand("lattice", "local Hamiltonian, Ruelle bound and convergence");
  add_common(lattice, lattice_flags);
  auto* gns = app.add_subcommand("gns", "GNS construction and the implementing-operator pipeline");
  add_common(gns, gns_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (certify->parsed()) return run_certify(certify_flags);
    if (ev->parsed()) return run_evolve(evolve_flags, evolve);
    if (lattice->parsed()) return run_lattice(lattice_flags);
    if (gns->parsed()) return run_gns(gns_flags);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
