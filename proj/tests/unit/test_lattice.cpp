#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cdlab/lattice.hpp"
#include "cdlab/linalg.hpp"

using namespace cdlab;

namespace {
Matrix i2() { return Matrix::Identity(2, 2); }
Matrix kron3(const Matrix& a, const Matrix& b, const Matrix& c) {
  return linalg::kron(linalg::kron(a, b), c);
}
Interaction field(char axis, double h) {
  const Matrix p = axis == 'x' ? sigma_x() : axis == 'y' ? sigma_y() : sigma_z();
  return Interaction(2, {{{0}, h * p}});
}
}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("regions") {
  const LatticeRegion r(2, 5, 3);
  CHECK(r.size() == 4);
  CHECK(r.dim() == 81);
  CHECK(r.contains(2));
  CHECK_FALSE(r.contains(6));
  CHECK(r.contains(LatticeRegion(3, 4, 3)));
  CHECK_FALSE(r.contains(LatticeRegion(1, 4, 3)));
  CHECK(r.algebra().blocks() == std::vector<int>{81});
  CHECK_THROWS_AS(LatticeRegion(3, 2, 2), Error);
  CHECK_THROWS_AS(LatticeRegion(0, 0, 1), Error);
  try {
    LatticeRegion(0, 12, 2);  // 2^13 > 4096
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CapExceeded);
  }
  CHECK(LatticeRegion(0, 11, 2).dim() == 4096);
}

TEST_CASE("interactions validate their terms") {
  CHECK_THROWS_AS(Interaction(2, {{{0}, Matrix{{0, 1}, {0, 0}}}}), Error);
  CHECK_THROWS_AS(Interaction(2, {{{0, 1}, sigma_x()}}), Error);
  CHECK_THROWS_AS(Interaction(2, {{{}, Matrix::Zero(1, 1)}}), Error);
  const Interaction shifted(2, {{{3, 4}, linalg::kron(sigma_z(), sigma_z())}});
  CHECK(shifted.terms()[0].offsets == std::vector<int>{0, 1});
  CHECK(shifted.range() == 1);
  CHECK(shifted.translation_invariant());
  CHECK_FALSE(Interaction(2, {}, {{{0}, sigma_x()}}).translation_invariant());
}

TEST_CASE("local Hamiltonian examples") {
  const LatticeRegion r3(0, 2, 2);
  CHECK(operator_norm(local_hamiltonian(Interaction(2), r3)) == 0.0);

  const double j = 0.7;
  const Interaction ising(2, {{{0, 1}, j * linalg::kron(sigma_z(), sigma_z())}});
  const Matrix expected = j * (kron3(sigma_z(), sigma_z(), i2()) + kron3(i2(), sigma_z(), sigma_z()));
  CHECK((local_hamiltonian(ising, r3).block(0) - expected).norm() < 1e-15);

  const double h = 0.3;
  const Matrix hx = h * (linalg::kron(sigma_x(), i2()) + linalg::kron(i2(), sigma_x()));
  CHECK((local_hamiltonian(field('x', h), LatticeRegion(0, 1, 2)).block(0) - hx).norm() < 1e-15);

  // Site order: the lowest site is the most significant factor.
  const Interaction tagged(2, {}, {{{1}, sigma_z()}});
  CHECK((local_hamiltonian(tagged, LatticeRegion(0, 1, 2)).block(0) - linalg::kron(i2(), sigma_z())).norm() == 0.0);
  CHECK(operator_norm(local_hamiltonian(tagged, LatticeRegion(2, 3, 2))) == 0.0);
}

TEST_CASE("Hamiltonians are hermitian and monotone in the region") {
  const Interaction phi = transverse_field_ising(1.0, 0.5);
  for (int hi = 0; hi < 6; ++hi) {
    const AlgebraElement h = local_hamiltonian(phi, LatticeRegion(0, hi, 2));
    CHECK(operator_norm(h - h.adjoint()) <= 1e-12);
  }
  // H(small) embedded equals the terms of H(large) supported in small.
  const LatticeRegion small(1, 3, 2);
  const LatticeRegion large(0, 4, 2);
  const AlgebraElement lifted = embed_observable(local_hamiltonian(phi, small), small, large);
  Matrix partial = Matrix::Zero(large.dim(), large.dim());
  for (int s = 1; s <= 3; ++s) partial += embed_local(0.5 * sigma_x(), {s}, large);
  for (int s = 1; s <= 2; ++s) partial += embed_local(linalg::kron(sigma_z(), sigma_z()), {s, s + 1}, large);
  CHECK((lifted.block(0) - partial).norm() < 1e-14);
}

TEST_CASE("Ruelle bound") {
  const RuelleBound zero = ruelle_bound(Interaction(2), 1.0, 4);
  CHECK(zero.value == 0.0);
  CHECK(zero.exact);

  const RuelleBound ising = ruelle_bound(transverse_field_ising(1.0, 0.0), 1.0, 4);
  CHECK(ising.value == doctest::Approx(2.0 * std::numbers::e).epsilon(1e-14));
  CHECK(ising.value == doctest::Approx(5.43656365691809).epsilon(1e-14));
  CHECK(ising.exact);
  REQUIRE(ising.contributions.size() == 5);
  CHECK(ising.contributions[0] == 0.0);
  CHECK(ising.contributions[1] == doctest::Approx(2.0));

  const double lambda = 0.7;
  const RuelleBound tfim = ruelle_bound(transverse_field_ising(-1.5, 0.5), lambda, 3);
  CHECK(tfim.value == doctest::Approx(0.5 + 2 * 1.5 * std::exp(lambda)));

  // Two-site terms truncated at n_max = 0 leave a tail.
  const RuelleBound cut = ruelle_bound(transverse_field_ising(1.0, 0.5), 1.0, 0);
  CHECK_FALSE(cut.exact);
  CHECK(cut.tail > 0.0);

  try {
    ruelle_bound(Interaction(2, {}, {{{0}, sigma_x()}}), 1.0, 3);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedStructure);
  }
}

TEST_CASE("embedding observables") {
  const LatticeRegion s0(0, 0, 2);
  const AlgebraElement x = pauli_at('x', 0, s0);
  CHECK(embed_observable(x, s0, s0) == x);
  CHECK(embed_observable(x, s0, LatticeRegion(0, 1, 2)).block(0) == linalg::kron(sigma_x(), i2()));
  CHECK(embed_observable(x, s0, LatticeRegion(-1, 0, 2)).block(0) == linalg::kron(i2(), sigma_x()));
  Sampler s(3);
  const LatticeRegion inner(1, 2, 2);
  const AlgebraElement a = s.element(inner.algebra(), SampleKind::General);
  CHECK(operator_norm(embed_observable(a, inner, LatticeRegion(0, 4, 2))) == doctest::Approx(operator_norm(a)));
  CHECK_THROWS_AS(embed_observable(a, inner, LatticeRegion(2, 4, 2)), Error);
}

TEST_CASE("finite-volume dynamics examples") {
  const LatticeRegion s0(0, 0, 2);
  const AlgebraElement x = pauli_at('x', 0, s0);
  const double h = 0.75;
  CHECK(finite_volume_dynamics(field('z', h), s0, 0.0, x) == x);
  for (double t : {0.1, 0.5, 1.3}) {
    const Matrix expected = std::cos(2 * h * t) * sigma_x() - std::sin(2 * h * t) * sigma_y();
    CHECK((finite_volume_dynamics(field('z', h), s0, t, x).block(0) - expected).norm() < 1e-14);
  }
  // Commuting observable.
  const LatticeRegion r(0, 3, 2);
  const Interaction ising(2, {{{0, 1}, linalg::kron(sigma_z(), sigma_z())}});
  const AlgebraElement z = pauli_at('z', 1, r);
  CHECK(distance(finite_volume_dynamics(ising, r, 2.0, z), z) < 1e-13);
}

TEST_CASE("dynamics: isometry and group law") {
  const Interaction phi = transverse_field_ising(1.0, 0.5);
  const LatticeRegion r(0, 4, 2);
  const FiniteVolumeDynamics dyn(phi, r);
  Sampler s(8);
  for (int i = 0; i < 5; ++i) {
    const AlgebraElement a = s.element(r.algebra(), SampleKind::General);
    CHECK(std::abs(operator_norm(dyn.evolve(a, 0.8)) - operator_norm(a)) <= 1e-10 * operator_norm(a));
    for (double t1 : {0.2, -0.5}) {
      const AlgebraElement lhs = dyn.evolve(dyn.evolve(a, 0.3), t1);
      CHECK(distance(lhs, dyn.evolve(a, 0.3 + t1)) <= 1e-10 * operator_norm(a));
    }
  }
  const Matrix u = dyn.unitary(0.4);
  CHECK((u * u.adjoint() - Matrix::Identity(r.dim(), r.dim())).norm() < 1e-12);
}

TEST_CASE("convergence diagnostic") {
  const LatticeRegion support(4, 4, 2);
  const auto volumes = [](int c, std::vector<int> radii) {
    std::vector<LatticeRegion> out;
    for (int r : radii) out.emplace_back(c - r, c + r, 2);
    return out;
  };
  const Interaction tfim = transverse_field_ising(1.0, 0.5);
  const AlgebraElement x = pauli_at('x', 4, support);

  const ConvergenceDiagnostic still = convergence_diagnostic(tfim, x, support, 0.0, volumes(4, {1, 2, 3}));
  for (double g : still.gaps) CHECK(g == 0.0);
  CHECK(still.approximately_inner);

  const Interaction ising(2, {{{0, 1}, linalg::kron(sigma_z(), sigma_z())}});
  const ConvergenceDiagnostic commuting =
      convergence_diagnostic(ising, pauli_at('z', 4, support), support, 0.7, volumes(4, {1, 2, 3}));
  for (double g : commuting.gaps) CHECK(g <= 1e-12);

  // Reference gaps from an independent dense simulation (numpy, scipy.linalg.expm).
  const ConvergenceDiagnostic d = convergence_diagnostic(tfim, x, support, 0.2, volumes(4, {1, 2, 3, 4}));
  REQUIRE(d.gaps.size() == 3);
  CHECK(d.gaps[0] == doctest::Approx(0.010512971984735995).epsilon(1e-9));
  CHECK(d.gaps[1] == doctest::Approx(4.216141303166729e-05).epsilon(1e-7));
  CHECK(d.gaps[2] == doctest::Approx(8.047756587976193e-08).epsilon(1e-5));
  CHECK(d.approximately_inner);

  CHECK_THROWS_AS(convergence_diagnostic(tfim, x, support, 0.2, {LatticeRegion(3, 5, 2), LatticeRegion(3, 5, 2)}), Error);
  CHECK_THROWS_AS(convergence_diagnostic(tfim, x, support, 0.2, {LatticeRegion(5, 6, 2)}), Error);
}

TEST_CASE("derivative check") {
  const LatticeRegion s0(0, 0, 2);
  const double h = 0.75;
  const AlgebraElement z = pauli_at('z', 0, s0);
  CHECK(derivative_check(field('z', h), s0, z, 0.3) < 1e-14);

  const AlgebraElement x = pauli_at('x', 0, s0);
  const double r1 = derivative_check(field('z', h), s0, x, 0.1);
  const double r2 = derivative_check(field('z', h), s0, x, 0.05);
  CHECK(r1 / r2 >= 1.7);
  CHECK(r1 / r2 <= 2.3);
  // Leading remainder t ||[H, [H, x]]|| / 2 = t (2h)^2 / 2.
  CHECK(r2 == doctest::Approx(0.05 * 4 * h * h / 2).epsilon(0.05));

  const LatticeRegion chain(0, 6, 2);
  const AlgebraElement xc = pauli_at('x', 3, chain);
  const Interaction tfim = transverse_field_ising(1.0, 0.5);
  const double q = derivative_check(tfim, chain, xc, 0.1) / derivative_check(tfim, chain, xc, 0.05);
  CHECK(q >= 1.7);
  CHECK(q <= 2.3);
}

TEST_CASE("pauli_at") {
  const LatticeRegion r(0, 1, 2);
  CHECK(pauli_at('y', 1, r).block(0) == linalg::kron(i2(), sigma_y()));
  CHECK_THROWS_AS(pauli_at('w', 0, r), Error);
  CHECK_THROWS_AS(pauli_at('x', 2, r), Error);
  CHECK_THROWS_AS(pauli_at('x', 0, LatticeRegion(0, 1, 3)), Error);
}

}  // TEST_SUITE
