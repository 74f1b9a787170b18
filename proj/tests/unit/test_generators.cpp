#include <doctest.h>

#include <cmath>

#include "cdlab/generators.hpp"
#include "cdlab/linalg.hpp"
#include "cdlab/semigroup.hpp"
#include "../support/random_generators.hpp"

using namespace cdlab;

namespace {
const Algebra kM2 = Algebra::full(2);
AlgebraElement m2(const Matrix& m) { return AlgebraElement(kM2, {m}); }
}  // namespace

TEST_SUITE("generators") {

TEST_CASE("commutator derivation examples") {
  const Superoperator d = commutator_derivation(m2(sigma_z()));
  CHECK(distance(d(m2(sigma_x())), m2(-2.0 * sigma_y())) < 1e-15);
  CHECK(operator_norm(d(m2(sigma_z()))) == 0.0);
  CHECK(operator_norm(d(AlgebraElement::identity(kM2))) == 0.0);
  CHECK(is_hermitian_map(d, 1e-14).hermitian);
  CHECK_THROWS_AS(commutator_derivation(m2(Matrix{{0, 1}, {0, 0}})), Error);
  CHECK(distance(apply_generator(d, Complex(2) * m2(sigma_x())),
                 Complex(2) * apply_generator(d, m2(sigma_x()))) < 1e-15);
}

TEST_CASE("superoperator application matches vectorization") {
  Sampler s(2);
  const Algebra a({2, 3});
  const Superoperator op(a, s.gaussian(13, 13), "g");
  for (int i = 0; i < 5; ++i) {
    const AlgebraElement x = s.element(a, SampleKind::General);
    CHECK((op(x).vectorize() - op.matrix() * x.vectorize()).norm() < 1e-12);
  }
  CHECK(operator_norm(Superoperator::zero(a)(s.element(a, SampleKind::General))) == 0.0);
  CHECK_THROWS_AS(Superoperator(a, Matrix::Zero(4, 4)), Error);
  CHECK_THROWS_AS(op(AlgebraElement::identity(kM2)), Error);
}

TEST_CASE("Leibniz rule for commutator derivations") {
  Sampler s(9);
  const Algebra a({2, 3});
  const AlgebraElement h = s.element(a, SampleKind::Hermitian);
  const Superoperator d = commutator_derivation(h);
  std::vector<std::pair<AlgebraElement, AlgebraElement>> pairs;
  for (int i = 0; i < 100; ++i) {
    pairs.emplace_back(s.element(a, SampleKind::General), s.element(a, SampleKind::General));
  }
  CHECK(leibniz_defect(d, pairs) <= 1e-10);
  CHECK(operator_norm(d(AlgebraElement::identity(a))) == 0.0);
}

TEST_CASE("Lindblad generator examples") {
  const Superoperator d = lindblad_generator(AlgebraElement::zero(kM2), {m2(sigma_x())});
  CHECK(distance(d(m2(sigma_z())), m2(-2.0 * sigma_z())) < 1e-15);
  const Superoperator c = lindblad_generator(m2(sigma_z()), {});
  CHECK(c.matrix() == commutator_derivation(m2(sigma_z())).matrix());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Superoperator l = testing::random_lindblad(seed % 2 ? 3 : 2, seed);
    const double unit = operator_norm(l(AlgebraElement::identity(l.algebra())));
    CHECK(unit <= 1e-14);
    CHECK(is_hermitian_map(l, 1e-13).hermitian);
  }
}

TEST_CASE("amplitude damping: closed-form Heisenberg evolution of sigma_z") {
  // V = sqrt(g) |0><1|: delta(sz) = g (1 - sz), so sz(t) = 1 - e^{-g t} (1 - sz).
  const double g = 0.8;
  Matrix v = Matrix::Zero(2, 2);
  v(0, 1) = std::sqrt(g);
  const Superoperator d = lindblad_generator(AlgebraElement::zero(kM2), {m2(v)});
  const AlgebraElement one = AlgebraElement::identity(kM2);
  for (double t : {0.1, 1.0, 3.0}) {
    const AlgebraElement got = exp_generator(d, t)(m2(sigma_z()));
    const AlgebraElement expected = one - Complex(std::exp(-g * t)) * (one - m2(sigma_z()));
    CHECK(distance(got, expected) < 1e-13);
  }
}

TEST_CASE("Weyl operators and damping") {
  // W(1,0) = X = sigma_x and W(0,1) = Z = sigma_z for d = 2.
  CHECK((weyl_operator(2, 1, 0) - sigma_x()).norm() < 1e-15);
  CHECK((weyl_operator(2, 0, 1) - sigma_z()).norm() < 1e-15);
  for (int d : {2, 3, 4}) {
    const WeylWeights c = squared_min_length_weights(d);
    const Superoperator gen = weyl_damping_generator(d, c);
    const Algebra a = Algebra::full(d);
    CHECK(operator_norm(gen(AlgebraElement::identity(a))) <= 1e-14);
    CHECK(is_hermitian_map(gen, 1e-13).hermitian);
    for (int p = 0; p < d; ++p) {
      for (int q = 0; q < d; ++q) {
        const AlgebraElement w(a, {weyl_operator(d, p, q)});
        const double cv = c.at({p, q});
        CHECK(distance(gen(w), Complex(-cv) * w) < 1e-13);
        const double t = 0.7;
        CHECK(distance(exp_generator(gen, t)(w), Complex(std::exp(-t * cv)) * w) < 1e-12);
      }
    }
  }
  const Superoperator d2 = weyl_damping_generator(2, squared_min_length_weights(2));
  CHECK(distance(d2(m2(sigma_x())), m2(-sigma_x())) < 1e-15);
  WeylWeights bad;
  bad[{0, 0}] = 1.0;
  CHECK_THROWS_AS(weyl_damping_generator(2, bad), Error);
  WeylWeights negative;
  negative[{1, 0}] = -1.0;
  CHECK_THROWS_AS(weyl_damping_generator(2, negative), Error);
}

TEST_CASE("hermitian map verdicts") {
  const Superoperator times_i = Complex(0, 1) * Superoperator::identity(kM2);
  CHECK_FALSE(is_hermitian_map(times_i, 1e-12).hermitian);
  CHECK(is_hermitian_map(Superoperator::zero(kM2), 0.0).hermitian);
}

TEST_CASE("amplification") {
  Sampler s(4);
  const AlgebraElement h = s.element(kM2, SampleKind::Hermitian);
  const Superoperator d = commutator_derivation(h);
  CHECK(amplify_generator(d, 1).matrix() == d.matrix());

  // amplify(commutator(H), n) == commutator(H (x) I_n) in the amplified layout.
  for (int n : {2, 3}) {
    const Superoperator amp = amplify_generator(d, n);
    const Superoperator direct = commutator_derivation(amplify_element(h, n));
    CHECK((amp.matrix() - direct.matrix()).norm() < 1e-12);
    CHECK(operator_norm(amp(AlgebraElement::identity(amp.algebra()))) == 0.0);
  }

  // Functoriality, here with no reordering at all.
  const Superoperator l = testing::random_lindblad(2, 5);
  CHECK(amplify_generator(amplify_generator(l, 2), 3).matrix() == amplify_generator(l, 6).matrix());

  // Entrywise action on a block matrix.
  const Algebra a({1, 2});
  const Superoperator g = testing::random_lindblad(2, 1);
  std::vector<std::vector<AlgebraElement>> entries(2, std::vector<AlgebraElement>(2, AlgebraElement::zero(kM2)));
  for (auto& row : entries) {
    for (auto& e : row) e = s.element(kM2, SampleKind::General);
  }
  const AlgebraElement big = block_matrix(entries);
  const AlgebraElement image = amplify_generator(g, 2)(big);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(distance(block_entry(image, kM2, 2, i, j), g(entries[i][j])) < 1e-13);
      CHECK(block_entry(big, kM2, 2, i, j) == entries[i][j]);
    }
  }
  CHECK_THROWS_AS(amplify_generator(d, 40), Error);  // (2 * 40)^2 > 4096
}

TEST_CASE("fixed maps") {
  const Superoperator t = transpose_map(kM2);
  CHECK(distance(t(m2(sigma_y())), m2(-sigma_y())) < 1e-15);
  const double gamma = 0.4;
  const Superoperator dep = depolarizing_generator(2, gamma);
  const AlgebraElement a = AlgebraElement::identity(kM2) + m2(sigma_x());
  CHECK(distance(dep(a), m2(-gamma * sigma_x())) < 1e-15);
}

}  // TEST_SUITE
