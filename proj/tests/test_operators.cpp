#include "doctest.h"

#include "lieblab/errors.hpp"
#include "lieblab/operators.hpp"
#include "oracles.hpp"

#include <random>

using namespace lieblab;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

HamiltonianSpec ring(int l, int n, Vector v = {}, std::optional<InteractionSpec> w = std::nullopt) {
  const LatticeSystem sys(l, Topology::ring, n);
  if (v.size() == 0) v = Vector::Zero(l);
  return HamiltonianSpec(sys, 1.0, PotentialField(v), std::move(w));
}
}  // namespace

TEST_CASE("fock basis enumeration") {
  const FockBasis b(4, 2);
  REQUIRE(b.dimension() == 6);
  for (std::size_t a = 1; a < b.dimension(); ++a) CHECK(b.state(a - 1) < b.state(a));
  CHECK(b.state(0) == 0b0011);
  CHECK(b.index_of(0b1100) == 5);
  CHECK(b.index_of(0b0111) == -1);
  CHECK(b.occupations().rowwise().sum().isApprox(Vector::Constant(6, 2.0)));
  CHECK(binomial(32, 2) == 496);
  CHECK_THROWS_AS(FockBasis(40, 20), CapacityError);
}

TEST_CASE("two-site hopping matrices") {
  const Matrix h0 = build_hamiltonian(ring(2, 1));
  CHECK(h0(0, 0) == 0.0);
  CHECK(h0(0, 1) == -1.0);
  CHECK(h0(1, 0) == -1.0);
  CHECK(h0(1, 1) == 0.0);

  const Matrix h1 = build_hamiltonian(ring(2, 1, vec({0.5, -0.5})));
  CHECK(h1(0, 0) == 0.5);
  CHECK(h1(1, 1) == -0.5);
  CHECK(h1(0, 1) == -1.0);
}

TEST_CASE("spectra against analytic and Aufbau oracles") {
  const auto b2 = solve(ring(2, 1));
  CHECK(b2.energies[0] == doctest::Approx(-1.0));
  CHECK(b2.energies[1] == doctest::Approx(1.0));
  CHECK(b2.ground_degeneracy == 1);

  const auto b3 = solve(ring(3, 1));
  CHECK(b3.energies[0] == doctest::Approx(-2.0));
  CHECK(b3.energies[1] == doctest::Approx(1.0));
  CHECK(b3.energies[2] == doctest::Approx(1.0));
  CHECK(b3.ground_degeneracy == 1);

  const auto b4 = solve(ring(4, 2));
  const Matrix h1 = oracle::single_particle(4, true, 1.0, Vector::Zero(4));
  CHECK(oracle::aufbau_energy(h1, 2) == doctest::Approx(-2.0));
  CHECK(b4.ground_energy() == doctest::Approx(oracle::aufbau_energy(h1, 2)).epsilon(1e-12));
  CHECK(b4.ground_degeneracy == 2);
  CHECK(oracle::aufbau_degeneracy(h1, 2) == 2);

  // Non-interacting rings and chains of several fillings.
  for (int l = 2; l <= 9; ++l)
    for (int n = 1; n <= std::min(l, 4); ++n)
      for (bool is_ring : {true, false}) {
        const LatticeSystem sys(l, is_ring ? Topology::ring : Topology::open_chain, n);
        const auto b = solve(HamiltonianSpec(sys, 1.0, PotentialField::zeros(l)));
        const Matrix one = oracle::single_particle(l, is_ring, 1.0, Vector::Zero(l));
        CHECK(b.ground_energy() == doctest::Approx(oracle::aufbau_energy(one, n)).epsilon(1e-12));
        CHECK(b.ground_degeneracy == oracle::aufbau_degeneracy(one, n));
      }
}

TEST_CASE("spectrum matches an independent brute-force construction") {
  std::mt19937_64 rng(42);
  for (int l : {3, 4, 5, 6})
    for (int n = 1; n < l; ++n) {
      const Vector v = oracle::random_zero_mean(rng, l);
      const auto w = InteractionSpec::nearest_neighbor(LatticeSystem(l, Topology::ring, n), 0.8);
      const auto b = solve(ring(l, n, v, w));
      const auto bf = oracle::brute_force_hamiltonian(l, n, true, 1.0, v, w.strength);
      Eigen::SelfAdjointEigenSolver<Matrix> es(bf.h);
      CHECK((b.energies - es.eigenvalues()).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("hamiltonian is exactly symmetric and validated") {
  std::mt19937_64 rng(7);
  const auto w = InteractionSpec::nearest_neighbor(LatticeSystem(7, Topology::ring, 3), 1.3);
  const Matrix h = build_hamiltonian(ring(7, 3, oracle::random_zero_mean(rng, 7), w));
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);

  Matrix bad = Matrix::Zero(3, 3);
  bad(0, 1) = 1.0;
  const LatticeSystem s3(3, Topology::ring, 1);
  CHECK_THROWS_AS(HamiltonianSpec(s3, 1.0, PotentialField::zeros(3), InteractionSpec::dense_pairwise(bad)),
                  ValidationError);
  CHECK_THROWS_AS(HamiltonianSpec(s3, 0.0, PotentialField::zeros(3)), ValidationError);
  CHECK_THROWS_AS(HamiltonianSpec(s3, 1.0, PotentialField::zeros(4)), DimensionError);
  CHECK_THROWS_AS(build_hamiltonian(HamiltonianSpec(LatticeSystem(30, Topology::ring, 10), 1.0,
                                                    PotentialField::zeros(30))),
                  CapacityError);
}

TEST_CASE("eigenpair invariants") {
  std::mt19937_64 rng(9);
  const auto spec = ring(6, 3, oracle::random_zero_mean(rng, 6));
  const Matrix h = build_hamiltonian(spec);
  const auto b = solve(spec);
  const auto d = static_cast<Eigen::Index>(b.dimension());
  CHECK((b.states.transpose() * b.states - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((h * b.states - b.states * b.energies.asDiagonal()).colwise().norm().maxCoeff() < 1e-9);
  for (Eigen::Index i = 1; i < d; ++i) CHECK(b.energies[i - 1] <= b.energies[i]);
}

TEST_CASE("gauge covariance") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector v = oracle::random_zero_mean(rng, 5);
    const double c = 3.25;
    const auto b0 = solve(ring(5, 2, v));
    const auto b1 = solve(ring(5, 2, (v.array() + c).matrix()));
    // Shift by N c.
    CHECK(((b1.energies.array() - b0.energies.array()) - 2 * c).abs().maxCoeff() < 1e-12);
    CHECK(std::abs(b1.states.col(0).dot(b0.states.col(0))) > 1 - 1e-10);
  }
}

TEST_CASE("degeneracy detection is stable under tiny noise") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e-13, 1e-13);
  for (int l = 2; l <= 12; ++l)
    for (int n : {1, 2}) {
      if (n >= l) continue;
      Vector noise(l);
      for (int i = 0; i < l; ++i) noise[i] = u(rng);
      CHECK(solve(ring(l, n)).ground_degeneracy == solve(ring(l, n, noise)).ground_degeneracy);
    }
}

TEST_CASE("align_degenerate_basis") {
  SUBCASE("non-degenerate bundle is left alone") {
    const auto b = solve(ring(3, 1));
    const auto a = align_degenerate_basis(b, PotentialField(vec({1, 0, 0})));
    CHECK(a.states == b.states);
    REQUIRE(a.alignment);
    CHECK(a.alignment->slopes.size() == 1);
    CHECK_FALSE(a.alignment->slope_degenerate);
  }

  SUBCASE("bump splits the 4-ring N=2 manifold; slopes match finite differences") {
    const auto spec = ring(4, 2);
    const auto b = solve(spec);
    REQUIRE(b.ground_degeneracy == 2);
    const Vector bump = vec({1, 0, 0, 0});
    const auto a = align_degenerate_basis(b, PotentialField(bump));
    REQUIRE(a.alignment);
    const Vector slopes = a.alignment->slopes;
    CHECK_FALSE(a.alignment->slope_degenerate);
    CHECK(slopes[1] - slopes[0] > 1e-3);

    const double eps = 1e-6;
    const auto bp = oracle::brute_force_hamiltonian(4, 2, true, 1.0, eps * bump, Matrix::Zero(4, 4));
    Eigen::SelfAdjointEigenSolver<Matrix> es(bp.h);
    CHECK((es.eigenvalues()[0] - b.ground_energy()) / eps == doctest::Approx(slopes[0]).epsilon(1e-5));
    CHECK((es.eigenvalues()[1] - b.ground_energy()) / eps == doctest::Approx(slopes[1]).epsilon(1e-5));

    const Matrix g = a.states.leftCols(2);
    CHECK((g.transpose() * g - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    const Vector diag = potential_diagonal(*a.basis, bump);
    const Matrix projected = g.transpose() * diag.asDiagonal() * g;
    CHECK(std::abs(projected(0, 1)) < 1e-12);
  }

  SUBCASE("constant perturbation is slope-degenerate") {
    const auto a = align_degenerate_basis(solve(ring(4, 2)), PotentialField(Vector::Constant(4, 0.7)));
    REQUIRE(a.alignment);
    CHECK(a.alignment->slope_degenerate);
  }
}
