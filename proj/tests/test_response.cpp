#include "doctest.h"

#include "lieblab/errors.hpp"
#include "lieblab/response.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <random>

using namespace lieblab;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

HamiltonianSpec ring(int l, int n, Vector v = {}) {
  if (v.size() == 0) v = Vector::Zero(l);
  return HamiltonianSpec(LatticeSystem(l, Topology::ring, n), 1.0, PotentialField(v));
}

// Occupation expectation of column `c` of a brute-force eigenbasis.
oracle::Vec bf_density(const oracle::BruteForce& bf, const oracle::Vec& psi, int sites) {
  oracle::Vec n = oracle::Vec::Zero(sites);
  for (std::size_t a = 0; a < bf.masks.size(); ++a)
    for (int r = 0; r < sites; ++r)
      if ((bf.masks[a] >> r) & 1U) n[r] += psi[static_cast<Eigen::Index>(a)] * psi[static_cast<Eigen::Index>(a)];
  return n;
}

// Equal-weight density of the `q` lowest brute-force eigenstates.
oracle::Vec bf_manifold_density(int l, int n, const oracle::Vec& v, int q) {
  const auto bf = oracle::brute_force_hamiltonian(l, n, true, 1.0, v, oracle::Mat::Zero(l, l));
  Eigen::SelfAdjointEigenSolver<oracle::Mat> es(bf.h);
  oracle::Vec out = oracle::Vec::Zero(l);
  for (int k = 0; k < q; ++k) out += bf_density(bf, es.eigenvectors().col(k), l) / q;
  return out;
}

// Weighted density of perturbed states continued from reference vectors
// (matched by overlap), brute-force basis.
oracle::Vec bf_continued_density(int l, int n, const oracle::Vec& v,
                                 const std::vector<oracle::Vec>& reference, const oracle::Vec& lambdas) {
  const auto bf = oracle::brute_force_hamiltonian(l, n, true, 1.0, v, oracle::Mat::Zero(l, l));
  Eigen::SelfAdjointEigenSolver<oracle::Mat> es(bf.h);
  oracle::Vec out = oracle::Vec::Zero(l);
  for (std::size_t k = 0; k < reference.size(); ++k) {
    Eigen::Index best = 0;
    (es.eigenvectors().leftCols(static_cast<Eigen::Index>(reference.size()) + 4).transpose() * reference[k])
        .cwiseAbs()
        .maxCoeff(&best);
    out += lambdas[static_cast<Eigen::Index>(k)] * bf_density(bf, es.eigenvectors().col(best), l);
  }
  return out;
}

// Maps a library eigenvector (ascending-mask basis) onto the brute-force
// (descending-mask) basis.
oracle::Vec to_bf_basis(const SpectrumBundle& b, Eigen::Index col, const oracle::BruteForce& bf) {
  oracle::Vec out(static_cast<Eigen::Index>(bf.masks.size()));
  for (std::size_t a = 0; a < bf.masks.size(); ++a)
    out[static_cast<Eigen::Index>(a)] = b.states(b.basis->index_of(bf.masks[a]), col);
  return out;
}
}  // namespace

TEST_CASE("two-site kernel") {
  const auto b = solve(ring(2, 1));
  const auto chi = chi_nondegenerate(b);
  CHECK(chi.matrix(0, 0) == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(chi.matrix(0, 1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(chi.matrix(1, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(chi.matrix(1, 1) == doctest::Approx(-0.25).epsilon(1e-14));

  // Finite-difference oracle on the single-particle forward map.
  auto forward = [](const oracle::Vec& v) {
    return oracle::aufbau_density(oracle::single_particle(2, true, 1.0, v), 1);
  };
  const oracle::Mat fd0 = oracle::fd_jacobian(forward, oracle::Vec::Zero(2), 1e-5);
  CHECK((fd0 - chi.matrix).cwiseAbs().maxCoeff() < 1e-6);

  const Vector v = vec({0.5, -0.5});
  const auto chiv = chi_nondegenerate(solve(ring(2, 1, v)));
  const oracle::Mat fd = oracle::fd_jacobian(forward, v, 1e-5);
  CHECK((fd - chiv.matrix).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("non-degenerate kernels match finite differences with spacing") {
  std::mt19937_64 rng(8);
  for (int l : {3, 5, 6}) {
    const LatticeSystem sys(l, Topology::open_chain, 2, 0.5);
    const Vector v = oracle::random_zero_mean(rng, l);
    const auto chi = chi_nondegenerate(solve(HamiltonianSpec(sys, 1.0, PotentialField(v))));
    auto forward = [&](const oracle::Vec& x) -> oracle::Vec {
      return oracle::aufbau_density(oracle::single_particle(l, false, 1.0, x), 2) / sys.spacing;
    };
    // dn(r) = h sum_r' chi(r', r) dw(r')  =>  dn_r / dv_r' = h chi(r', r)
    const oracle::Mat fd = oracle::fd_jacobian(forward, v, 1e-5);
    CHECK((fd - sys.spacing * chi.matrix).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(chi.max_row_sum() < 1e-12);
  }
}

TEST_CASE("kernel refusals") {
  CHECK_THROWS_AS(chi_nondegenerate(solve(ring(4, 2))), DegenerateGroundState);
  const HamiltonianSpec tiny(LatticeSystem(2, Topology::ring, 1), 1e-12, PotentialField::zeros(2));
  CHECK_THROWS_AS(chi_nondegenerate(solve(tiny)), SingularGapError);
}

TEST_CASE("sum rule, symmetry and sign on sampled bundles") {
  std::mt19937_64 rng(31);
  for (int l = 2; l <= 8; ++l)
    for (int n = 1; n < l; ++n) {
      const auto b = solve(ring(l, n, oracle::random_zero_mean(rng, l)));
      const auto chi = chi_canonical(b);
      CHECK(chi.max_row_sum() < 1e-9);
      CHECK(chi.symmetry_error() < 1e-10);
      Eigen::SelfAdjointEigenSolver<Matrix> es(-chi.matrix);
      // -chi is PSD with exactly one null direction: the constants.
      CHECK(es.eigenvalues()[0] > -1e-12);
      if (l > 2) CHECK(es.eigenvalues()[1] > 1e-8);
      CHECK((chi.matrix * Vector::Ones(l)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("degenerate kernels") {
  const auto spec = ring(4, 2);
  const auto b = solve(spec);
  const Vector bump = vec({1, 0, 0, 0});

  SUBCASE("alignment contract") {
    CHECK_THROWS_AS(chi_degenerate(b, EnsembleWeights::equal(2), PotentialField(bump)), ContractViolation);
    const auto a = align_degenerate_basis(b, PotentialField(bump));
    CHECK_THROWS_AS(chi_degenerate(a, EnsembleWeights::equal(2), PotentialField(vec({0, 1, 0, 0}))),
                    ContractViolation);
    // A constant shift of the perturbation is the same direction.
    CHECK_NOTHROW(chi_degenerate(a, EnsembleWeights::equal(2), PotentialField(vec({3, 2, 2, 2}))));
  }

  SUBCASE("q_s = 1 reduces to the non-degenerate kernel") {
    const auto b3 = solve(ring(3, 1, vec({0.1, 0.2, -0.3})));
    const auto a3 = align_degenerate_basis(b3, PotentialField(bump.head(3)));
    CHECK(chi_degenerate(a3, EnsembleWeights::equal(1), PotentialField(bump.head(3))).matrix ==
          chi_nondegenerate(b3).matrix);
  }

  SUBCASE("equal weights match finite differences of the manifold density") {
    const auto a = align_degenerate_basis(b, PotentialField(bump));
    const auto chi = chi_degenerate(a, EnsembleWeights::equal(2), PotentialField(bump));
    const oracle::Vec dw = project_zero_mean(bump);
    const double eps = 1e-5;
    const oracle::Vec fd = (bf_manifold_density(4, 2, eps * dw, 2) - bf_manifold_density(4, 2, -eps * dw, 2)) / (2 * eps);
    CHECK((fd - chi.apply(dw)).cwiseAbs().maxCoeff() < 1e-5);
    // Full Jacobian as well: the equal-weights kernel is basis independent.
    auto forward = [](const oracle::Vec& v) { return bf_manifold_density(4, 2, v, 2); };
    CHECK((oracle::fd_jacobian(forward, oracle::Vec::Zero(4), 1e-5) - chi.matrix).cwiseAbs().maxCoeff() < 1e-5);
  }

  SUBCASE("row sums vanish for random weights") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto a = align_degenerate_basis(b, PotentialField(bump));
    for (int trial = 0; trial < 50; ++trial) {
      const double x = u(rng);
      const auto chi = chi_degenerate(a, EnsembleWeights(vec({x, 1 - x})), PotentialField(bump));
      CHECK(chi.max_row_sum() < 1e-9);
      CHECK(chi.symmetry_error() < 1e-10);
    }
  }
}

TEST_CASE("xi term") {
  SUBCASE("non-degenerate: empty sum") {
    const auto b = align_degenerate_basis(solve(ring(3, 1)), PotentialField(vec({1, 0, 0})));
    const auto xi = xi_quadratic(b, EnsembleWeights::equal(1), PotentialField(vec({1, 0, 0})));
    CHECK(xi.assembled.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("slope-degenerate perturbations are refused") {
    const Vector c = Vector::Constant(4, 1.0);
    const auto a = align_degenerate_basis(solve(ring(4, 2)), PotentialField(c));
    CHECK_THROWS_AS(xi_quadratic(a, EnsembleWeights::equal(2), PotentialField(c)), SlopeDegenerate);
  }

  SUBCASE("6-ring N=2: unequal weights give a term matching finite differences") {
    std::mt19937_64 rng(3);
    const auto b = solve(ring(6, 2));
    REQUIRE(b.ground_degeneracy == 2);
    const auto bf = oracle::brute_force_hamiltonian(6, 2, true, 1.0, oracle::Vec::Zero(6), oracle::Mat::Zero(6, 6));
    for (int trial = 0; trial < 5; ++trial) {
      const Vector dw = oracle::random_zero_mean(rng, 6);
      const auto a = align_degenerate_basis(b, PotentialField(dw));
      const EnsembleWeights lam(vec({0.7, 0.3}));
      const auto xi = xi_quadratic(a, lam, PotentialField(dw));
      CHECK(xi.hermiticity_error() < 1e-14);
      CHECK(xi.assembled.cwiseAbs().maxCoeff() > 1e-6);
      CHECK(std::abs(integrate(a.system, xi.assembled)) < 1e-12);

      const auto equal = xi_quadratic(a, EnsembleWeights::equal(2), PotentialField(dw));
      CHECK(equal.assembled.cwiseAbs().maxCoeff() < 1e-10);

      // d/d eps of the weighted density of the continued adapted states.
      const std::vector<oracle::Vec> ref{to_bf_basis(a, 0, bf), to_bf_basis(a, 1, bf)};
      const double eps = 1e-4;
      const oracle::Vec fd = (bf_continued_density(6, 2, eps * dw, ref, lam.lambdas) -
                              bf_continued_density(6, 2, -eps * dw, ref, lam.lambdas)) /
                             (2 * eps);
      const auto chi = chi_degenerate(a, lam, PotentialField(dw));
      CHECK((fd - chi.apply(dw) - xi.assembled).cwiseAbs().maxCoeff() < 1e-6);
    }
  }

  SUBCASE("4-ring N=2: the term vanishes identically, confirmed by finite differences") {
    const auto b = solve(ring(4, 2));
    const auto bf = oracle::brute_force_hamiltonian(4, 2, true, 1.0, oracle::Vec::Zero(4), oracle::Mat::Zero(4, 4));
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector dw = trial == 0 ? project_zero_mean(vec({1, 0, 0, 0})) : oracle::random_zero_mean(rng, 4);
      const auto a = align_degenerate_basis(b, PotentialField(dw));
      const EnsembleWeights lam(vec({0.7, 0.3}));
      const auto xi = xi_quadratic(a, lam, PotentialField(dw));
      CHECK(xi.assembled.cwiseAbs().maxCoeff() < 1e-12);
      const std::vector<oracle::Vec> ref{to_bf_basis(a, 0, bf), to_bf_basis(a, 1, bf)};
      const double eps = 1e-4;
      const oracle::Vec fd = (bf_continued_density(4, 2, eps * dw, ref, lam.lambdas) -
                              bf_continued_density(4, 2, -eps * dw, ref, lam.lambdas)) /
                             (2 * eps);
      CHECK((fd - chi_degenerate(a, lam, PotentialField(dw)).apply(dw)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("remainder diagnostic") {
  const std::vector<double> eps{1e-2, 1e-3, 1e-4};

  SUBCASE("non-degenerate two-site") {
    const auto t = remainder_diagnostic(ring(2, 1, vec({0.5, -0.5})), PotentialField(vec({1, 0})), eps);
    REQUIRE(t.rows.size() == 3);
    for (const auto& r : t.rows) CHECK(r.valid);
    CHECK(t.rows[0].ratio > t.rows[1].ratio);
    CHECK(t.rows[1].ratio > t.rows[2].ratio);
    CHECK(t.loglog_slope() == doctest::Approx(1.0).epsilon(0.2));
  }

  SUBCASE("constant direction leaves the density untouched") {
    const auto t = remainder_diagnostic(ring(5, 2, vec({0.1, 0.4, -0.2, 0.0, -0.3})),
                                        PotentialField(Vector::Constant(5, 2.0)), eps);
    for (const auto& r : t.rows) CHECK(r.remainder_norm == 0.0);
  }

  SUBCASE("degenerate 4-ring, canonical density") {
    const auto t = remainder_diagnostic(ring(4, 2), PotentialField(vec({1, 0, 0.3, 0})), eps);
    CHECK(t.reference_degeneracy == 2);
    for (const auto& r : t.rows) {
      CHECK(r.valid);
      CHECK(r.perturbed_degeneracy == 1);
    }
    CHECK(t.rows[0].ratio > t.rows[1].ratio);
    CHECK(t.rows[1].ratio > t.rows[2].ratio);
    // Half filling on a bipartite ring: particle-hole symmetry makes n[v] - 1/2
    // odd in v, so the second-order remainder vanishes and the ratio falls
    // like eps^2.
    CHECK(t.loglog_slope() == doctest::Approx(2.0).epsilon(0.1));
  }

  SUBCASE("degenerate 6-ring N=2, canonical density") {
    const auto t = remainder_diagnostic(ring(6, 2), PotentialField(vec({1, 0, 0.3, 0, -0.2, 0.5})), eps);
    CHECK(t.reference_degeneracy == 2);
    for (const auto& r : t.rows) CHECK(r.valid);
    CHECK(t.loglog_slope() == doctest::Approx(1.0).epsilon(0.2));
  }

  SUBCASE("epsilons must be positive and descending") {
    CHECK_THROWS_AS(remainder_diagnostic(ring(2, 1), PotentialField(vec({1, 0})), {1e-3, 1e-2}), ValidationError);
    CHECK_THROWS_AS(remainder_diagnostic(ring(2, 1), PotentialField(vec({1, 0})), {0.0}), ValidationError);
  }
}

TEST_CASE("continued manifold flags intruder states") {
  // 4-ring N=1: levels -2, 0, 0, 2. Manifold of size 2 cuts the degenerate pair.
  const auto b = solve(ring(4, 1));
  CHECK(continued_manifold_density(b, 2).crossing);
  CHECK_FALSE(continued_manifold_density(b, 1).crossing);
  CHECK_FALSE(continued_manifold_density(b, 3).crossing);
}
