#include "lieblab/operators.hpp"

#include "lieblab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace lieblab {

InteractionSpec InteractionSpec::nearest_neighbor(const LatticeSystem& system, double u) {
  InteractionSpec spec;
  spec.kind = InteractionKind::nearest_neighbor;
  spec.strength = Matrix::Zero(system.sites, system.sites);
  for (auto [i, j] : system.bonds()) {
    spec.strength(i, j) = u;
    spec.strength(j, i) = u;
  }
  return spec;
}

InteractionSpec InteractionSpec::dense_pairwise(Matrix w) {
  InteractionSpec spec;
  spec.kind = InteractionKind::dense_pairwise;
  spec.strength = std::move(w);
  return spec;
}

void InteractionSpec::validate(const LatticeSystem& system) const {
  if (strength.rows() != system.sites || strength.cols() != system.sites)
    throw DimensionError("interaction matrix must be L x L");
  if (!strength.allFinite()) throw ValidationError("interaction matrix has non-finite entries");
  for (int i = 0; i < system.sites; ++i) {
    if (strength(i, i) != 0.0) throw ValidationError("interaction matrix needs a zero diagonal");
    for (int j = 0; j < i; ++j)
      if (strength(i, j) != strength(j, i))
        throw ValidationError("interaction matrix is not symmetric");
  }
}

HamiltonianSpec::HamiltonianSpec(LatticeSystem system, double hopping, PotentialField external,
                                 std::optional<InteractionSpec> interaction)
    : system(std::move(system)),
      hopping(hopping),
      external(std::move(external)),
      interaction(std::move(interaction)) {
  validate();
}

HamiltonianSpec HamiltonianSpec::with_potential(PotentialField v) const {
  HamiltonianSpec out = *this;
  out.external = std::move(v);
  if (out.external.values.size() != system.sites)
    throw DimensionError("potential length does not match lattice");
  return out;
}

void HamiltonianSpec::validate() const {
  system.validate();
  if (hopping == 0.0 || !std::isfinite(hopping))
    throw ValidationError("hopping must be finite and non-zero");
  if (external.values.size() != system.sites)
    throw DimensionError("potential length does not match lattice");
  if (!external.values.allFinite()) throw ValidationError("potential has non-finite entries");
  if (interaction) interaction->validate(system);
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  // Exact for the sizes we accept; bail out early once past any sane guard.
  long double r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > 1e15L) return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(std::llround(r));
}

FockBasis::FockBasis(int sites, int particles) : sites_(sites), particles_(particles) {
  if (sites < 1 || sites > 63) throw CapacityError("lattice too large for bit-mask basis");
  if (particles < 0 || particles > sites) throw ValidationError("invalid particle count");
  const std::size_t dim = binomial(sites, particles);
  if (dim > kMaxBasisDimension) {
    std::ostringstream os;
    os << "basis dimension C(" << sites << "," << particles << ") = " << dim
       << " exceeds limit " << kMaxBasisDimension;
    throw CapacityError(os.str());
  }
  states_.reserve(dim);
  // Gosper's hack enumerates masks with `particles` bits in increasing order.
  if (particles == 0) {
    states_.push_back(0);
  } else {
    std::uint64_t mask = (std::uint64_t{1} << particles) - 1;
    const std::uint64_t limit = std::uint64_t{1} << sites;
    while (mask < limit) {
      states_.push_back(mask);
      const std::uint64_t c = mask & -mask;
      const std::uint64_t r = mask + c;
      mask = (((r ^ mask) >> 2) / c) | r;
    }
  }
  occupations_ = Matrix::Zero(static_cast<Eigen::Index>(states_.size()), sites);
  for (std::size_t a = 0; a < states_.size(); ++a)
    for (int i = 0; i < sites; ++i)
      if ((states_[a] >> i) & 1U) occupations_(static_cast<Eigen::Index>(a), i) = 1.0;
}

std::ptrdiff_t FockBasis::index_of(std::uint64_t mask) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), mask);
  if (it == states_.end() || *it != mask) return -1;
  return it - states_.begin();
}

Vector potential_diagonal(const FockBasis& basis, const Vector& v) {
  if (v.size() != basis.sites()) throw DimensionError("potential length does not match basis");
  return basis.occupations() * v;
}

Matrix build_hamiltonian(const HamiltonianSpec& spec, const FockBasis& basis) {
  spec.validate();
  if (basis.sites() != spec.system.sites || basis.particles() != spec.system.particles)
    throw ValidationError("basis does not match lattice");

  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  Matrix h = Matrix::Zero(dim, dim);
  h.diagonal() = potential_diagonal(basis, spec.external.values);

  if (spec.interaction) {
    const Matrix& w = spec.interaction->strength;
    for (Eigen::Index a = 0; a < dim; ++a) {
      const auto occ = basis.occupations().row(a);
      double e = 0.0;
      for (int i = 0; i < spec.system.sites; ++i)
        for (int j = i + 1; j < spec.system.sites; ++j) e += w(i, j) * occ[i] * occ[j];
      h(a, a) += e;
    }
  }

  // -t (c_i^dag c_j + c_j^dag c_i); the Jordan-Wigner sign counts occupied
  // sites strictly between i and j.
  for (auto [i, j] : spec.system.bonds()) {
    const std::uint64_t bi = std::uint64_t{1} << i;
    const std::uint64_t bj = std::uint64_t{1} << j;
    const std::uint64_t between = (bj - 1) & ~((bi << 1) - 1);
    for (Eigen::Index a = 0; a < dim; ++a) {
      const std::uint64_t m = basis.state(static_cast<std::size_t>(a));
      const bool oi = m & bi;
      const bool oj = m & bj;
      if (oi == oj) continue;
      const std::uint64_t target = m ^ bi ^ bj;
      const auto b = basis.index_of(target);
      const int parity = std::popcount(m & between) & 1;
      h(b, a) += -spec.hopping * (parity ? -1.0 : 1.0);
    }
  }
  return h;
}

Matrix build_hamiltonian(const HamiltonianSpec& spec) {
  const FockBasis basis(spec.system.sites, spec.system.particles);
  return build_hamiltonian(spec, basis);
}

int count_degenerate(const Vector& energies, double tol) {
  int q = 1;
  while (q < energies.size() && energies[q] - energies[0] <= tol) ++q;
  return q;
}

double SpectrumBundle::excitation_gap() const {
  if (ground_degeneracy >= energies.size()) return std::numeric_limits<double>::infinity();
  return energies[ground_degeneracy] - energies[0];
}

SpectrumBundle diagonalize(const Matrix& h, std::shared_ptr<const FockBasis> basis,
                           const LatticeSystem& system, double relative_tol) {
  if (h.rows() != h.cols()) throw DimensionError("Hamiltonian must be square");
  if (basis && static_cast<std::size_t>(h.rows()) != basis->dimension())
    throw DimensionError("Hamiltonian does not match basis");
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) throw ValidationError("Hamiltonian is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw SolverError("symmetric eigensolver did not converge", std::numeric_limits<double>::infinity());

  SpectrumBundle out;
  out.system = system;
  out.basis = std::move(basis);
  out.energies = es.eigenvalues();
  out.states = es.eigenvectors();

  const double residual =
      (h * out.states - out.states * out.energies.asDiagonal()).colwise().norm().maxCoeff();
  if (residual > 1e-9) throw SolverError("eigenpair residual above 1e-9", residual);
  const auto n = out.states.cols();
  const double ortho =
      (out.states.transpose() * out.states - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (ortho > 1e-10) throw SolverError("eigenvectors lost orthonormality", ortho);

  const double range = out.energies[n - 1] - out.energies[0];
  out.degeneracy_tol = relative_tol * range;
  out.ground_degeneracy = count_degenerate(out.energies, out.degeneracy_tol);
  return out;
}

SpectrumBundle solve(const HamiltonianSpec& spec, double relative_tol) {
  auto basis = std::make_shared<const FockBasis>(spec.system.sites, spec.system.particles);
  const Matrix h = build_hamiltonian(spec, *basis);
  return diagonalize(h, std::move(basis), spec.system, relative_tol);
}

Vector transition_occupation(const SpectrumBundle& bundle, std::size_t a, std::size_t b) {
  const auto ia = static_cast<Eigen::Index>(a);
  const auto ib = static_cast<Eigen::Index>(b);
  return bundle.basis->occupations().transpose() *
         bundle.states.col(ia).cwiseProduct(bundle.states.col(ib));
}

SpectrumBundle align_degenerate_basis(const SpectrumBundle& bundle, const PotentialField& dw) {
  if (dw.values.size() != bundle.system.sites)
    throw DimensionError("perturbation length does not match lattice");
  SpectrumBundle out = bundle;
  const int q = bundle.ground_degeneracy;
  const Vector diag = potential_diagonal(*bundle.basis, dw.values);

  DegenerateAlignment al;
  al.perturbation = project_zero_mean(dw.values);
  if (q == 1) {
    al.slopes = Vector::Constant(1, bundle.states.col(0).cwiseAbs2().dot(diag));
    out.alignment = std::move(al);
    return out;
  }

  const auto ground = bundle.states.leftCols(q);
  const Matrix projected = ground.transpose() * diag.asDiagonal() * ground;
  Eigen::SelfAdjointEigenSolver<Matrix> es(projected);
  out.states.leftCols(q) = ground * es.eigenvectors();
  al.slopes = es.eigenvalues();
  for (int k = 1; k < q; ++k)
    if (al.slopes[k] - al.slopes[k - 1] < kSlopeDegeneracyTol) al.slope_degenerate = true;
  out.alignment = std::move(al);
  return out;
}

}  // namespace lieblab
