#pragma once

#include "lieblab/lattice.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace lieblab {

enum class InteractionKind { nearest_neighbor, dense_pairwise };

/// Density-density interaction W = sum_{i<j} w_ij n_i n_j.
struct InteractionSpec {
  InteractionKind kind = InteractionKind::dense_pairwise;
  Matrix strength;  // symmetric L x L, zero diagonal

  static InteractionSpec nearest_neighbor(const LatticeSystem& system, double u);
  static InteractionSpec dense_pairwise(Matrix w);
  void validate(const LatticeSystem& system) const;
};

struct HamiltonianSpec {
  LatticeSystem system;
  double hopping = 1.0;
  PotentialField external;
  std::optional<InteractionSpec> interaction;

  HamiltonianSpec() = default;
  HamiltonianSpec(LatticeSystem system, double hopping, PotentialField external,
                  std::optional<InteractionSpec> interaction = std::nullopt);

  HamiltonianSpec with_potential(PotentialField v) const;
  void validate() const;
};

inline constexpr std::size_t kMaxBasisDimension = 20000;

/// N-particle occupation basis. States are bit masks (bit i = site i
/// occupied), stored in ascending numeric order.
class FockBasis {
public:
  FockBasis(int sites, int particles);

  std::size_t dimension() const { return states_.size(); }
  int sites() const { return sites_; }
  int particles() const { return particles_; }
  std::uint64_t state(std::size_t a) const { return states_[a]; }
  /// Index of a mask, or -1 when it is not in the basis.
  std::ptrdiff_t index_of(std::uint64_t mask) const;
  /// D x L matrix of 0/1 occupations.
  const Matrix& occupations() const { return occupations_; }

private:
  int sites_;
  int particles_;
  std::vector<std::uint64_t> states_;
  Matrix occupations_;
};

std::size_t binomial(int n, int k);

Matrix build_hamiltonian(const HamiltonianSpec& spec, const FockBasis& basis);
/// Convenience overload constructing the basis.
Matrix build_hamiltonian(const HamiltonianSpec& spec);

/// Adapted rotation of the degenerate ground manifold.
struct DegenerateAlignment {
  Vector perturbation;  // zero-mean perturbation the basis was adapted to
  Vector slopes;        // first-order energy slopes E'_k, ascending
  bool slope_degenerate = false;
};

struct SpectrumBundle {
  LatticeSystem system;
  std::shared_ptr<const FockBasis> basis;
  Vector energies;  // ascending
  Matrix states;    // columns are eigenvectors
  int ground_degeneracy = 1;
  double degeneracy_tol = 0.0;
  std::optional<DegenerateAlignment> alignment;

  std::size_t dimension() const { return static_cast<std::size_t>(energies.size()); }
  double ground_energy() const { return energies[0]; }
  /// E_{q_s+1} - E_1, or +inf when the whole spectrum is degenerate.
  double excitation_gap() const;
};

inline constexpr double kDefaultRelativeDegeneracyTol = 1e-9;

/// Full dense eigensolve with residual checks. Degeneracy tolerance is
/// relative to the spectral range.
SpectrumBundle diagonalize(const Matrix& h, std::shared_ptr<const FockBasis> basis,
                           const LatticeSystem& system,
                           double relative_tol = kDefaultRelativeDegeneracyTol);
SpectrumBundle solve(const HamiltonianSpec& spec,
                     double relative_tol = kDefaultRelativeDegeneracyTol);

/// Number of leading energies within `tol` of the first.
int count_degenerate(const Vector& energies, double tol);

/// Rotates the degenerate ground manifold onto the eigenbasis of the
/// projected perturbation. A non-degenerate bundle is returned unchanged apart
/// from the recorded slope.
SpectrumBundle align_degenerate_basis(const SpectrumBundle& bundle, const PotentialField& dw);

inline constexpr double kSlopeDegeneracyTol = 1e-10;

/// Occupation-weighted diagonal of a site potential in the many-body basis.
Vector potential_diagonal(const FockBasis& basis, const Vector& v);

/// <psi_a| n_r |psi_b> for every site r (occupation units).
Vector transition_occupation(const SpectrumBundle& bundle, std::size_t a, std::size_t b);

}  // namespace lieblab
