#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace lieblab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Topology { ring, open_chain };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& s);

/// Finite lattice of L sites holding N spinless fermions.
///
/// `spacing` is the quadrature weight of one site: integrals become
/// `spacing * sum_i f_i`. Densities are stored per unit length, so a site
/// holding occupation o carries density o / spacing.
struct LatticeSystem {
  int sites = 2;
  Topology topology = Topology::ring;
  double spacing = 1.0;
  int particles = 1;

  LatticeSystem() = default;
  LatticeSystem(int sites, Topology topology, int particles, double spacing = 1.0);

  /// Throws ValidationError when an invariant fails.
  void validate() const;

  /// Neighbour pairs (i < j) joined by a hopping bond. A two-site ring has a
  /// single bond.
  std::vector<std::pair<int, int>> bonds() const;

  bool operator==(const LatticeSystem&) const = default;
};

inline constexpr double kNegativeDensityTol = 1e-12;
inline constexpr double kParticleCountTol = 1e-10;

struct DensityField {
  LatticeSystem system;
  Vector values;

  DensityField() = default;
  DensityField(LatticeSystem system, Vector values);

  /// Occupation numbers (values * spacing).
  Vector occupations() const { return values * system.spacing; }
  static DensityField from_occupations(const LatticeSystem& system, const Vector& occ);
  static DensityField uniform(const LatticeSystem& system);
};

enum class Gauge { raw, zero_mean };

struct PotentialField {
  Vector values;
  Gauge gauge = Gauge::raw;

  PotentialField() = default;
  explicit PotentialField(Vector values, Gauge gauge = Gauge::raw)
      : values(std::move(values)), gauge(gauge) {}
  static PotentialField zeros(int sites) { return PotentialField(Vector::Zero(sites)); }
};

enum class PerturbationKind { potential_direction, density_direction };

struct PerturbationField {
  Vector values;
  PerturbationKind kind = PerturbationKind::density_direction;
};

/// Quadrature-weighted sum of a site function.
double integrate(const LatticeSystem& system, const Vector& f);
double weighted_dot(const LatticeSystem& system, const Vector& a, const Vector& b);

/// Discrete L1 ∩ L3 norm: max of the weighted l1 and l3 norms.
double norm_13(const LatticeSystem& system, const Vector& f);
double norm_13(const DensityField& n);
double norm_13(const LatticeSystem& system, const PerturbationField& f);

struct RepresentabilityReport {
  bool representable = true;
  std::vector<int> negative_sites;  // 0-based
  double particle_sum = 0.0;
  bool particle_count_ok = true;
  /// Finite-difference gradient of sqrt(n) is always finite on a finite lattice.
  bool sobolev_ok = true;
  std::vector<std::string> messages;
};

RepresentabilityReport check_representable(const DensityField& n);
inline bool is_representable(const DensityField& n) { return check_representable(n).representable; }

/// Subtracts the weighted mean. Idempotent.
PotentialField project_zero_mean(const LatticeSystem& system, const PotentialField& v);
Vector project_zero_mean(const Vector& v);

/// Builds a density-direction perturbation, checking that it integrates to 0.
PerturbationField density_direction(const LatticeSystem& system, Vector values);

}  // namespace lieblab
