#pragma once

#include "lieblab/ensembles.hpp"
#include "lieblab/lattice.hpp"
#include "lieblab/operators.hpp"

#include <string>
#include <vector>

namespace lieblab {

enum class KernelSource { nondegenerate, degenerate_ensemble };

/// Static density response kernel chi(r', r).
///
/// Stored as an integral kernel: a potential change dw produces the density
/// change dn(r) = spacing * sum_r' chi(r', r) dw(r').
struct ResponseKernel {
  LatticeSystem system;
  Matrix matrix;
  KernelSource source = KernelSource::nondegenerate;
  EnsembleWeights weights;

  Vector apply(const Vector& dw) const;
  double symmetry_error() const;
  /// Largest |spacing * sum_r chi(r', r)| over r'.
  double max_row_sum() const;
};

inline constexpr double kMinimumGap = 1e-9;

ResponseKernel chi_nondegenerate(const SpectrumBundle& bundle);
/// Weighted kernel of an adapted degenerate manifold. The bundle must have
/// been aligned with `dw` (up to an additive constant).
ResponseKernel chi_degenerate(const SpectrumBundle& bundle, const EnsembleWeights& weights,
                              const PotentialField& dw);
/// Equal-weights kernel. Independent of the basis chosen inside the ground
/// manifold, so no alignment is needed.
ResponseKernel chi_canonical(const SpectrumBundle& bundle);

/// Ingredients and assembled value of the quadratic (xi) contribution.
struct QuadraticResponseData {
  int degeneracy = 1;
  /// N_kl(r) in occupation units, indexed [k * q + l].
  std::vector<Vector> manifold_transitions;
  /// W_li for l in the manifold (rows) and all states i (columns).
  Matrix coupling;
  Vector slopes;
  /// Contracted xi term per site, density units.
  Vector assembled;

  double hermiticity_error() const;
};

QuadraticResponseData xi_quadratic(const SpectrumBundle& bundle, const EnsembleWeights& weights,
                                   const PotentialField& dw);

/// Equal-weights density of the `manifold_size` lowest states.
struct ManifoldDensity {
  DensityField density;
  int ground_degeneracy = 1;
  bool crossing = false;
};

ManifoldDensity continued_manifold_density(const SpectrumBundle& bundle, int manifold_size);

struct RemainderRow {
  double epsilon = 0.0;
  double remainder_norm = 0.0;  // ||dm||_{1,3}
  double ratio = 0.0;           // ||dm||_{1,3} / epsilon
  bool valid = true;
  int perturbed_degeneracy = 1;
};

struct RemainderTable {
  int reference_degeneracy = 1;
  std::vector<RemainderRow> rows;
  /// Least-squares slope of log(ratio) against log(epsilon) over valid rows
  /// with positive ratios; NaN when fewer than two such rows.
  double loglog_slope() const;
};

/// dm = n[v + eps dw] - n[v] - eps chi dw for each eps (canonical densities).
RemainderTable remainder_diagnostic(const HamiltonianSpec& spec, const PotentialField& dw,
                                    const std::vector<double>& epsilons);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lieblab
