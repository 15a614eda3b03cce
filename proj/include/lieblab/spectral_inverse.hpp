#pragma once

#include "lieblab/lattice.hpp"
#include "lieblab/response.hpp"

#include <vector>

namespace lieblab {

/// Eigen-system of -chi on the zero-mean subspace.
///
/// `vectors` columns are orthonormal under the quadrature inner product and
/// orthogonal to constants. The constant direction is deflated explicitly and
/// reported separately with its eigenvalue.
struct SpectralDecomposition {
  LatticeSystem system;
  Vector alphas;   // descending
  Matrix vectors;  // L x (L-1)
  Vector null_direction;
  double null_eigenvalue = 0.0;
  double condition_ratio = 0.0;

  struct NearSingularMode {
    double alpha;
    Vector vector;
  };
  std::vector<NearSingularMode> near_singular;

  double alpha_min() const { return alphas.size() ? alphas[alphas.size() - 1] : 0.0; }
  double alpha_max() const { return alphas.size() ? alphas[0] : 0.0; }
  /// max_j ||(-chi) f_j - alpha_j f_j||_2
  double max_residual(const ResponseKernel& kernel) const;
};

inline constexpr double kNearSingularAlpha = 1e-13;

SpectralDecomposition decompose(const ResponseKernel& kernel);

/// Spectral filter alpha / (alpha^2 + mu^2); mu = 0 is the exact inverse.
struct TikhonovPolicy {
  double mu = 0.0;
};

/// Potential change dw (zero mean) whose linear density response is dm.
PotentialField apply_inverse(const SpectralDecomposition& dec, const PerturbationField& dm,
                             TikhonovPolicy reg = {});

/// Orthonormal basis of the zero-mean subspace of R^L (Helmert contrasts).
Matrix zero_mean_basis(int sites);

}  // namespace lieblab
