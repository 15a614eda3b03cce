#include "lieblab/spectral_inverse.hpp"

#include "lieblab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace lieblab {

Matrix zero_mean_basis(int sites) {
  Matrix q = Matrix::Zero(sites, sites - 1);
  for (int j = 1; j < sites; ++j) {
    const double norm = std::sqrt(static_cast<double>(j) * (j + 1));
    q.col(j - 1).head(j).setConstant(1.0 / norm);
    q(j, j - 1) = -static_cast<double>(j) / norm;
  }
  return q;
}

SpectralDecomposition decompose(const ResponseKernel& kernel) {
  const int l = kernel.system.sites;
  const double h = kernel.system.spacing;
  if (kernel.matrix.rows() != l || kernel.matrix.cols() != l)
    throw DimensionError("kernel does not match lattice");

  // (-chi f)(r) = -h sum_r' chi(r, r') f(r')
  const Matrix op = -h * kernel.matrix;
  const Matrix basis = zero_mean_basis(l);
  Matrix reduced = basis.transpose() * op * basis;
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(reduced);
  if (es.info() != Eigen::Success)
    throw SolverError("kernel eigensolver did not converge", std::numeric_limits<double>::infinity());

  SpectralDecomposition out;
  out.system = kernel.system;
  out.alphas = es.eigenvalues().reverse();
  out.vectors = (basis * es.eigenvectors().rowwise().reverse()) / std::sqrt(h);
  out.null_direction = Vector::Constant(l, 1.0 / std::sqrt(h * l));
  out.null_eigenvalue = h * out.null_direction.dot(op * out.null_direction);
  const double amin = out.alpha_min();
  out.condition_ratio = amin > 0.0 ? out.alpha_max() / amin : std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < out.alphas.size(); ++j)
    if (out.alphas[j] <= kNearSingularAlpha)
      out.near_singular.push_back({out.alphas[j], out.vectors.col(j)});
  return out;
}

double SpectralDecomposition::max_residual(const ResponseKernel& kernel) const {
  const Matrix op = -system.spacing * kernel.matrix;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < alphas.size(); ++j)
    worst = std::max(worst, (op * vectors.col(j) - alphas[j] * vectors.col(j)).norm());
  return worst;
}

PotentialField apply_inverse(const SpectralDecomposition& dec, const PerturbationField& dm,
                             TikhonovPolicy reg) {
  if (!(reg.mu >= 0.0) || !std::isfinite(reg.mu))
    throw ValidationError("Tikhonov parameter must be non-negative and finite");
  if (dm.values.size() != dec.system.sites)
    throw DimensionError("density change does not match lattice");
  if (dm.kind != PerturbationKind::density_direction)
    throw ValidationError("apply_inverse needs a density-direction perturbation");
  if (std::abs(integrate(dec.system, dm.values)) > 1e-12)
    throw ValidationError("density change must integrate to zero");

  const double h = dec.system.spacing;
  const Vector coeffs = h * (dec.vectors.transpose() * dm.values);
  const double mu2 = reg.mu * reg.mu;
  Vector filtered(coeffs.size());
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    const double a = dec.alphas[j];
    const double denom = a * a + mu2;
    filtered[j] = denom > 0.0 ? -a / denom * coeffs[j] : 0.0;
  }
  return PotentialField(project_zero_mean(Vector(dec.vectors * filtered)), Gauge::zero_mean);
}

}  // namespace lieblab
