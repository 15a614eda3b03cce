#include "lieblab/response.hpp"

#include "lieblab/errors.hpp"

#include <cmath>
#include <limits>

namespace lieblab {

Vector ResponseKernel::apply(const Vector& dw) const {
  if (dw.size() != system.sites) throw DimensionError("perturbation length does not match kernel");
  return system.spacing * (matrix.transpose() * dw);
}

double ResponseKernel::symmetry_error() const {
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
}

double ResponseKernel::max_row_sum() const {
  return (system.spacing * matrix.rowwise().sum()).cwiseAbs().maxCoeff();
}

namespace {

void require_gap(const SpectrumBundle& bundle) {
  if (bundle.excitation_gap() <= kMinimumGap)
    throw SingularGapError("excitation gap E_{q+1} - E_1 below 1e-9");
}

// Per-state kernel of manifold member k in occupation units:
// -2 sum_{i >= q} N_ki(r') N_ik(r) / (E_i - E_1).
Matrix state_kernel_occupation(const SpectrumBundle& bundle, int k) {
  const int q = bundle.ground_degeneracy;
  const auto dim = static_cast<Eigen::Index>(bundle.dimension());
  const int l = bundle.system.sites;
  if (dim == q) return Matrix::Zero(l, l);
  const auto excited = bundle.states.rightCols(dim - q);
  // transitions(r, i) = <k| n_r |i>
  const Matrix transitions = bundle.basis->occupations().transpose() *
                             bundle.states.col(k).asDiagonal() * excited;
  const Vector inv_gap =
      (bundle.energies.tail(dim - q).array() - bundle.energies[0]).inverse().matrix();
  Matrix out = -2.0 * transitions * inv_gap.asDiagonal() * transitions.transpose();
  // Exact symmetry; the product above is symmetric up to round-off.
  out = 0.5 * (out + out.transpose()).eval();
  return out;
}

ResponseKernel weighted_kernel(const SpectrumBundle& bundle, const EnsembleWeights& weights) {
  require_gap(bundle);
  const int l = bundle.system.sites;
  Matrix occ = Matrix::Zero(l, l);
  for (int k = 0; k < weights.size(); ++k) {
    if (weights.lambdas[k] == 0.0) continue;
    occ += weights.lambdas[k] * state_kernel_occupation(bundle, k);
  }
  const double h = bundle.system.spacing;
  ResponseKernel out;
  out.system = bundle.system;
  out.matrix = occ / (h * h);
  out.source = bundle.ground_degeneracy == 1 ? KernelSource::nondegenerate
                                             : KernelSource::degenerate_ensemble;
  out.weights = weights;
  return out;
}

void require_alignment(const SpectrumBundle& bundle, const PotentialField& dw) {
  if (bundle.ground_degeneracy == 1) return;
  if (!bundle.alignment)
    throw ContractViolation("degenerate manifold has not been aligned with the perturbation");
  const Vector projected = project_zero_mean(dw.values);
  const double scale = std::max(1.0, projected.cwiseAbs().maxCoeff());
  if (projected.size() != bundle.alignment->perturbation.size() ||
      (projected - bundle.alignment->perturbation).cwiseAbs().maxCoeff() > 1e-14 * scale)
    throw ContractViolation("degenerate manifold was aligned with a different perturbation");
}

}  // namespace

ResponseKernel chi_nondegenerate(const SpectrumBundle& bundle) {
  if (bundle.ground_degeneracy != 1)
    throw DegenerateGroundState("ground state is degenerate; use chi_degenerate");
  return weighted_kernel(bundle, EnsembleWeights::equal(1));
}

ResponseKernel chi_degenerate(const SpectrumBundle& bundle, const EnsembleWeights& weights,
                              const PotentialField& dw) {
  if (weights.size() != bundle.ground_degeneracy)
    throw ValidationError("weight count does not match ground degeneracy");
  require_alignment(bundle, dw);
  return weighted_kernel(bundle, weights);
}

ResponseKernel chi_canonical(const SpectrumBundle& bundle) {
  return weighted_kernel(bundle, EnsembleWeights::equal(bundle.ground_degeneracy));
}

double QuadraticResponseData::hermiticity_error() const {
  double err = 0.0;
  for (int k = 0; k < degeneracy; ++k)
    for (int l = 0; l < degeneracy; ++l) {
      err = std::max(err, (manifold_transitions[k * degeneracy + l] -
                           manifold_transitions[l * degeneracy + k])
                              .cwiseAbs()
                              .maxCoeff());
      err = std::max(err, std::abs(coupling(k, l) - coupling(l, k)));
    }
  return err;
}

QuadraticResponseData xi_quadratic(const SpectrumBundle& bundle, const EnsembleWeights& weights,
                                   const PotentialField& dw) {
  const int q = bundle.ground_degeneracy;
  if (weights.size() != q) throw ValidationError("weight count does not match ground degeneracy");
  require_alignment(bundle, dw);
  QuadraticResponseData out;
  out.degeneracy = q;
  out.assembled = Vector::Zero(bundle.system.sites);
  if (q == 1) {
    out.manifold_transitions.push_back(transition_occupation(bundle, 0, 0));
    out.coupling = Matrix::Zero(1, static_cast<Eigen::Index>(bundle.dimension()));
    out.slopes = bundle.alignment ? bundle.alignment->slopes : Vector();
    return out;
  }
  if (bundle.alignment->slope_degenerate)
    throw SlopeDegenerate("perturbation does not split the degenerate manifold");
  require_gap(bundle);

  const Vector dw0 = project_zero_mean(dw.values);
  const Vector diag = potential_diagonal(*bundle.basis, dw0);
  out.slopes = bundle.alignment->slopes;
  out.coupling = bundle.states.leftCols(q).transpose() * diag.asDiagonal() * bundle.states;
  for (int k = 0; k < q; ++k)
    for (int l = 0; l < q; ++l)
      out.manifold_transitions.push_back(
          transition_occupation(bundle, static_cast<std::size_t>(k), static_cast<std::size_t>(l)));

  const auto dim = static_cast<Eigen::Index>(bundle.dimension());
  const Vector inv_gap =
      (bundle.energies.tail(dim - q).array() - bundle.energies[0]).inverse().matrix();
  // Antisymmetrised pair sum; (lambda_k - lambda_l) makes equal weights vanish
  // term by term.
  Vector occ = Vector::Zero(bundle.system.sites);
  for (int k = 0; k < q; ++k) {
    for (int l = k + 1; l < q; ++l) {
      const double dl = weights.lambdas[k] - weights.lambdas[l];
      if (dl == 0.0) continue;
      const double second_order = out.coupling.row(l)
                                      .tail(dim - q)
                                      .cwiseProduct(out.coupling.row(k).tail(dim - q))
                                      .dot(inv_gap);
      occ += dl * second_order / (out.slopes[k] - out.slopes[l]) *
             out.manifold_transitions[k * q + l];
    }
  }
  // Real states: the complex conjugate doubles the sum. The minus sign is the
  // one that reproduces finite differences of the weighted ensemble density.
  out.assembled = -2.0 * occ / bundle.system.spacing;
  return out;
}

ManifoldDensity continued_manifold_density(const SpectrumBundle& bundle, int manifold_size) {
  if (manifold_size < 1 || static_cast<std::size_t>(manifold_size) > bundle.dimension())
    throw ValidationError("manifold size out of range");
  ManifoldDensity out;
  out.ground_degeneracy = bundle.ground_degeneracy;
  Vector occ = Vector::Zero(bundle.system.sites);
  for (int k = 0; k < manifold_size; ++k)
    occ += transition_occupation(bundle, static_cast<std::size_t>(k), static_cast<std::size_t>(k));
  out.density = DensityField::from_occupations(bundle.system, occ / manifold_size);
  if (bundle.ground_degeneracy > manifold_size) out.crossing = true;
  if (static_cast<std::size_t>(manifold_size) < bundle.dimension() &&
      bundle.energies[manifold_size] - bundle.energies[manifold_size - 1] <= bundle.degeneracy_tol)
    out.crossing = true;
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double RemainderTable::loglog_slope() const {
  std::vector<double> x, y;
  for (const auto& r : rows)
    if (r.valid) {
      x.push_back(r.epsilon);
      y.push_back(r.ratio);
    }
  return lieblab::loglog_slope(x, y);
}

RemainderTable remainder_diagnostic(const HamiltonianSpec& spec, const PotentialField& dw,
                                    const std::vector<double>& epsilons) {
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw ValidationError("epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      throw ValidationError("epsilons must be strictly descending");
  }
  if (dw.values.size() != spec.system.sites)
    throw DimensionError("perturbation length does not match lattice");

  const Vector direction = project_zero_mean(dw.values);
  const SpectrumBundle reference = solve(spec);
  const int q = reference.ground_degeneracy;
  const DensityField n0 = canonical_density(reference);
  const Vector linear = chi_canonical(reference).apply(direction);

  RemainderTable table;
  table.reference_degeneracy = q;
  for (double eps : epsilons) {
    const HamiltonianSpec perturbed =
        spec.with_potential(PotentialField(spec.external.values + eps * direction));
    const ManifoldDensity m = continued_manifold_density(solve(perturbed), q);
    const Vector dm = m.density.values - n0.values - eps * linear;
    RemainderRow row;
    row.epsilon = eps;
    row.remainder_norm = norm_13(spec.system, dm);
    row.ratio = row.remainder_norm / eps;
    row.valid = !m.crossing;
    row.perturbed_degeneracy = m.ground_degeneracy;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace lieblab
