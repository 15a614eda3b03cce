#include "lieblab/ensembles.hpp"

#include "lieblab/errors.hpp"

#include <cmath>

namespace lieblab {

EnsembleWeights::EnsembleWeights(Vector l) : lambdas(std::move(l)) {
  if (lambdas.size() == 0) throw ValidationError("ensemble needs at least one weight");
  if ((lambdas.array() < 0.0).any()) throw ValidationError("ensemble weights must be non-negative");
  if (std::abs(lambdas.sum() - 1.0) > 1e-12) throw ValidationError("ensemble weights must sum to 1");
}

EnsembleWeights EnsembleWeights::equal(int q) {
  return EnsembleWeights(Vector::Constant(q, 1.0 / q));
}

bool EnsembleWeights::is_equal() const {
  return (lambdas.array() - lambdas.mean()).abs().maxCoeff() <= 1e-15;
}

DensityField state_density(const SpectrumBundle& bundle, std::size_t k) {
  if (k >= bundle.dimension()) throw ValidationError("state index out of range");
  return DensityField::from_occupations(bundle.system, transition_occupation(bundle, k, k));
}

DensityField ensemble_density(const SpectrumBundle& bundle, const EnsembleWeights& weights) {
  if (weights.size() != bundle.ground_degeneracy)
    throw ValidationError("weight count does not match ground degeneracy");
  Vector occ = Vector::Zero(bundle.system.sites);
  for (int k = 0; k < weights.size(); ++k)
    occ += weights.lambdas[k] * transition_occupation(bundle, k, k);
  return DensityField::from_occupations(bundle.system, occ);
}

DensityField canonical_density(const SpectrumBundle& bundle) {
  return ensemble_density(bundle, EnsembleWeights::equal(bundle.ground_degeneracy));
}

DensityClass canonical_class(const SpectrumBundle& bundle) {
  DensityClass out;
  for (int k = 0; k < bundle.ground_degeneracy; ++k)
    out.members.push_back(state_density(bundle, static_cast<std::size_t>(k)));
  out.canonical = canonical_density(bundle);
  return out;
}

}  // namespace lieblab
