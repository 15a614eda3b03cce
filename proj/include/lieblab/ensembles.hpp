#pragma once

#include "lieblab/lattice.hpp"
#include "lieblab/operators.hpp"

#include <vector>

namespace lieblab {

/// Convex weights over the degenerate ground manifold.
struct EnsembleWeights {
  Vector lambdas;

  EnsembleWeights() = default;
  explicit EnsembleWeights(Vector lambdas);
  static EnsembleWeights equal(int q);
  int size() const { return static_cast<int>(lambdas.size()); }
  bool is_equal() const;
};

struct DensityClass {
  std::vector<DensityField> members;
  DensityField canonical;
};

DensityField state_density(const SpectrumBundle& bundle, std::size_t k);
DensityField ensemble_density(const SpectrumBundle& bundle, const EnsembleWeights& weights);
/// Equal-weights density of the ground manifold.
DensityField canonical_density(const SpectrumBundle& bundle);
DensityClass canonical_class(const SpectrumBundle& bundle);

}  // namespace lieblab
