#pragma once

#include "lieblab/ks_inversion.hpp"
#include "lieblab/lattice.hpp"
#include "lieblab/operators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lieblab {

/// Dual ascent settings for the constrained-search functionals.
///
/// The functional is evaluated as sup_v { E0[v] - <v, n> } over zero-mean v.
/// A supergradient phase with step a / (k + b) is followed by a Newton phase
/// driven by the many-body response kernel at the iterate.
struct LiebConfig {
  int supergradient_iterations = 200;
  double step_a = 1.0;
  double step_b = 10.0;
  int newton_iterations = 100;
  double gradient_tol = 1e-11;  // on ||n[v] - n||_{1,3}
  double hopping = 1.0;

  void validate() const;
};

struct LiebEvaluation {
  double value = 0.0;
  PotentialField optimizer;  // zero mean
  double dual_gap_estimate = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // g(v_k) for every iterate
};

/// F_L[n] (interaction present) or T_L[n] (no interaction).
LiebEvaluation lieb_functional(const DensityField& n, const std::optional<InteractionSpec>& interaction,
                               const LiebConfig& cfg = {});

/// Ground-state energy of T + W + V[v] by exact diagonalization.
double energy_minimum(const PotentialField& v, const LatticeSystem& system,
                      const std::optional<InteractionSpec>& interaction, double hopping = 1.0);

/// Dual objective g(v) = E0[v] - <v, n>.
double dual_objective(const DensityField& n, const PotentialField& v,
                      const std::optional<InteractionSpec>& interaction, double hopping = 1.0);

struct EnergyDecomposition {
  double lieb = 0.0;          // F_L
  double kinetic = 0.0;       // T_L
  double hartree = 0.0;       // E_H
  double exchange_correlation = 0.0;
  double external = 0.0;      // <v, n>
  double total() const { return kinetic + hartree + exchange_correlation + external; }
};

/// E_H = 1/2 sum_ij w_ij n_i n_j (quadrature weighted).
double hartree_energy(const DensityField& n, const std::optional<InteractionSpec>& interaction);

EnergyDecomposition xc_decomposition(const DensityField& n,
                                     const std::optional<InteractionSpec>& interaction,
                                     const LiebConfig& cfg = {},
                                     const std::optional<PotentialField>& external = std::nullopt);

enum class FunctionalKind { lieb, kinetic };

struct DirectionalRow {
  double epsilon = 0.0;
  double quotient = 0.0;
  bool converged = false;
};

struct DirectionalProbe {
  double base_value = 0.0;
  bool base_converged = false;
  /// -<v_hat, n1 - n> from the dual optimizer at n.
  double dual_candidate = 0.0;
  std::vector<DirectionalRow> rows;
};

/// Difference quotients (G[n + eps (n1 - n)] - G[n]) / eps.
DirectionalProbe directional_derivative_probe(FunctionalKind kind, const DensityField& n,
                                              const DensityField& n1,
                                              const std::vector<double>& epsilons,
                                              const std::optional<InteractionSpec>& interaction,
                                              const LiebConfig& cfg = {});

}  // namespace lieblab
