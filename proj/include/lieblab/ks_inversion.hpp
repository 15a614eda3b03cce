#pragma once

#include "lieblab/lattice.hpp"
#include "lieblab/operators.hpp"
#include "lieblab/spectral_inverse.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lieblab {

struct InversionConfig {
  int max_iterations = 200;
  double damping = 1.0;          // (0, 1]
  double residual_tol = 1e-12;   // on ||n[v] - n_target||_{1,3}
  double mu0 = 1e-3;             // Tikhonov schedule mu_k = max(mu0 * ratio^k, floor)
  double mu_ratio = 0.5;
  double mu_floor = 0.0;
  int max_backtracks = 30;
  double hopping = 1.0;

  void validate() const;
  double mu_at(int iteration) const;
};

struct InversionReport {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_trace;   // entry 0 is the initial guess
  std::vector<double> step_inf_trace;   // ||v_{k+1} - v_k||_inf
  std::vector<double> step_l2_trace;
  std::vector<double> alpha_min_trace;
  std::vector<double> damping_trace;   // accepted step scale; 0 marks a restart
  PotentialField potential;
  std::vector<int> zero_density_sites;
  int level_crossings = 0;
  std::vector<std::string> warnings;
};

/// Ground-state (equal-weights) density of the non-interacting lattice
/// Hamiltonian with potential v.
DensityField forward_density(const PotentialField& v, const LatticeSystem& system,
                             double hopping = 1.0);
/// Same for an arbitrary Hamiltonian.
DensityField forward_density(const HamiltonianSpec& spec);

/// Newton density-to-potential inversion:
/// v <- P0(v - s * chi^{-1}_mu (n[v] - n_target)).
InversionReport invert(const DensityField& n_target, const InversionConfig& cfg,
                       const PotentialField& initial_guess);

/// Same iteration for a general (possibly interacting) Hamiltonian template;
/// the template's external potential is ignored.
InversionReport match_density(const DensityField& n_target, const HamiltonianSpec& model,
                              const InversionConfig& cfg, const PotentialField& initial_guess);

struct ProbeStage {
  double epsilon = 0.0;        // requested residual
  double achieved = 0.0;       // ||n_eps - n||_{1,3}
  double drift = 0.0;          // ||v^(k) - v^(k-1)||_inf, 0 for k = 0
  int iterations = 0;
  bool converged = false;
};

struct ProbeReport {
  std::vector<ProbeStage> stages;
  std::vector<int> zero_density_sites;
  /// "smooth" when every stage converged and the drift has decayed below
  /// 1e-6, otherwise "non_smooth".
  std::string verdict;
};

std::vector<double> default_probe_schedule();

ProbeReport representability_probe(const DensityField& n_target, const InversionConfig& cfg,
                                   const PotentialField& initial_guess,
                                   const std::vector<double>& schedule = default_probe_schedule());

}  // namespace lieblab
