#include "lieblab/ks_inversion.hpp"

#include "lieblab/ensembles.hpp"
#include "lieblab/lieb_search.hpp"
#include "lieblab/errors.hpp"
#include "lieblab/response.hpp"

#include <cmath>
#include <sstream>

namespace lieblab {

void InversionConfig::validate() const {
  if (max_iterations < 0) throw ValidationError("max_iterations must be non-negative");
  if (!(damping > 0.0 && damping <= 1.0)) throw ValidationError("damping must lie in (0, 1]");
  if (!(residual_tol > 0.0)) throw ValidationError("residual_tol must be positive");
  if (!(mu0 >= 0.0) || !(mu_ratio >= 0.0) || !(mu_floor >= 0.0))
    throw ValidationError("Tikhonov schedule must be non-negative");
  if (max_backtracks < 0) throw ValidationError("max_backtracks must be non-negative");
  if (hopping == 0.0) throw ValidationError("hopping must be non-zero");
}

double InversionConfig::mu_at(int iteration) const {
  return std::max(mu0 * std::pow(mu_ratio, iteration), mu_floor);
}

DensityField forward_density(const HamiltonianSpec& spec) {
  return canonical_density(solve(spec));
}

DensityField forward_density(const PotentialField& v, const LatticeSystem& system, double hopping) {
  return forward_density(HamiltonianSpec(system, hopping, v));
}

namespace {

struct Iterate {
  PotentialField v;
  SpectrumBundle bundle;
  DensityField density;
  double residual;
};

Iterate evaluate(const HamiltonianSpec& model, const PotentialField& v, const DensityField& target) {
  Iterate it{v, solve(model.with_potential(v)), {}, 0.0};
  it.density = canonical_density(it.bundle);
  it.residual = norm_13(target.system, it.density.values - target.values);
  return it;
}

}  // namespace

InversionReport match_density(const DensityField& n_target, const HamiltonianSpec& model,
                              const InversionConfig& cfg, const PotentialField& initial_guess) {
  cfg.validate();
  if (!(n_target.system == model.system)) throw ValidationError("target and model lattices differ");
  const auto rep = check_representable(n_target);
  if (!rep.representable) {
    std::ostringstream os;
    os << "target density is not N-representable";
    for (const auto& m : rep.messages) os << "; " << m;
    throw ValidationError(os.str());
  }
  if (initial_guess.values.size() != n_target.system.sites)
    throw DimensionError("initial guess length does not match lattice");

  InversionReport report;
  for (int i = 0; i < n_target.values.size(); ++i)
    if (n_target.values[i] <= kNegativeDensityTol) report.zero_density_sites.push_back(i);
  if (!report.zero_density_sites.empty())
    report.warnings.push_back(
        "target vanishes on some sites; potential is expected to diverge there (non-invertible candidate)");

  const LatticeSystem& sys = n_target.system;
  Iterate cur = evaluate(model, project_zero_mean(sys, initial_guess), n_target);
  report.residual_trace.push_back(cur.residual);
  double damping = cfg.damping;

  int it = 0;
  bool restarted = false;
  bool refining = false;
  while (it < cfg.max_iterations) {
    if (cur.residual <= cfg.residual_tol) {
      // One refinement step past the tolerance, kept only if it helps, so the
      // returned potential sits at the round-off floor rather than wherever
      // the tolerance happened to be crossed.
      if (refining) break;
      refining = true;
    }
    const SpectralDecomposition dec = decompose(chi_canonical(cur.bundle));
    // Round-off leaves the residual with a ~1e-16 integral; remove it.
    const PerturbationField dm = density_direction(
        sys, project_zero_mean(Vector(cur.density.values - n_target.values)));
    const Vector step = apply_inverse(dec, dm, TikhonovPolicy{cfg.mu_at(it)}).values;
    if (!step.allFinite()) {
      if (!refining) report.warnings.push_back("non-finite Newton step; stopping");
      break;
    }

    double scale = damping;
    std::optional<Iterate> accepted;
    for (int b = 0; b <= cfg.max_backtracks; ++b, scale *= 0.5) {
      Iterate trial = evaluate(model, project_zero_mean(sys, PotentialField(cur.v.values - scale * step)),
                               n_target);
      if (trial.residual < cur.residual || (!refining && trial.residual <= cfg.residual_tol)) {
        accepted = std::move(trial);
        break;
      }
    }
    if (!accepted && refining) break;
    if (!accepted && !restarted) {
      // Newton stalls next to level crossings, where the residual cannot
      // decrease along the current branch. The dual E0[v] - <v, n> is concave,
      // so its maximizer is a safe place to start again.
      restarted = true;
      LiebConfig dual_cfg;
      dual_cfg.hopping = model.hopping;
      std::optional<LiebEvaluation> dual;
      try {
        dual = lieb_functional(n_target, model.interaction, dual_cfg);
      } catch (const Error&) {
      }
      if (dual && dual->optimizer.values.allFinite()) {
        accepted = evaluate(model, project_zero_mean(sys, dual->optimizer), n_target);
        scale = 0.0;
        report.warnings.push_back("Newton stalled at iteration " + std::to_string(it + 1) +
                                  "; restarted from the dual optimizer");
      }
    }
    report.alpha_min_trace.push_back(dec.alpha_min());
    ++it;
    if (!accepted) {
      report.warnings.push_back("line search failed to reduce the residual; stopping");
      break;
    }
    if (accepted->bundle.ground_degeneracy != cur.bundle.ground_degeneracy) {
      ++report.level_crossings;
      damping *= 0.5;
      std::ostringstream os;
      os << "ground-state degeneracy changed " << cur.bundle.ground_degeneracy << " -> "
         << accepted->bundle.ground_degeneracy << " at iteration " << it << "; damping halved";
      report.warnings.push_back(os.str());
    }
    const Vector dv = accepted->v.values - cur.v.values;
    report.step_inf_trace.push_back(dv.cwiseAbs().maxCoeff());
    report.step_l2_trace.push_back(dv.norm());
    report.damping_trace.push_back(scale);
    cur = std::move(*accepted);
    report.residual_trace.push_back(cur.residual);
  }

  report.iterations = it;
  report.residual = cur.residual;
  report.converged = cur.residual <= cfg.residual_tol;
  report.potential = PotentialField(cur.v.values, Gauge::zero_mean);
  return report;
}

InversionReport invert(const DensityField& n_target, const InversionConfig& cfg,
                       const PotentialField& initial_guess) {
  const HamiltonianSpec model(n_target.system, cfg.hopping, PotentialField::zeros(n_target.system.sites));
  return match_density(n_target, model, cfg, initial_guess);
}

std::vector<double> default_probe_schedule() { return {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12}; }

ProbeReport representability_probe(const DensityField& n_target, const InversionConfig& cfg,
                                   const PotentialField& initial_guess,
                                   const std::vector<double>& schedule) {
  ProbeReport out;
  std::optional<Vector> previous;
  bool all_converged = true;
  for (double eps : schedule) {
    InversionConfig stage_cfg = cfg;
    stage_cfg.residual_tol = eps;
    const InversionReport rep = invert(n_target, stage_cfg, initial_guess);
    ProbeStage st;
    st.epsilon = eps;
    st.achieved = rep.residual;
    st.iterations = rep.iterations;
    st.converged = rep.converged;
    st.drift = previous ? (rep.potential.values - *previous).cwiseAbs().maxCoeff() : 0.0;
    previous = rep.potential.values;
    all_converged = all_converged && rep.converged;
    out.zero_density_sites = rep.zero_density_sites;
    out.stages.push_back(st);
  }
  const bool settled = out.stages.size() >= 2 && out.stages.back().drift < 1e-6;
  out.verdict = all_converged && settled ? "smooth" : "non_smooth";
  return out;
}

}  // namespace lieblab
