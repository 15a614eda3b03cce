#include "lieblab/lieb_search.hpp"

#include "lieblab/ensembles.hpp"
#include "lieblab/errors.hpp"
#include "lieblab/response.hpp"
#include "lieblab/spectral_inverse.hpp"

#include <cmath>
#include <sstream>

namespace lieblab {

void LiebConfig::validate() const {
  if (supergradient_iterations < 0 || newton_iterations < 0)
    throw ValidationError("iteration counts must be non-negative");
  if (!(step_a > 0.0) || !(step_b > 0.0)) throw ValidationError("step parameters must be positive");
  if (!(gradient_tol > 0.0)) throw ValidationError("gradient_tol must be positive");
  if (hopping == 0.0) throw ValidationError("hopping must be non-zero");
}

double energy_minimum(const PotentialField& v, const LatticeSystem& system,
                      const std::optional<InteractionSpec>& interaction, double hopping) {
  return solve(HamiltonianSpec(system, hopping, v, interaction)).ground_energy();
}

double dual_objective(const DensityField& n, const PotentialField& v,
                      const std::optional<InteractionSpec>& interaction, double hopping) {
  return energy_minimum(v, n.system, interaction, hopping) - weighted_dot(n.system, v.values, n.values);
}

namespace {

struct DualPoint {
  Vector v;
  SpectrumBundle bundle;
  Vector density;
  double objective;
  double gradient_norm;
};

DualPoint evaluate(const HamiltonianSpec& model, const DensityField& n, const Vector& v) {
  DualPoint p{v, solve(model.with_potential(PotentialField(v))), {}, 0.0, 0.0};
  p.density = canonical_density(p.bundle).values;
  p.objective = p.bundle.ground_energy() - weighted_dot(n.system, v, n.values);
  p.gradient_norm = norm_13(n.system, p.density - n.values);
  return p;
}

}  // namespace

LiebEvaluation lieb_functional(const DensityField& n, const std::optional<InteractionSpec>& interaction,
                               const LiebConfig& cfg) {
  cfg.validate();
  const auto rep = check_representable(n);
  if (!rep.representable) {
    std::ostringstream os;
    os << "density is not N-representable";
    for (const auto& m : rep.messages) os << "; " << m;
    throw ValidationError(os.str());
  }
  const LatticeSystem& sys = n.system;
  const HamiltonianSpec model(sys, cfg.hopping, PotentialField::zeros(sys.sites), interaction);

  LiebEvaluation out;
  DualPoint cur = evaluate(model, n, Vector::Zero(sys.sites));
  DualPoint best = cur;
  out.objective_trace.push_back(cur.objective);

  // Supergradient of g at v: h (n[v] - n).
  int k = 0;
  for (; k < cfg.supergradient_iterations && cur.gradient_norm > cfg.gradient_tol; ++k) {
    const double step = cfg.step_a / (k + cfg.step_b);
    const Vector s = sys.spacing * (cur.density - n.values);
    cur = evaluate(model, n, project_zero_mean(Vector(cur.v + step * s)));
    out.objective_trace.push_back(cur.objective);
    if (cur.objective > best.objective) best = cur;
  }

  // Newton phase from the best supergradient iterate.
  cur = best;
  int newton = 0;
  for (; newton < cfg.newton_iterations && cur.gradient_norm > cfg.gradient_tol; ++newton) {
    const SpectralDecomposition dec = decompose(chi_canonical(cur.bundle));
    const PerturbationField dm =
        density_direction(sys, project_zero_mean(Vector(n.values - cur.density)));
    const Vector dir = apply_inverse(dec, dm).values;
    if (!dir.allFinite()) break;
    bool moved = false;
    double scale = 1.0;
    for (int b = 0; b < 40; ++b, scale *= 0.5) {
      DualPoint trial = evaluate(model, n, project_zero_mean(Vector(cur.v + scale * dir)));
      out.objective_trace.push_back(trial.objective);
      // Ascent on g; near the optimum g is flat to round-off, so a smaller
      // supergradient is accepted as progress too.
      const double slack = 1e-14 * std::max(1.0, std::abs(cur.objective));
      if (trial.objective > cur.objective ||
          (trial.objective >= cur.objective - slack && trial.gradient_norm < cur.gradient_norm)) {
        cur = std::move(trial);
        moved = true;
        break;
      }
    }
    if (cur.objective > best.objective) best = cur;
    if (!moved) break;
  }
  if (cur.objective >= best.objective) best = cur;

  out.value = best.objective;
  out.optimizer = PotentialField(best.v, Gauge::zero_mean);
  out.gradient_norm = best.gradient_norm;
  out.iterations = k + newton;
  out.converged = best.gradient_norm <= cfg.gradient_tol;
  // Newton decrement 1/2 <dn, (-chi)^{-1} dn> estimates sup g - g(v).
  if (best.gradient_norm > 0.0) {
    const SpectralDecomposition dec = decompose(chi_canonical(best.bundle));
    const Vector coeffs =
        sys.spacing * (dec.vectors.transpose() * project_zero_mean(Vector(best.density - n.values)));
    double gap = 0.0;
    for (Eigen::Index j = 0; j < coeffs.size(); ++j)
      gap += dec.alphas[j] > 0.0 ? coeffs[j] * coeffs[j] / dec.alphas[j]
                                 : std::numeric_limits<double>::infinity();
    out.dual_gap_estimate = 0.5 * gap;
  }
  return out;
}

double hartree_energy(const DensityField& n, const std::optional<InteractionSpec>& interaction) {
  if (!interaction) return 0.0;
  interaction->validate(n.system);
  const Vector occ = n.occupations();
  return 0.5 * occ.dot(interaction->strength * occ);
}

EnergyDecomposition xc_decomposition(const DensityField& n,
                                     const std::optional<InteractionSpec>& interaction,
                                     const LiebConfig& cfg,
                                     const std::optional<PotentialField>& external) {
  const LiebEvaluation f = lieb_functional(n, interaction, cfg);
  if (!f.converged) throw SolverError("F_L dual ascent did not converge", f.gradient_norm);
  const LiebEvaluation t = interaction ? lieb_functional(n, std::nullopt, cfg) : f;
  if (!t.converged) throw SolverError("T_L dual ascent did not converge", t.gradient_norm);

  EnergyDecomposition out;
  out.lieb = f.value;
  out.kinetic = t.value;
  out.hartree = hartree_energy(n, interaction);
  out.exchange_correlation = out.lieb - out.kinetic - out.hartree;
  if (external) out.external = weighted_dot(n.system, external->values, n.values);
  return out;
}

DirectionalProbe directional_derivative_probe(FunctionalKind kind, const DensityField& n,
                                              const DensityField& n1,
                                              const std::vector<double>& epsilons,
                                              const std::optional<InteractionSpec>& interaction,
                                              const LiebConfig& cfg) {
  for (double e : epsilons)
    if (!(e > 0.0 && e <= 1.0)) throw ValidationError("epsilon must lie in (0, 1]");
  if (!(n.system == n1.system)) throw ValidationError("densities live on different lattices");
  const std::optional<InteractionSpec> w = kind == FunctionalKind::lieb ? interaction : std::nullopt;

  DirectionalProbe out;
  const LiebEvaluation base = lieb_functional(n, w, cfg);
  out.base_value = base.value;
  out.base_converged = base.converged;
  const Vector direction = n1.values - n.values;
  out.dual_candidate = -weighted_dot(n.system, base.optimizer.values, direction);
  for (double eps : epsilons) {
    const DensityField moved(n.system, n.values + eps * direction);
    const LiebEvaluation g = lieb_functional(moved, w, cfg);
    out.rows.push_back({eps, (g.value - base.value) / eps, g.converged && base.converged});
  }
  return out;
}

}  // namespace lieblab
