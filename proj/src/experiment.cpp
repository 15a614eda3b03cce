#include "lieblab/experiment.hpp"

#include "lieblab/ensembles.hpp"
#include "lieblab/errors.hpp"
#include "lieblab/ks_inversion.hpp"
#include "lieblab/lieb_search.hpp"
#include "lieblab/response.hpp"
#include "lieblab/spectral_inverse.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#ifndef LIEBLAB_PRESET_DIR
#define LIEBLAB_PRESET_DIR "presets"
#endif

namespace lieblab {

namespace pt = boost::property_tree;
using io::Json;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"experiment", {"name", "operation", "seed", "description"}},
      {"system", {"sites", "topology", "particles", "spacing", "hopping"}},
      {"potential", {"values", "bias", "random_amplitude"}},
      {"interaction", {"kind", "strength", "matrix"}},
      {"perturbation", {"values", "draws", "weights", "epsilons", "threshold", "cancellation_tol"}},
      {"target", {"source", "values"}},
      {"direction", {"values", "potential", "epsilons"}},
      {"inversion",
       {"max_iterations", "damping", "residual_tol", "mu0", "mu_ratio", "mu_floor", "schedule", "guess"}},
      {"lieb",
       {"functional", "supergradient_iterations", "step_a", "step_b", "newton_iterations", "gradient_tol"}},
      {"family", {"sites", "particles"}},
  };
  return s;
}

template <class T>
T get_value(const pt::ptree& sections, const std::string& key, T fallback) {
  const auto node = sections.get_optional<std::string>(pt::ptree::path_type(key, '.'));
  if (!node) return fallback;
  std::istringstream is(boost::algorithm::trim_copy(*node));
  T out{};
  is >> out;
  if (is.fail() || !is.eof()) throw ValidationError("cannot parse '" + key + "' = '" + *node + "'");
  return out;
}

std::string get_string(const pt::ptree& sections, const std::string& key, const std::string& fallback) {
  const auto node = sections.get_optional<std::string>(pt::ptree::path_type(key, '.'));
  return node ? boost::algorithm::trim_copy(*node) : fallback;
}

bool has_key(const pt::ptree& sections, const std::string& key) {
  return static_cast<bool>(sections.get_optional<std::string>(pt::ptree::path_type(key, '.')));
}

std::vector<double> get_list(const pt::ptree& sections, const std::string& key) {
  std::vector<double> out;
  const std::string raw = get_string(sections, key, "");
  if (raw.empty()) return out;
  std::vector<std::string> parts;
  boost::algorithm::split(parts, raw, boost::is_any_of(", \t"), boost::token_compress_on);
  for (auto& p : parts) {
    if (p.empty()) continue;
    char* end = nullptr;
    const double x = std::strtod(p.c_str(), &end);
    if (end == p.c_str() || *end != '\0') throw ValidationError("cannot parse number '" + p + "' in " + key);
    out.push_back(x);
  }
  return out;
}

Vector to_vector(const std::vector<double>& xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<Eigen::Index>(i)] = xs[i];
  return v;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector sized_list(const ExperimentConfig& cfg, const std::string& key) {
  const Vector v = to_vector(get_list(cfg.sections, key));
  if (v.size() != cfg.system.sites)
    throw ValidationError(key + " must list exactly " + std::to_string(cfg.system.sites) + " values");
  return v;
}

Vector random_zero_mean(std::mt19937_64& rng, int sites, double amplitude) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  Vector v(sites);
  for (int i = 0; i < sites; ++i) v[i] = u(rng);
  return project_zero_mean(v);
}

Vector resolve_potential(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  const int l = cfg.system.sites;
  const int given = has_key(cfg.sections, "potential.values") + has_key(cfg.sections, "potential.bias") +
                    has_key(cfg.sections, "potential.random_amplitude");
  if (given > 1) throw ValidationError("[potential] takes only one of values, bias, random_amplitude");
  if (has_key(cfg.sections, "potential.values")) return sized_list(cfg, "potential.values");
  if (has_key(cfg.sections, "potential.random_amplitude"))
    return random_zero_mean(rng, l, get_value<double>(cfg.sections, "potential.random_amplitude", 1.0));
  const double bias = get_value<double>(cfg.sections, "potential.bias", 0.0);
  Vector v(l);
  for (int i = 0; i < l; ++i) v[i] = bias * (i - 0.5 * (l - 1));
  return v;
}

std::optional<InteractionSpec> resolve_interaction(const ExperimentConfig& cfg) {
  const std::string kind = get_string(cfg.sections, "interaction.kind", "none");
  if (kind == "none") return std::nullopt;
  if (kind == "nearest_neighbor")
    return InteractionSpec::nearest_neighbor(cfg.system, get_value<double>(cfg.sections, "interaction.strength", 1.0));
  if (kind == "dense_pairwise") {
    const auto xs = get_list(cfg.sections, "interaction.matrix");
    const int l = cfg.system.sites;
    if (static_cast<int>(xs.size()) != l * l) throw ValidationError("interaction.matrix needs L*L entries");
    Matrix w(l, l);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j) w(i, j) = xs[static_cast<std::size_t>(i * l + j)];
    auto spec = InteractionSpec::dense_pairwise(w);
    spec.validate(cfg.system);
    return spec;
  }
  throw ValidationError("unknown interaction kind '" + kind + "'");
}

InversionConfig inversion_config(const ExperimentConfig& cfg) {
  InversionConfig c;
  const auto& s = cfg.sections;
  c.max_iterations = get_value<int>(s, "inversion.max_iterations", c.max_iterations);
  c.damping = get_value<double>(s, "inversion.damping", c.damping);
  c.residual_tol = get_value<double>(s, "inversion.residual_tol", c.residual_tol);
  c.mu0 = get_value<double>(s, "inversion.mu0", c.mu0);
  c.mu_ratio = get_value<double>(s, "inversion.mu_ratio", c.mu_ratio);
  c.mu_floor = get_value<double>(s, "inversion.mu_floor", c.mu_floor);
  c.hopping = cfg.hopping;
  c.validate();
  return c;
}

LiebConfig lieb_config(const ExperimentConfig& cfg) {
  LiebConfig c;
  const auto& s = cfg.sections;
  c.supergradient_iterations = get_value<int>(s, "lieb.supergradient_iterations", c.supergradient_iterations);
  c.step_a = get_value<double>(s, "lieb.step_a", c.step_a);
  c.step_b = get_value<double>(s, "lieb.step_b", c.step_b);
  c.newton_iterations = get_value<int>(s, "lieb.newton_iterations", c.newton_iterations);
  c.gradient_tol = get_value<double>(s, "lieb.gradient_tol", c.gradient_tol);
  c.hopping = cfg.hopping;
  c.validate();
  return c;
}

struct Target {
  DensityField density;
  std::optional<Vector> generating_potential;
};

Target resolve_target(const ExperimentConfig& cfg, std::mt19937_64& rng,
                      const std::optional<InteractionSpec>& interaction) {
  const std::string source = get_string(cfg.sections, "target.source", "forward");
  if (source == "values") return {DensityField(cfg.system, sized_list(cfg, "target.values")), std::nullopt};
  if (source == "uniform") return {DensityField::uniform(cfg.system), std::nullopt};
  if (source == "forward") {
    const Vector v = resolve_potential(cfg, rng);
    const HamiltonianSpec spec(cfg.system, cfg.hopping, PotentialField(v), interaction);
    return {forward_density(spec), v};
  }
  throw ValidationError("unknown target source '" + source + "'");
}

Json config_echo(const ExperimentConfig& cfg, std::uint64_t seed) {
  Json j;
  for (const auto& [section, node] : cfg.sections) {
    Json sec;
    for (const auto& [key, value] : node) sec[key] = boost::algorithm::trim_copy(value.data());
    j[section] = sec;
  }
  j["effective_seed"] = seed;
  return j;
}

std::vector<double> strictly_descending(std::vector<double> eps, const char* what) {
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (!(eps[i] > 0.0) || (i && !(eps[i] < eps[i - 1])))
      throw ValidationError(std::string(what) + " must be positive and strictly descending");
  return eps;
}

// --- operations -------------------------------------------------------------

struct OpOutput {
  Json results;
  std::string verdict;
  std::vector<std::pair<std::string, std::string>> csv;
};

OpOutput op_kernel(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  const HamiltonianSpec spec(cfg.system, cfg.hopping, PotentialField(resolve_potential(cfg, rng)),
                             resolve_interaction(cfg));
  const auto bundle = solve(spec);
  const auto chi = bundle.ground_degeneracy == 1 ? chi_nondegenerate(bundle) : chi_canonical(bundle);
  const auto dec = decompose(chi);
  OpOutput out;
  out.results["ground_energy"] = bundle.ground_energy();
  out.results["ground_degeneracy"] = bundle.ground_degeneracy;
  out.results["excitation_gap"] = bundle.excitation_gap();
  out.results["density"] = io::to_json(canonical_density(bundle).values);
  out.results["symmetry_error"] = chi.symmetry_error();
  out.results["max_row_sum"] = chi.max_row_sum();
  out.results["spectrum"] = io::to_json(dec);
  out.results["max_eigen_residual"] = dec.max_residual(chi);
  const bool ok = chi.symmetry_error() < 1e-10 && chi.max_row_sum() < 1e-9 && dec.alpha_min() > 0.0;
  out.verdict = ok ? "kernel_invariants_hold" : "kernel_invariant_violation";
  out.csv.emplace_back("kernel", io::matrix_csv(chi.matrix));
  out.csv.emplace_back("alphas", io::columns_csv({"alpha"}, {to_std(dec.alphas)}));
  return out;
}

OpOutput op_cancellation(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  const HamiltonianSpec spec(cfg.system, cfg.hopping, PotentialField(resolve_potential(cfg, rng)));
  const auto bundle = solve(spec);
  const int q = bundle.ground_degeneracy;
  if (q < 2) throw ValidationError("cancellation needs a degenerate ground state (q_s >= 2)");
  const int draws = get_value<int>(cfg.sections, "perturbation.draws", 50);
  const double threshold = get_value<double>(cfg.sections, "perturbation.threshold", 1e-6);
  const double tol = get_value<double>(cfg.sections, "perturbation.cancellation_tol", 1e-10);
  std::vector<double> w = get_list(cfg.sections, "perturbation.weights");
  if (w.empty()) {
    w.assign(static_cast<std::size_t>(q), 1.0 / q);
    w.front() += 0.2;
    w.back() -= 0.2;
  }
  if (static_cast<int>(w.size()) != q) throw ValidationError("perturbation.weights must list q_s weights");
  const EnsembleWeights unequal(to_vector(w));
  const EnsembleWeights equal = EnsembleWeights::equal(q);

  std::vector<double> equal_max, unequal_max;
  int skipped = 0;
  while (static_cast<int>(equal_max.size()) < draws) {
    const PotentialField dw(random_zero_mean(rng, cfg.system.sites, 1.0));
    const auto aligned = align_degenerate_basis(bundle, dw);
    if (aligned.alignment->slope_degenerate) {
      if (++skipped > 100 * draws) throw SlopeDegenerate("could not draw a splitting perturbation");
      continue;
    }
    equal_max.push_back(xi_quadratic(aligned, equal, dw).assembled.cwiseAbs().maxCoeff());
    unequal_max.push_back(xi_quadratic(aligned, unequal, dw).assembled.cwiseAbs().maxCoeff());
  }
  double worst_equal = 0.0;
  int above = 0;
  for (std::size_t i = 0; i < equal_max.size(); ++i) {
    worst_equal = std::max(worst_equal, equal_max[i]);
    above += unequal_max[i] > threshold;
  }
  OpOutput out;
  out.results["ground_degeneracy"] = q;
  out.results["draws"] = draws;
  out.results["skipped_slope_degenerate"] = skipped;
  out.results["unequal_weights"] = io::to_json(w);
  out.results["max_abs_xi_equal_weights"] = worst_equal;
  out.results["cancellation_tol"] = tol;
  out.results["unequal_threshold"] = threshold;
  out.results["unequal_fraction_above_threshold"] = static_cast<double>(above) / draws;
  out.results["max_abs_xi_unequal_weights"] = io::to_json(unequal_max);
  out.verdict = worst_equal < tol ? "equal_weights_cancellation_holds" : "equal_weights_cancellation_violated";
  out.csv.emplace_back("xi", io::columns_csv({"max_abs_xi_equal", "max_abs_xi_unequal"}, {equal_max, unequal_max}));
  return out;
}

OpOutput op_remainder(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  const HamiltonianSpec spec(cfg.system, cfg.hopping, PotentialField(resolve_potential(cfg, rng)),
                             resolve_interaction(cfg));
  const Vector dw = has_key(cfg.sections, "perturbation.values") ? sized_list(cfg, "perturbation.values")
                                                                 : random_zero_mean(rng, cfg.system.sites, 1.0);
  auto eps = get_list(cfg.sections, "perturbation.epsilons");
  if (eps.empty()) eps = {1e-2, 1e-3, 1e-4};
  const auto table = remainder_diagnostic(spec, PotentialField(dw), strictly_descending(eps, "epsilons"));
  OpOutput out;
  out.results["perturbation"] = io::to_json(project_zero_mean(dw));
  out.results["table"] = io::to_json(table);
  bool decays = true;
  int valid = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    valid += table.rows[i].valid;
    if (i && table.rows[i].valid && table.rows[i - 1].valid)
      decays = decays && table.rows[i].ratio <= table.rows[i - 1].ratio;
  }
  out.verdict = valid < 2 ? "insufficient_valid_rows" : (decays ? "remainder_decays" : "remainder_does_not_decay");
  std::vector<double> e, r, ok;
  for (const auto& row : table.rows) {
    e.push_back(row.epsilon);
    r.push_back(row.ratio);
    ok.push_back(row.valid ? 1.0 : 0.0);
  }
  out.csv.emplace_back("remainder", io::columns_csv({"epsilon", "ratio", "valid"}, {e, r, ok}));
  return out;
}

std::string inversion_trace_csv(const InversionReport& r) {
  std::vector<double> it;
  for (std::size_t k = 0; k < r.residual_trace.size(); ++k) it.push_back(static_cast<double>(k));
  return io::columns_csv({"iteration", "residual", "step_inf", "step_l2", "alpha_min"},
                         {it, r.residual_trace, r.step_inf_trace, r.step_l2_trace, r.alpha_min_trace});
}

OpOutput op_inversion(const ExperimentConfig& cfg, std::mt19937_64& rng, bool roundtrip) {
  const auto icfg = inversion_config(cfg);
  const auto interaction = resolve_interaction(cfg);
  Target target = roundtrip ? Target{} : resolve_target(cfg, rng, interaction);
  if (roundtrip) {
    const Vector v = project_zero_mean(resolve_potential(cfg, rng));
    target = {forward_density(HamiltonianSpec(cfg.system, cfg.hopping, PotentialField(v), interaction)), v};
  }
  const Vector guess = has_key(cfg.sections, "inversion.guess") ? sized_list(cfg, "inversion.guess")
                                                                : Vector::Zero(cfg.system.sites);
  const auto report = invert(target.density, icfg, PotentialField(guess));
  OpOutput out;
  out.results["target"] = io::to_json(target.density.values);
  out.results["report"] = io::to_json(report);
  bool recovered = report.converged;
  if (target.generating_potential && !interaction) {
    const Vector vstar = project_zero_mean(*target.generating_potential);
    const double err = (report.potential.values - vstar).cwiseAbs().maxCoeff();
    out.results["v_star"] = io::to_json(vstar);
    out.results["error_inf"] = err;
    recovered = recovered && err < 1e-6;
  }
  if (roundtrip)
    out.verdict = recovered ? "potential_recovered" : "potential_not_recovered";
  else
    out.verdict = report.converged ? "converged" : "not_converged";
  out.csv.emplace_back("trace", inversion_trace_csv(report));
  return out;
}

OpOutput op_probe(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  const auto icfg = inversion_config(cfg);
  const Target target = resolve_target(cfg, rng, resolve_interaction(cfg));
  auto schedule = get_list(cfg.sections, "inversion.schedule");
  if (schedule.empty()) schedule = default_probe_schedule();
  const Vector guess = has_key(cfg.sections, "inversion.guess") ? sized_list(cfg, "inversion.guess")
                                                                : Vector::Zero(cfg.system.sites);
  const auto probe = representability_probe(target.density, icfg, PotentialField(guess),
                                            strictly_descending(schedule, "schedule"));
  OpOutput out;
  out.results["target"] = io::to_json(target.density.values);
  out.results["probe"] = io::to_json(probe);
  out.verdict = probe.verdict;
  std::vector<double> e, a, d;
  for (const auto& s : probe.stages) {
    e.push_back(s.epsilon);
    a.push_back(s.achieved);
    d.push_back(s.drift);
  }
  out.csv.emplace_back("probe", io::columns_csv({"epsilon", "achieved", "drift"}, {e, a, d}));
  return out;
}

OpOutput op_conditioning(const ExperimentConfig& cfg, std::mt19937_64&) {
  auto sizes = get_list(cfg.sections, "family.sites");
  if (sizes.empty()) sizes = {4, 8, 16, 32};
  const int n = get_value<int>(cfg.sections, "family.particles", cfg.system.particles);
  OpOutput out;
  Json members = Json::array();
  std::vector<double> ls, ratios;
  bool increasing = true;
  for (double ld : sizes) {
    const int l = static_cast<int>(ld);
    const LatticeSystem sys(l, cfg.system.topology, n, cfg.system.spacing);
    const auto bundle = solve(HamiltonianSpec(sys, cfg.hopping, PotentialField::zeros(l)));
    const auto dec = decompose(chi_canonical(bundle));
    if (!ratios.empty()) increasing = increasing && dec.condition_ratio > ratios.back();
    ls.push_back(l);
    ratios.push_back(dec.condition_ratio);
    members.push_back({{"sites", l},
                       {"ground_degeneracy", bundle.ground_degeneracy},
                       {"alpha_max", dec.alpha_max()},
                       {"alpha_min", dec.alpha_min()},
                       {"condition_ratio", dec.condition_ratio}});
    out.csv.emplace_back("alphas_L" + std::to_string(l), io::columns_csv({"alpha"}, {to_std(dec.alphas)}));
  }
  out.results["family"] = members;
  out.results["loglog_growth_exponent"] = loglog_slope(ls, ratios);
  out.verdict = increasing ? "condition_ratio_strictly_increasing" : "condition_ratio_not_monotone";
  out.csv.emplace_back("conditioning", io::columns_csv({"sites", "condition_ratio"}, {ls, ratios}));
  return out;
}

OpOutput op_lieb(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  const auto interaction = resolve_interaction(cfg);
  const auto lcfg = lieb_config(cfg);
  const Target target = resolve_target(cfg, rng, interaction);
  const std::string functional = get_string(cfg.sections, "lieb.functional", "lieb");
  if (functional != "lieb" && functional != "kinetic") throw ValidationError("lieb.functional must be lieb or kinetic");
  const std::optional<InteractionSpec> w = functional == "lieb" ? interaction : std::nullopt;
  const auto eval = lieb_functional(target.density, w, lcfg);
  OpOutput out;
  out.results["functional"] = functional;
  out.results["target"] = io::to_json(target.density.values);
  out.results["evaluation"] = io::to_json(eval);
  if (target.generating_potential && (functional == "lieb" || !interaction)) {
    const Vector& v = *target.generating_potential;
    const double e0 = energy_minimum(PotentialField(v), cfg.system, w, cfg.hopping);
    out.results["ground_energy"] = e0;
    out.results["energy_identity_error"] = std::abs(eval.value + weighted_dot(cfg.system, v, target.density.values) - e0);
  }
  out.verdict = eval.converged ? "converged" : "not_converged";
  std::vector<double> k;
  for (std::size_t i = 0; i < eval.objective_trace.size(); ++i) k.push_back(static_cast<double>(i));
  out.csv.emplace_back("objective", io::columns_csv({"evaluation", "objective"}, {k, eval.objective_trace}));
  return out;
}

OpOutput op_xc(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  const auto interaction = resolve_interaction(cfg);
  const Target target = resolve_target(cfg, rng, interaction);
  std::optional<PotentialField> ext;
  if (target.generating_potential) ext = PotentialField(*target.generating_potential);
  const auto d = xc_decomposition(target.density, interaction, lieb_config(cfg), ext);
  OpOutput out;
  out.results["target"] = io::to_json(target.density.values);
  out.results["decomposition"] = io::to_json(d);
  out.results["identity_error"] = std::abs(d.exchange_correlation - (d.lieb - d.kinetic - d.hartree));
  out.results["xc_nonpositive"] = d.exchange_correlation <= 0.0;
  out.verdict = "decomposed";
  return out;
}

OpOutput op_directional(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  const auto interaction = resolve_interaction(cfg);
  const Target target = resolve_target(cfg, rng, interaction);
  DensityField n1;
  if (has_key(cfg.sections, "direction.values")) {
    n1 = DensityField(cfg.system, sized_list(cfg, "direction.values"));
  } else if (has_key(cfg.sections, "direction.potential")) {
    n1 = forward_density(HamiltonianSpec(cfg.system, cfg.hopping, PotentialField(sized_list(cfg, "direction.potential")),
                                         interaction));
  } else {
    n1 = DensityField::uniform(cfg.system);
  }
  auto eps = get_list(cfg.sections, "direction.epsilons");
  if (eps.empty()) eps = {1e-1, 1e-2, 1e-3, 1e-4};
  const std::string functional = get_string(cfg.sections, "lieb.functional", "kinetic");
  const auto kind = functional == "lieb" ? FunctionalKind::lieb : FunctionalKind::kinetic;
  const auto probe = directional_derivative_probe(kind, target.density, n1, eps, interaction, lieb_config(cfg));
  OpOutput out;
  out.results["functional"] = functional;
  out.results["n"] = io::to_json(target.density.values);
  out.results["n1"] = io::to_json(n1.values);
  out.results["probe"] = io::to_json(probe);
  out.verdict = probe.base_converged ? "recorded" : "recorded_base_not_converged";
  std::vector<double> e, qv;
  for (const auto& r : probe.rows) {
    e.push_back(r.epsilon);
    qv.push_back(r.quotient);
  }
  out.csv.emplace_back("quotients", io::columns_csv({"epsilon", "quotient"}, {e, qv}));
  return out;
}

}  // namespace

const std::vector<std::string>& known_operations() {
  static const std::vector<std::string> ops = {"kernel", "cancellation", "remainder", "inversion",
                                               "roundtrip_inversion", "probe", "conditioning",
                                               "lieb", "xc", "directional"};
  return ops;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  // Comments start at ';' or '#' anywhere on a line.
  std::istringstream raw(text);
  std::string stripped, line;
  while (std::getline(raw, line)) stripped += line.substr(0, line.find_first_of(";#")) + "\n";

  pt::ptree tree;
  try {
    std::istringstream is(stripped);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, node] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw ValidationError(origin + ": unknown section [" + section + "]");
    if (!node.data().empty() && node.empty())
      throw ValidationError(origin + ": key '" + section + "' outside of a section");
    for (const auto& [key, value] : node)
      if (!it->second.count(key))
        throw ValidationError(origin + ": unknown key '" + key + "' in [" + section + "]");
  }

  ExperimentConfig cfg;
  cfg.origin = origin;
  cfg.sections = tree;
  cfg.name = get_string(tree, "experiment.name", "");
  if (cfg.name.empty()) throw ValidationError(origin + ": [experiment] name is required");
  for (char c : cfg.name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
      throw ValidationError(origin + ": experiment name may only use [A-Za-z0-9_-]");
  cfg.operation = get_string(tree, "experiment.operation", "");
  const auto& ops = known_operations();
  if (std::find(ops.begin(), ops.end(), cfg.operation) == ops.end())
    throw ValidationError(origin + ": unknown operation '" + cfg.operation + "'");
  cfg.description = get_string(tree, "experiment.description", "");
  cfg.seed = get_value<std::uint64_t>(tree, "experiment.seed", 0);

  if (!has_key(tree, "system.sites") || !has_key(tree, "system.particles"))
    throw ValidationError(origin + ": [system] needs sites and particles");
  cfg.system = LatticeSystem(get_value<int>(tree, "system.sites", 2),
                             topology_from_string(get_string(tree, "system.topology", "ring")),
                             get_value<int>(tree, "system.particles", 1),
                             get_value<double>(tree, "system.spacing", 1.0));
  cfg.hopping = get_value<double>(tree, "system.hopping", 1.0);
  if (cfg.hopping == 0.0) throw ValidationError(origin + ": hopping must be non-zero");
  // Fail early on malformed optional sections.
  std::mt19937_64 probe_rng(0);
  resolve_potential(cfg, probe_rng);
  resolve_interaction(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

HamiltonianSpec hamiltonian_for(const ExperimentConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  return HamiltonianSpec(cfg.system, cfg.hopping, PotentialField(resolve_potential(cfg, rng)),
                         resolve_interaction(cfg));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = seed_override.value_or(cfg.seed);
  std::mt19937_64 rng(seed);
  OpOutput op;
  const std::string& o = cfg.operation;
  if (o == "kernel") op = op_kernel(cfg, rng);
  else if (o == "cancellation") op = op_cancellation(cfg, rng);
  else if (o == "remainder") op = op_remainder(cfg, rng);
  else if (o == "inversion") op = op_inversion(cfg, rng, false);
  else if (o == "roundtrip_inversion") op = op_inversion(cfg, rng, true);
  else if (o == "probe") op = op_probe(cfg, rng);
  else if (o == "conditioning") op = op_conditioning(cfg, rng);
  else if (o == "lieb") op = op_lieb(cfg, rng);
  else if (o == "xc") op = op_xc(cfg, rng);
  else if (o == "directional") op = op_directional(cfg, rng);
  else throw ValidationError("unknown operation '" + o + "'");

  ExperimentResult r;
  r.name = cfg.name;
  r.verdict = op.verdict;
  r.payload["scenario"] = cfg.name;
  r.payload["operation"] = cfg.operation;
  r.payload["config"] = config_echo(cfg, seed);
  r.payload["results"] = std::move(op.results);
  r.payload["verdict"] = op.verdict;
  r.csv_files = std::move(op.csv);
  return r;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir, double wall_seconds) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string& file, const std::string& content) {
    std::ofstream f(out_dir / file, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + (out_dir / file).string() + "'");
    f << content;
  };
  write(result.name + ".json", result.payload.dump(2) + "\n");
  for (const auto& [label, content] : result.csv_files) write(result.name + "." + label + ".csv", content);

  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  Json meta;
  meta["scenario"] = result.name;
  meta["finished_utc"] = stamp;
  meta["wall_seconds"] = wall_seconds;
  write(result.name + ".meta.json", meta.dump(2) + "\n");
}

// --- presets ------------------------------------------------------------------

const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> catalog = {
      {"uniform_ring_L2", {"kernel", "uniform_ring"}, "2-site ring, N=1, v=0", "uniform_ring_L2.cfg"},
      {"uniform_ring_L4", {"kernel", "uniform_ring"}, "4-site ring, N=1, v=0", "uniform_ring_L4.cfg"},
      {"uniform_ring_L8", {"kernel", "uniform_ring"}, "8-site ring, N=1, v=0", "uniform_ring_L8.cfg"},
      {"uniform_ring_L16", {"kernel", "uniform_ring"}, "16-site ring, N=1, v=0", "uniform_ring_L16.cfg"},
      {"uniform_ring_L32", {"kernel", "uniform_ring"}, "32-site ring, N=1, v=0", "uniform_ring_L32.cfg"},
      {"biased_chain_L6", {"kernel", "biased_chain"}, "6-site open chain, N=2, linear bias 0.3", "biased_chain_L6.cfg"},
      {"biased_chain_L10", {"kernel", "biased_chain"}, "10-site open chain, N=3, linear bias 0.15", "biased_chain_L10.cfg"},
      {"interacting_ring_L6", {"kernel", "interacting"}, "6-site ring, N=3, NN repulsion U=1, random potential", "interacting_ring_L6.cfg"},
      {"degenerate_4ring", {"kernel", "degenerate"}, "4-site ring, N=2, two-fold degenerate ground state", "degenerate_4ring.cfg"},
      {"degenerate_6ring", {"kernel", "degenerate"}, "6-site ring, N=2, two-fold degenerate ground state", "degenerate_6ring.cfg"},
      {"cancellation_4ring", {"cancellation", "degenerate"}, "xi term with equal vs (0.7,0.3) weights, 4-ring N=2", "cancellation_4ring.cfg"},
      {"cancellation_6ring", {"cancellation", "degenerate"}, "xi term with equal vs (0.7,0.3) weights, 6-ring N=2", "cancellation_6ring.cfg"},
      {"remainder_2site", {"remainder", "nondegenerate"}, "first-order remainder, biased 2-site ring", "remainder_2site.cfg"},
      {"remainder_degenerate_6ring", {"remainder", "degenerate"}, "first-order remainder, canonical 6-ring N=2", "remainder_degenerate_6ring.cfg"},
      {"remainder_degenerate_4ring", {"remainder", "degenerate"}, "first-order remainder, canonical 4-ring N=2", "remainder_degenerate_4ring.cfg"},
      {"roundtrip_inversion", {"inversion"}, "forward then invert, 4-ring N=1", "roundtrip_inversion.cfg"},
      {"degenerate_inversion", {"inversion", "degenerate"}, "invert the uniform 4-ring N=2 density", "degenerate_inversion.cfg"},
      {"ks_of_interacting", {"inversion", "interacting"}, "KS potential of an interacting 6-ring density", "ks_of_interacting.cfg"},
      {"smooth_probe", {"probe"}, "representability probe on a forward-generated target", "smooth_probe.cfg"},
      {"zero_density_chain", {"probe", "zero_density"}, "representability probe, 4-chain target with an empty site", "zero_density_chain.cfg"},
      {"conditioning_family", {"conditioning"}, "condition ratio of -chi on rings L = 4, 8, 16, 32", "conditioning_family.cfg"},
      {"lieb_roundtrip", {"lieb", "interacting"}, "F_L of an interacting ground density, energy identity", "lieb_roundtrip.cfg"},
      {"xc_uniform_ring", {"xc", "interacting"}, "E_XC of the uniform 5-ring N=2 density, U=1", "xc_uniform_ring.cfg"},
      {"directional_ring", {"directional"}, "T_L difference quotients vs dual potential", "directional_ring.cfg"},
  };
  return catalog;
}

std::vector<PresetInfo> find_presets(const std::string& query) {
  std::vector<PresetInfo> out;
  for (const auto& p : preset_catalog()) {
    const bool tag = std::find(p.tags.begin(), p.tags.end(), query) != p.tags.end();
    if (query.empty() || query == "all" || p.name == query || tag) out.push_back(p);
  }
  return out;
}

std::filesystem::path preset_directory() {
  if (const char* env = std::getenv("LIEBLAB_PRESETS"); env && *env) return env;
  return LIEBLAB_PRESET_DIR;
}

std::filesystem::path resolve_config(const std::string& arg) {
  if (std::filesystem::is_regular_file(arg)) return arg;
  for (const auto& p : preset_catalog())
    if (p.name == arg) return preset_directory() / p.file;
  throw ValidationError("config '" + arg + "' is neither a file nor a preset name");
}

}  // namespace lieblab
