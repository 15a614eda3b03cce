#include "lieblab/lattice.hpp"

#include "lieblab/errors.hpp"

#include <cmath>
#include <sstream>

namespace lieblab {

std::string to_string(Topology t) { return t == Topology::ring ? "ring" : "open_chain"; }

Topology topology_from_string(const std::string& s) {
  if (s == "ring") return Topology::ring;
  if (s == "open_chain" || s == "chain") return Topology::open_chain;
  throw ValidationError("unknown topology '" + s + "'");
}

LatticeSystem::LatticeSystem(int sites, Topology topology, int particles, double spacing)
    : sites(sites), topology(topology), spacing(spacing), particles(particles) {
  validate();
}

void LatticeSystem::validate() const {
  if (sites < 2) throw ValidationError("lattice needs at least 2 sites");
  if (particles < 1) throw ValidationError("particle count must be positive");
  if (particles > sites) throw ValidationError("more spinless fermions than sites");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw ValidationError("quadrature weight must be positive and finite");
}

std::vector<std::pair<int, int>> LatticeSystem::bonds() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i + 1 < sites; ++i) out.emplace_back(i, i + 1);
  if (topology == Topology::ring && sites > 2) out.emplace_back(0, sites - 1);
  return out;
}

DensityField::DensityField(LatticeSystem system, Vector values)
    : system(std::move(system)), values(std::move(values)) {
  if (this->values.size() != this->system.sites)
    throw DimensionError("density length does not match lattice");
}

DensityField DensityField::from_occupations(const LatticeSystem& system, const Vector& occ) {
  return DensityField(system, occ / system.spacing);
}

DensityField DensityField::uniform(const LatticeSystem& system) {
  const double occ = static_cast<double>(system.particles) / system.sites;
  return from_occupations(system, Vector::Constant(system.sites, occ));
}

namespace {
void check_length(const LatticeSystem& system, const Vector& f) {
  if (f.size() != system.sites) throw DimensionError("field length does not match lattice");
}
}  // namespace

double integrate(const LatticeSystem& system, const Vector& f) {
  check_length(system, f);
  return system.spacing * f.sum();
}

double weighted_dot(const LatticeSystem& system, const Vector& a, const Vector& b) {
  check_length(system, a);
  check_length(system, b);
  return system.spacing * a.dot(b);
}

double norm_13(const LatticeSystem& system, const Vector& f) {
  check_length(system, f);
  const double l1 = system.spacing * f.cwiseAbs().sum();
  const double l3 = std::cbrt(system.spacing * f.cwiseAbs().array().cube().sum());
  return std::max(l1, l3);
}

double norm_13(const DensityField& n) { return norm_13(n.system, n.values); }

double norm_13(const LatticeSystem& system, const PerturbationField& f) {
  return norm_13(system, f.values);
}

RepresentabilityReport check_representable(const DensityField& n) {
  RepresentabilityReport rep;
  for (int i = 0; i < n.values.size(); ++i) {
    if (!(n.values[i] >= -kNegativeDensityTol)) {
      rep.negative_sites.push_back(i);
      std::ostringstream os;
      os << "negative density " << n.values[i] << " at site " << i;
      rep.messages.push_back(os.str());
    }
  }
  rep.particle_sum = integrate(n.system, n.values);
  rep.particle_count_ok = std::abs(rep.particle_sum - n.system.particles) <= kParticleCountTol;
  if (!rep.particle_count_ok) {
    std::ostringstream os;
    os << "integrated density " << rep.particle_sum << " != N = " << n.system.particles;
    rep.messages.push_back(os.str());
  }
  rep.representable = rep.negative_sites.empty() && rep.particle_count_ok;
  return rep;
}

Vector project_zero_mean(const Vector& v) {
  return (v.array() - v.mean()).matrix();
}

PotentialField project_zero_mean(const LatticeSystem& system, const PotentialField& v) {
  check_length(system, v.values);
  return PotentialField(project_zero_mean(v.values), Gauge::zero_mean);
}

PerturbationField density_direction(const LatticeSystem& system, Vector values) {
  check_length(system, values);
  if (std::abs(integrate(system, values)) > 1e-12)
    throw ValidationError("density-direction perturbation must integrate to zero");
  return PerturbationField{std::move(values), PerturbationKind::density_direction};
}

}  // namespace lieblab
