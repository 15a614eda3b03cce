#include "lieblab/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace lieblab::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string matrix_csv(const Matrix& m) {
  std::ostringstream os;
  for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << 'c' << j;
  os << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
  return os.str();
}

std::string columns_csv(const std::vector<std::string>& names,
                        const std::vector<std::vector<double>>& columns) {
  std::ostringstream os;
  for (std::size_t j = 0; j < names.size(); ++j) os << (j ? "," : "") << names[j];
  os << '\n';
  std::size_t rows = 0;
  for (const auto& c : columns) rows = std::max(rows, c.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) os << ',';
      if (i < columns[j].size()) os << format_double(columns[j][i]);
    }
    os << '\n';
  }
  return os.str();
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json to_json(const InversionReport& r) {
  Json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["potential"] = to_json(r.potential.values);
  j["residual_trace"] = to_json(r.residual_trace);
  j["step_inf_trace"] = to_json(r.step_inf_trace);
  j["step_l2_trace"] = to_json(r.step_l2_trace);
  j["alpha_min_trace"] = to_json(r.alpha_min_trace);
  j["damping_trace"] = to_json(r.damping_trace);
  j["zero_density_sites"] = r.zero_density_sites;
  j["level_crossings"] = r.level_crossings;
  j["warnings"] = r.warnings;
  return j;
}

Json to_json(const ProbeReport& r) {
  Json stages = Json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"epsilon", s.epsilon},
                      {"achieved", s.achieved},
                      {"drift", s.drift},
                      {"iterations", s.iterations},
                      {"converged", s.converged}});
  Json j;
  j["stages"] = stages;
  j["zero_density_sites"] = r.zero_density_sites;
  j["verdict"] = r.verdict;
  return j;
}

Json to_json(const LiebEvaluation& e) {
  Json j;
  j["value"] = e.value;
  j["optimizer"] = to_json(e.optimizer.values);
  j["dual_gap_estimate"] = e.dual_gap_estimate;
  j["gradient_norm"] = e.gradient_norm;
  j["iterations"] = e.iterations;
  j["converged"] = e.converged;
  j["objective_trace"] = to_json(e.objective_trace);
  return j;
}

Json to_json(const EnergyDecomposition& d) {
  return Json{{"F_L", d.lieb},
              {"T_L", d.kinetic},
              {"E_H", d.hartree},
              {"E_XC", d.exchange_correlation},
              {"external", d.external},
              {"total", d.total()}};
}

Json to_json(const RemainderTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"epsilon", r.epsilon},
                    {"remainder_norm", r.remainder_norm},
                    {"ratio", r.ratio},
                    {"valid", r.valid},
                    {"perturbed_degeneracy", r.perturbed_degeneracy}});
  Json j;
  j["reference_degeneracy"] = t.reference_degeneracy;
  j["rows"] = rows;
  j["loglog_slope"] = t.loglog_slope();
  return j;
}

Json to_json(const SpectralDecomposition& d) {
  Json j;
  j["alphas"] = to_json(d.alphas);
  j["null_eigenvalue"] = d.null_eigenvalue;
  j["condition_ratio"] = d.condition_ratio;
  j["near_singular_modes"] = d.near_singular.size();
  return j;
}

Json to_json(const DirectionalProbe& p) {
  Json rows = Json::array();
  for (const auto& r : p.rows)
    rows.push_back({{"epsilon", r.epsilon}, {"quotient", r.quotient}, {"converged", r.converged}});
  Json j;
  j["base_value"] = p.base_value;
  j["base_converged"] = p.base_converged;
  j["dual_candidate"] = p.dual_candidate;
  j["rows"] = rows;
  return j;
}

}  // namespace lieblab::io
