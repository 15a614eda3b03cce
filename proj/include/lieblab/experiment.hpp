#pragma once

#include "lieblab/io.hpp"
#include "lieblab/lattice.hpp"
#include "lieblab/operators.hpp"

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lieblab {

/// One experiment, read from a sectioned key-value file:
///
///   [experiment]  name, operation, seed, description
///   [system]      sites, topology, particles, spacing, hopping
///   [potential]   values | bias | random_amplitude
///   [interaction] kind (none|nearest_neighbor|dense_pairwise), strength, matrix
///   [perturbation], [target], [direction], [inversion], [lieb], [family]
///
/// Operation-specific sections are kept in `sections` and read lazily.
struct ExperimentConfig {
  std::string name;
  std::string operation;
  std::string description;
  std::uint64_t seed = 0;
  LatticeSystem system;
  double hopping = 1.0;
  boost::property_tree::ptree sections;
  std::string origin;
};

/// Operations understood by run_experiment.
const std::vector<std::string>& known_operations();

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentResult {
  std::string name;
  std::string verdict;
  /// Deterministic payload: config echo, results, verdict.
  io::Json payload;
  /// (label, contents) pairs written as <name>.<label>.csv
  std::vector<std::pair<std::string, std::string>> csv_files;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                std::optional<std::uint64_t> seed_override = std::nullopt);

/// Writes <name>.json, <name>.meta.json (timestamps) and CSV side files.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir,
                   double wall_seconds);

/// Helpers shared with the acceptance suite.
HamiltonianSpec hamiltonian_for(const ExperimentConfig& cfg);

struct PresetInfo {
  std::string name;
  std::vector<std::string> tags;
  std::string description;
  std::string file;  // relative to the preset directory
};

const std::vector<PresetInfo>& preset_catalog();
/// Matches by exact name, by tag, or everything for "all" / empty query.
std::vector<PresetInfo> find_presets(const std::string& query);
/// LIEBLAB_PRESETS, else the directory baked in at build time.
std::filesystem::path preset_directory();
/// Path for a config argument: an existing file, or a catalog name.
std::filesystem::path resolve_config(const std::string& arg);

}  // namespace lieblab
