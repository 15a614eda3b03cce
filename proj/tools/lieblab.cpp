#include "lieblab/errors.hpp"
#include "lieblab/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const lieblab::ValidationError*>(&e) || dynamic_cast<const lieblab::DimensionError*>(&e) ||
      dynamic_cast<const lieblab::CapacityError*>(&e))
    return kExitValidation;
  return kExitNumerical;
}

unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LIEBLAB_THREADS"); env && *env) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

int run_command(const std::vector<std::string>& args, const std::string& tag, const std::string& out_dir,
                std::optional<std::uint64_t> seed, bool quiet) {
  std::vector<std::string> inputs = args;
  if (!tag.empty()) {
    const auto found = lieblab::find_presets(tag);
    if (found.empty()) {
      std::cerr << "error: no presets match '" << tag << "'\n";
      return kExitValidation;
    }
    for (const auto& p : found) inputs.push_back(p.name);
  }
  if (inputs.empty()) {
    std::cerr << "error: run needs at least one config file or preset name\n";
    return kExitValidation;
  }

  // Validate everything before any computation starts.
  std::vector<lieblab::ExperimentConfig> configs;
  for (const auto& arg : inputs) {
    try {
      configs.push_back(lieblab::load_config(lieblab::resolve_config(arg)));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return exit_code_for(e);
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> worst{kExitOk};
  std::mutex io_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      const auto& cfg = configs[i];
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto result = lieblab::run_experiment(cfg, seed);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        lieblab::write_outputs(result, out_dir, secs);
        if (!quiet) {
          std::lock_guard lock(io_mutex);
          std::cout << cfg.name << ": " << result.verdict << " (" << secs << " s)\n";
        }
      } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        int cur = worst.load();
        while (code > cur && !worst.compare_exchange_weak(cur, code)) {
        }
        std::lock_guard lock(io_mutex);
        std::cerr << "error: " << cfg.name << ": " << e.what() << "\n";
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = worker_count(configs.size());
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return worst.load();
}

int list_command(const std::string& query) {
  const auto found = lieblab::find_presets(query);
  for (const auto& p : found) {
    std::cout << p.name << "  [";
    for (std::size_t i = 0; i < p.tags.size(); ++i) std::cout << (i ? "," : "") << p.tags[i];
    std::cout << "]  " << p.description << "\n";
  }
  if (found.empty()) std::cerr << "no presets match '" << query << "'\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice DFT laboratory: response kernels, KS inversion, Lieb functionals"};
  app.require_subcommand(1);

  std::string out_dir = "results";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "override the seed of every experiment");
  app.add_flag("--quiet", quiet, "suppress per-experiment summaries");

  std::vector<std::string> cfgs;
  std::string tag;
  auto* run = app.add_subcommand("run", "run experiments from config files or preset names");
  run->add_option("configs", cfgs, "config files or preset names");
  run->add_option("--presets", tag, "also run every preset matching a name or tag ('all' for the catalog)");
  run->fallthrough();

  std::string query = "all";
  auto* list = app.add_subcommand("list-presets", "print the preset catalog");
  list->add_option("query", query, "preset name, tag, or 'all'");
  list->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (*run) return run_command(cfgs, tag, out_dir, seed, quiet);
  return list_command(query);
}
