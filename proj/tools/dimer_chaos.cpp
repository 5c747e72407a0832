#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dimer/config.hpp"
#include "dimer/experiments.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::optional<unsigned> env_threads() {
  const char* raw = std::getenv("DIMER_CHAOS_THREADS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long v = std::strtoul(raw, &end, 10);
  if (*end != '\0' || v == 0 || v > 4096) {
    throw dimer::ConfigError({{0, std::string("DIMER_CHAOS_THREADS must be a positive integer (got '") +
                                      raw + "')"}});
  }
  return static_cast<unsigned>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation toolkit for the periodically driven two-site Bose-Hubbard model"};
  app.set_version_flag("--version", std::string(dimer::toolkit_version()));

  std::string experiment;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  std::string kinds;
  for (auto k : dimer::all_kinds()) kinds += std::string(kinds.empty() ? "" : ", ") + std::string(dimer::kind_name(k));
  app.add_option("experiment", experiment, "One of: " + kinds)->required();
  app.add_option("--config", config_path, "Configuration file")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  app.add_option("--seed", seed, "Random seed (overrides seed)");
  app.add_option("--threads", threads, "Worker threads (overrides DIMER_CHAOS_THREADS)")
      ->check(CLI::Range(1u, 4096u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  dimer::ExperimentConfig config;
  unsigned workers = 0;
  try {
    const auto kind = dimer::parse_kind(experiment);
    if (!kind) throw dimer::ConfigError({{0, "unknown experiment '" + experiment + "'; expected one of: " + kinds}});
    config = dimer::load_config(config_path, kind);
    if (out_dir) config.output_dir = *out_dir;
    if (seed) config.seed = *seed;
    if (threads) {
      workers = *threads;
    } else if (const auto env = env_threads()) {
      workers = *env;
    }
  } catch (const dimer::ConfigError& e) {
    std::cerr << "dimer-chaos: configuration error in " << config_path << "\n" << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "dimer-chaos: configuration error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    const auto result = dimer::run_experiment(config, workers);
    std::cout << result.directory.string() << "\n";
    for (const auto& f : result.files) std::cout << "  " << f << "\n";
    std::fprintf(stderr, "done in %.1f s\n", result.wall_seconds);
  } catch (const std::exception& e) {
    std::cerr << "dimer-chaos: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
