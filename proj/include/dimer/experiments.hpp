#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dimer/config.hpp"

namespace dimer {

/// Engine failure annotated with the experiment that raised it.
class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunResult {
  std::filesystem::path directory;  // <output_dir>/<kind>-<hash>
  std::vector<std::string> files;   // data files, then meta.json
  double wall_seconds = 0.0;
};

/// Runs one experiment and writes CSV data plus a meta.json sidecar.
/// `threads` = 0 uses the default worker count.
RunResult run_experiment(const ExperimentConfig& config, unsigned threads = 0);

/// Version string baked in at configure time.
std::string_view toolkit_version();

}  // namespace dimer
