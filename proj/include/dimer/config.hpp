#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dimer/grid.hpp"
#include "dimer/metrics.hpp"
#include "dimer/params.hpp"
#include "dimer/semiclassical.hpp"
#include "dimer/wigner.hpp"

namespace dimer {

enum class ExperimentKind {
  poincare,
  lyapunov_map,
  chaos_fraction_scan,
  evolve,
  qfunc,
  condensate_map,
  tw_evolve,
  number_dist,
  bhattacharyya,
  effective_compare,
};

std::string_view kind_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);
const std::vector<ExperimentKind>& all_kinds();

struct ConfigIssue {
  int line = 0;  // 0 when the problem is not tied to a line
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  [[nodiscard]] const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// A representative state by role, or an explicit (z/N, phi) point.
struct StateSpec {
  enum class Role { chaotic, regular_1, regular_2, explicit_point };
  Role role = Role::chaotic;
  double z_fraction = 0.0;
  double phi = 0.0;
  [[nodiscard]] std::string label() const;
};

enum class TimeUnit { periods, absolute };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::evolve;
  SystemParams system;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  // [time]
  double t_end = 20.0;
  TimeUnit time_unit = TimeUnit::periods;
  int samples = 81;  // equally spaced, both ends included

  GridSpec grid;
  std::vector<StateSpec> states;
  LocatorOptions locator;

  // [semiclassical]
  int periods = 20;
  Dynamics dynamics = Dynamics::time_dependent;
  int seed_rows = 12;
  int seed_cols = 12;
  double initial_offset = 1e-4;
  double relative_tolerance = 1e-10;
  double absolute_tolerance = 1e-12;

  // [scan]
  std::vector<double> scan_amplitudes;
  std::vector<double> scan_frequencies;
  int scan_samples = 1600;

  // [quantum]
  double max_step = 0.02;

  // [wigner]
  std::size_t n_traj = 10'000;
  InitialSampling sampling = InitialSampling::fixed_number;
  int site = 1;

  // [bhattacharyya]
  std::vector<double> perturbations;
  DivergenceMethod method = DivergenceMethod::exact;

  /// Absolute end time in 1/J0.
  [[nodiscard]] double t_end_absolute() const;
  [[nodiscard]] std::vector<double> sample_times() const;
  /// Canonical key = value text; parsing it reproduces this config.
  [[nodiscard]] std::string canonical() const;
  /// Stable 64-bit FNV-1a hash of canonical(), as 16 hex digits.
  [[nodiscard]] std::string hash() const;
};

/// Parses the INI-style format and validates every value. All problems are
/// collected and thrown together as ConfigError.
ExperimentConfig parse_config(std::string_view text);

/// Reads a file and parses it; `kind` overrides or must match the file.
ExperimentConfig load_config(const std::string& path,
                             std::optional<ExperimentKind> kind = std::nullopt);

}  // namespace dimer
