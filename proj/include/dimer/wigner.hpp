#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dimer/grid.hpp"
#include "dimer/integrator.hpp"
#include "dimer/params.hpp"
#include "dimer/quantum.hpp"
#include "dimer/state.hpp"

namespace dimer {

/// Counter-based generator: every value is a pure function of
/// (seed, stream, counter), so results do not depend on scheduling.
std::uint64_t splitmix64(std::uint64_t x);
double uniform_open(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);
/// Two independent standard normals from counters 2k and 2k+1 (Box-Muller).
std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t k);

struct Trajectory {
  Complex beta1;
  Complex beta2;
  [[nodiscard]] double norm() const { return std::norm(beta1) + std::norm(beta2); }
};

struct WignerEnsemble {
  int particles = 0;
  std::uint64_t seed = 0;
  double t = 0.0;
  /// Trajectory i was drawn from stream i.
  std::vector<Trajectory> paths;
  /// Nonzero for trajectories removed after an integrator failure.
  std::vector<char> quarantined;
  std::vector<std::string> failures;
  /// Largest relative change of |beta1|^2 + |beta2|^2 seen so far.
  double max_norm_drift = 0.0;

  [[nodiscard]] std::size_t size() const { return paths.size(); }
  [[nodiscard]] std::size_t quarantine_count() const;
  [[nodiscard]] std::size_t live_count() const { return size() - quarantine_count(); }
};

enum class InitialSampling {
  /// |N, 0> approximated by |a|^2 = N + 1/2 + xi/2 with uniform phase, the
  /// empty mode by vacuum noise, then rotated onto (z0, phi0). Reproduces the
  /// fixed-N Bloch state's first and second moments.
  fixed_number,
  /// Product of Glauber states: beta_j = alpha_j + eta_j, <|eta_j|^2> = 1/2.
  /// Total number is Poissonian.
  glauber,
};

/// Mean-field pair alpha_1 = sqrt(N/2 - z0) e^{-i phi0/2},
/// alpha_2 = sqrt(N/2 + z0) e^{i phi0/2}; the sampled cloud is centred on it.
WignerEnsemble sample_initial_ensemble(const SystemParams& p, double z0, double phi0,
                                       std::size_t n_traj, std::uint64_t seed,
                                       InitialSampling sampling = InitialSampling::fixed_number);

/// Mean-field amplitude pair of the coherent state at (z0, phi0).
std::array<Complex, 2> mean_field_amplitudes(int particles, double z0, double phi0);

struct WignerControls {
  Tolerances tolerances{1e-12, 1e-12, 1e-3, 10'000'000};
  unsigned threads = 0;
};

/// Integrates every trajectory from ensemble.t to t_end in place.
void evolve_ensemble(const SystemParams& p, WignerEnsemble& ensemble, double t_end,
                     const WignerControls& controls = {});

/// Symmetric-ordering corrected moments with standard errors.
struct WignerMoments {
  BlochMoments moments;  // particles holds <N>, spin_length |<J>|
  double condensate_fraction = 0.0;
  double se_x = 0.0;
  double se_y = 0.0;
  double se_z = 0.0;
  double se_var_z = 0.0;
  double se_condensate_fraction = 0.0;
  std::size_t samples = 0;
  /// Delete-one-block jackknife over this many contiguous blocks.
  std::size_t blocks = 0;
};

WignerMoments moment_estimate(const WignerEnsemble& ensemble);

/// Histogram of |beta_site|^2 into [n, n+1), n = 0..N. site is 1 or 2.
NumberDistribution binned_number_distribution(const WignerEnsemble& ensemble,
                                              int site = 1);

struct BinnedDensity {
  GridSpec grid;
  int particles = 0;
  std::vector<std::size_t> counts;
  std::vector<double> weights;
  std::size_t samples = 0;
  std::size_t out_of_range = 0;
};

/// Histogram of ((|b2|^2 - |b1|^2)/2, -arg(b2* b1)) on a (z/N, phi) grid.
BinnedDensity binned_phase_density(const WignerEnsemble& ensemble,
                                   const GridSpec& grid = q_grid());

}  // namespace dimer
