#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dimer/params.hpp"
#include "dimer/quantum.hpp"
#include "dimer/semiclassical.hpp"
#include "dimer/wigner.hpp"

namespace dimer {

/// |sum_n conj(c_n) d_n| for two normalized states of equal dimension.
double state_overlap(std::span<const Complex> psi, std::span<const Complex> phi);

/// sum_n sqrt(P_n Q_n), clamped to [0, 1].
double bhattacharyya_coefficient(std::span<const double> p, std::span<const double> q);

struct BhattacharyyaDistance {
  double value = 0.0;  // +infinity when the supports are disjoint
  bool disjoint = false;
};

/// -ln B.
BhattacharyyaDistance bhattacharyya_distance(std::span<const double> p,
                                             std::span<const double> q);

enum class DivergenceMethod { exact, binned_tw };

struct DivergenceSeries {
  std::vector<double> times;
  std::vector<double> distance;
  std::vector<char> disjoint;
  DivergenceMethod method = DivergenceMethod::exact;
  double perturbation = 0.0;
  std::size_t n_traj = 0;
  std::uint64_t seed = 0;
  PhasePoint start;
  /// Trajectories quarantined in either ensemble (binned only).
  std::size_t quarantined = 0;
};

struct PerturbationOptions {
  DivergenceMethod method = DivergenceMethod::exact;
  std::size_t n_traj = 100'000;
  std::uint64_t seed = 0;
  InitialSampling sampling = InitialSampling::fixed_number;
  PropagatorControls propagator{};
  WignerControls wigner{};
  unsigned threads = 0;
};

/// Evolves the coherent state at `start` under U and (1 + p) U and records
/// the Bhattacharyya distance between the site-1 number distributions at
/// each time in `times`. Binned runs share one seed between the two
/// ensembles.
DivergenceSeries perturbation_experiment(const SystemParams& params, PhasePoint start,
                                         double perturbation,
                                         const std::vector<double>& times,
                                         const PerturbationOptions& options = {});

/// D_B of two independent uniform-like histograms with bin noise sigma:
/// -ln(1 - (N + 1)^2 sigma^2 / 8).
double sampling_noise_floor(int particles, double sigma);

/// Poissonian bin-count fluctuation in probability units, 1 / sqrt(N_t N_b).
double binning_sigma(std::size_t n_traj, std::size_t n_bins);

}  // namespace dimer
