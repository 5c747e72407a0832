#include "dimer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dimer/parallel.hpp"

namespace dimer {

double state_overlap(std::span<const Complex> psi, std::span<const Complex> phi) {
  if (psi.size() != phi.size()) throw InvalidArgument("state dimensions differ");
  Complex s = 0.0;
  for (std::size_t n = 0; n < psi.size(); ++n) s += std::conj(psi[n]) * phi[n];
  return std::min(1.0, std::abs(s));
}

double bhattacharyya_coefficient(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidArgument("distribution lengths differ");
  double b = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (p[n] < 0.0 || q[n] < 0.0) throw InvalidArgument("negative probability");
    b += std::sqrt(p[n] * q[n]);
  }
  return std::clamp(b, 0.0, 1.0);
}

BhattacharyyaDistance bhattacharyya_distance(std::span<const double> p,
                                             std::span<const double> q) {
  const double b = bhattacharyya_coefficient(p, q);
  if (b == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {-std::log(b), false};
}

namespace {

void push_distance(DivergenceSeries& out, double t, const std::vector<double>& a,
                   const std::vector<double>& b) {
  const auto d = bhattacharyya_distance(a, b);
  out.times.push_back(t);
  out.distance.push_back(d.value);
  out.disjoint.push_back(d.disjoint ? 1 : 0);
}

}  // namespace

DivergenceSeries perturbation_experiment(const SystemParams& params, PhasePoint start,
                                         double perturbation,
                                         const std::vector<double>& times,
                                         const PerturbationOptions& options) {
  validate(params);
  if (!std::is_sorted(times.begin(), times.end()) ||
      (!times.empty() && times.front() < 0.0)) {
    throw InvalidArgument("sample times must be sorted and non-negative");
  }
  if (!(1.0 + perturbation > 0.0)) throw InvalidArgument("perturbation must exceed -1");
  const SystemParams perturbed = params.with_interaction((1.0 + perturbation) * params.interaction);
  const std::array<SystemParams, 2> pair{params, perturbed};

  DivergenceSeries out;
  out.method = options.method;
  out.perturbation = perturbation;
  out.start = start;
  if (times.empty()) return out;
  const double t_end = times.back();

  if (options.method == DivergenceMethod::exact) {
    const auto initial = bloch_coherent_state(params.particles, start.z, start.phi);
    std::array<std::vector<std::vector<double>>, 2> dists;
    parallel_for(2, options.threads == 0 ? 0 : std::min(options.threads, 2u),
                 [&](std::size_t k) {
                   EvolveOptions evo;
                   evo.sample_times = times;
                   evo.controls = options.propagator;
                   evo.on_sample = [&](double, std::span<const Complex> psi) {
                     dists[k].push_back(number_distribution(psi).probabilities);
                   };
                   evolve_state(pair[k], initial, t_end, evo);
                 });
    for (std::size_t i = 0; i < times.size(); ++i) {
      push_distance(out, times[i], dists[0][i], dists[1][i]);
    }
    return out;
  }

  out.n_traj = options.n_traj;
  out.seed = options.seed;
  std::array<WignerEnsemble, 2> ens{
      sample_initial_ensemble(params, start.z, start.phi, options.n_traj, options.seed,
                              options.sampling),
      sample_initial_ensemble(perturbed, start.z, start.phi, options.n_traj, options.seed,
                              options.sampling)};
  WignerControls wc = options.wigner;
  wc.threads = options.threads;
  for (double t : times) {
    for (std::size_t k = 0; k < 2; ++k) evolve_ensemble(pair[k], ens[k], t, wc);
    push_distance(out, t, binned_number_distribution(ens[0], 1).probabilities,
                  binned_number_distribution(ens[1], 1).probabilities);
  }
  out.quarantined = ens[0].quarantine_count() + ens[1].quarantine_count();
  return out;
}

double sampling_noise_floor(int particles, double sigma) {
  if (particles < 1) throw InvalidArgument("N must be >= 1");
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  const double n1 = particles + 1.0;
  const double arg = 1.0 - n1 * n1 * sigma * sigma / 8.0;
  if (!(arg > 0.0)) throw InvalidArgument("(N+1)^2 sigma^2 / 8 must be below 1");
  return -std::log(arg);
}

double binning_sigma(std::size_t n_traj, std::size_t n_bins) {
  if (n_traj == 0 || n_bins == 0) throw InvalidArgument("n_traj and n_bins must be >= 1");
  return 1.0 / std::sqrt(static_cast<double>(n_traj) * static_cast<double>(n_bins));
}

}  // namespace dimer
