#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dimer/fock.hpp"
#include "dimer/grid.hpp"
#include "dimer/params.hpp"
#include "dimer/state.hpp"

namespace dimer {

/// Hermitian banded operator with complex off-diagonals; the upper band is
/// stored and the lower band is its conjugate.
struct HermitianBand {
  std::vector<double> diagonal;
  std::vector<Complex> first;   // K(n, n+1)
  std::vector<Complex> second;  // K(n, n+2), may be empty

  void apply(std::span<const Complex> in, std::span<Complex> out) const;
  /// Gershgorin enclosure of the spectrum.
  [[nodiscard]] std::pair<double, double> spectral_bounds() const;
};

/// Bessel values J_0(x) .. J_m(x) by Miller's backward recurrence.
std::vector<double> bessel_j_sequence(int m, double x);

/// psi <- exp(-i K) psi by Chebyshev expansion; returns the number of terms.
int chebyshev_exp(const HermitianBand& k, std::vector<Complex>& psi,
                  double tolerance = 1e-16);

enum class HamiltonianSource { time_dependent, effective };

struct PropagatorControls {
  /// Largest Magnus step in units of 1/J0.
  double max_step = 0.02;
  double chebyshev_tolerance = 1e-16;
  /// Abort when |psi|^2 drifts further than this from 1.
  double norm_abort = 1e-6;
};

class NormDriftError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unitary propagation of the Schroedinger equation in the Fock basis with
/// a fourth-order Magnus step (two Gauss points) whose exponential is
/// evaluated by Chebyshev expansion. The banded Hamiltonian is applied on
/// the fly.
class QuantumPropagator {
 public:
  QuantumPropagator(const SystemParams& p, HamiltonianSource source,
                    PropagatorControls controls = {});

  /// Advances psi from t to t_target; t is updated.
  void advance(std::vector<Complex>& psi, double& t, double t_target);

  [[nodiscard]] std::size_t steps() const { return steps_; }
  [[nodiscard]] const PropagatorControls& controls() const { return controls_; }

 private:
  void step(std::vector<Complex>& psi, double t, double h);

  SystemParams params_;
  HamiltonianSource source_;
  PropagatorControls controls_;
  std::vector<double> interaction_;
  std::vector<double> hopping_;
  std::vector<double> commutator_;  // [D, T] upper band, real antisymmetric
  std::optional<FockMatrix> effective_;
  HermitianBand work_;
  std::size_t steps_ = 0;
};

/// Time series of pseudospin moments and condensate fraction.
struct ObservableSeries {
  std::vector<double> times;
  std::vector<BlochMoments> moments;
  std::vector<double> condensate_fraction;  // lambda_max / N
};

struct Evolution {
  StateVector state;
  ObservableSeries series;
  double norm_drift = 0.0;
  std::size_t steps = 0;
};

struct EvolveOptions {
  HamiltonianSource source = HamiltonianSource::time_dependent;
  /// Times at which moments are recorded; t = 0 is included if listed.
  std::vector<double> sample_times;
  PropagatorControls controls{};
  /// Called with (t, amplitudes) at every sample time.
  std::function<void(double, std::span<const Complex>)> on_sample;
};

Evolution evolve_state(const SystemParams& p, const StateVector& initial,
                       double t_end, const EvolveOptions& options = {});

/// Number distribution P_n over n = 0..N.
struct NumberDistribution {
  enum class Source { exact, binned };
  std::vector<double> probabilities;
  Source source = Source::exact;
  std::size_t samples = 0;       // trajectories used when binned
  std::size_t out_of_range = 0;  // binned only

  [[nodiscard]] int particles() const {
    return static_cast<int>(probabilities.size()) - 1;
  }
};

NumberDistribution number_distribution(std::span<const Complex> amplitudes);
inline NumberDistribution number_distribution(const StateVector& s) {
  return number_distribution(s.amplitudes());
}

/// lambda_max / N via the spin-length identity.
double condensate_fraction(const BlochMoments& m);
double condensate_fraction(const StateVector& s);

/// lambda_max / N from the eigenvalues of the 2x2 one-particle reduced
/// density matrix built from first moments.
double condensate_fraction_reduced_density(std::span<const Complex> amplitudes);

/// Husimi function on a (z, phi) grid. Values are |<z, phi|psi>|^2, so
/// (N+1)/(4 pi) times the integral over the sphere is 1.
struct QGrid {
  GridSpec grid;
  std::vector<double> values;
  int particles = 0;

  /// (N+1)/(4 pi) * sum Q dOmega with dOmega = (2/N) dz dphi.
  [[nodiscard]] double normalization() const;
  [[nodiscard]] std::size_t argmax() const;
};

QGrid q_function(std::span<const Complex> amplitudes, const GridSpec& grid = q_grid());
inline QGrid q_function(const StateVector& s, const GridSpec& grid = q_grid()) {
  return q_function(s.amplitudes(), grid);
}

struct CondensateMap {
  GridSpec grid;
  std::vector<double> fraction;  // NaN where a node failed
  std::vector<std::optional<std::string>> errors;
};

/// Evolves a coherent state from every grid node to t_end and records
/// lambda_max / N.
CondensateMap condensate_fraction_map(const SystemParams& p, const GridSpec& grid,
                                      double t_end, const PropagatorControls& controls = {},
                                      unsigned threads = 0);

}  // namespace dimer
