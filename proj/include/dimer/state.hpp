#pragma once

#include <complex>
#include <span>
#include <vector>

#include "dimer/fock.hpp"
#include "dimer/params.hpp"

namespace dimer {

/// Amplitudes c_n over the Fock basis n = 0..N (n = site-1 occupation).
class StateVector {
 public:
  StateVector() = default;
  /// Takes ownership of amplitudes; throws if the norm deviates from 1 by
  /// more than `tolerance`.
  explicit StateVector(std::vector<Complex> amplitudes,
                       double tolerance = 1e-10);

  [[nodiscard]] int particles() const {
    return static_cast<int>(amplitudes_.size()) - 1;
  }
  [[nodiscard]] std::span<const Complex> amplitudes() const {
    return amplitudes_;
  }
  [[nodiscard]] const Complex& operator[](int n) const {
    return amplitudes_[n];
  }
  [[nodiscard]] double norm_squared() const;

 private:
  std::vector<Complex> amplitudes_;
};

double norm_squared(std::span<const Complex> amplitudes);

/// |N - n, n> style number state with all weight on site-1 occupation n.
StateVector fock_state(int particles, int occupation);

/// Equal split |N/2, N/2>; requires even N.
StateVector twin_fock_state(int particles);

/// Unnormalized log-magnitudes and the phase slope of the SU(2) coherent
/// state amplitudes; shared by state construction and Q-function evaluation.
struct CoherentAmplitudes {
  std::vector<double> log_magnitude;  // -inf for exact zeros
  double phase = 0.0;                 // c_n carries exp(-i n phase)
};
CoherentAmplitudes coherent_amplitudes(int particles, double z, double phi);

/// Bloch coherent state centred at population difference z and relative
/// phase phi: c_n = sqrt(C(N,n)) cos^{N-n}(theta/2) sin^n(theta/2) e^{-i n phi}
/// with z = (N/2) cos(theta). Global phase fixed so that the lowest nonzero
/// amplitude is real and positive.
StateVector bloch_coherent_state(int particles, double z, double phi);

/// First and second moments of the pseudospin.
struct BlochMoments {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  double var_z = 0.0;
  double spin_length = 0.0;
  double particles = 0.0;  // <N>; exact N for state vectors

  /// Relative phase -arg(x + i y).
  [[nodiscard]] double phase() const;
  /// Largest eigenvalue of the one-particle reduced density matrix.
  [[nodiscard]] double lambda_max() const {
    return 0.5 * particles + spin_length;
  }
};

/// Second-moment identity sqrt(N(N+2)/4 - sum of variances). Throws if the
/// radicand is below -tolerance.
double spin_length_from_variances(double particles, double var_sum,
                                  double tolerance = 1e-9);

/// Expectations and variances of Jx, Jy, Jz. Throws if the state norm is off
/// by more than 1e-6.
BlochMoments bloch_moments(std::span<const Complex> amplitudes);
inline BlochMoments bloch_moments(const StateVector& s) {
  return bloch_moments(s.amplitudes());
}

/// <b2+ b1> = x + i y.
Complex lowering_expectation(std::span<const Complex> amplitudes);

}  // namespace dimer
