#include "dimer/state.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace dimer {

double norm_squared(std::span<const Complex> amplitudes) {
  double s = 0.0;
  for (const auto& c : amplitudes) s += std::norm(c);
  return s;
}

StateVector::StateVector(std::vector<Complex> amplitudes, double tolerance)
    : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() < 2) {
    throw InvalidArgument("state vector needs N >= 1");
  }
  const double n2 = dimer::norm_squared(amplitudes_);
  if (!(std::abs(n2 - 1.0) <= tolerance)) {
    throw InvalidArgument("state vector not normalized: |psi|^2 = " +
                          std::to_string(n2));
  }
}

double StateVector::norm_squared() const {
  return dimer::norm_squared(amplitudes_);
}

StateVector fock_state(int particles, int occupation) {
  if (particles < 1 || occupation < 0 || occupation > particles) {
    throw InvalidArgument("Fock occupation out of range");
  }
  std::vector<Complex> c(particles + 1, 0.0);
  c[occupation] = 1.0;
  return StateVector(std::move(c));
}

StateVector twin_fock_state(int particles) {
  if (particles % 2 != 0) {
    throw InvalidArgument("twin-Fock state needs even N");
  }
  return fock_state(particles, particles / 2);
}

CoherentAmplitudes coherent_amplitudes(int particles, double z, double phi) {
  const double half = 0.5 * particles;
  if (particles < 1) throw InvalidArgument("N must be >= 1");
  if (!(std::abs(z) <= half) || !std::isfinite(phi)) {
    throw InvalidArgument("coherent state needs |z| <= N/2 and finite phi");
  }
  // cos^2(theta/2) = n2/N and sin^2(theta/2) = n1/N of the mean-field split
  const double n1_frac = (half - z) / particles;
  const double n2_frac = (half + z) / particles;
  const double log_sin = n1_frac > 0.0 ? 0.5 * std::log(n1_frac)
                                       : -std::numeric_limits<double>::infinity();
  const double log_cos = n2_frac > 0.0 ? 0.5 * std::log(n2_frac)
                                       : -std::numeric_limits<double>::infinity();
  CoherentAmplitudes out;
  out.phase = phi;
  out.log_magnitude.resize(particles + 1);
  const double lg_n = std::lgamma(particles + 1.0);
  for (int n = 0; n <= particles; ++n) {
    const int m = particles - n;
    double lm = 0.5 * (lg_n - std::lgamma(n + 1.0) - std::lgamma(m + 1.0));
    // 0 * log(0) contributes nothing
    if (m > 0) lm += m * log_cos;
    if (n > 0) lm += n * log_sin;
    out.log_magnitude[n] = lm;
  }
  return out;
}

StateVector bloch_coherent_state(int particles, double z, double phi) {
  const auto amps = coherent_amplitudes(particles, z, phi);
  std::vector<Complex> c(particles + 1, 0.0);
  int first = -1;
  for (int n = 0; n <= particles; ++n) {
    const double mag = std::exp(amps.log_magnitude[n]);
    if (mag > 0.0 && first < 0) first = n;
    c[n] = std::polar(mag, -n * phi);
  }
  if (first > 0) {
    const Complex fix = std::polar(1.0, first * phi);
    for (auto& a : c) a *= fix;
  }
  // the log-gamma route loses a few ulps; renormalize once
  const double norm = std::sqrt(norm_squared(c));
  for (auto& a : c) a /= norm;
  return StateVector(std::move(c));
}

double BlochMoments::phase() const { return -std::atan2(y, x); }

double spin_length_from_variances(double particles, double var_sum,
                                  double tolerance) {
  const double radicand = 0.25 * particles * (particles + 2.0) - var_sum;
  if (radicand < -tolerance * std::max(1.0, particles * particles)) {
    throw InvalidArgument("negative spin-length radicand " +
                          std::to_string(radicand) +
                          ": inconsistent moments");
  }
  return std::sqrt(std::max(0.0, radicand));
}

Complex lowering_expectation(std::span<const Complex> c) {
  const int big_n = static_cast<int>(c.size()) - 1;
  Complex a = 0.0;
  for (int n = 1; n <= big_n; ++n) {
    a += std::conj(c[n - 1]) * c[n] *
         std::sqrt(static_cast<double>(n) * (big_n - n + 1));
  }
  return a;
}

BlochMoments bloch_moments(std::span<const Complex> c) {
  const int big_n = static_cast<int>(c.size()) - 1;
  const double norm = norm_squared(c);
  if (!(std::abs(norm - 1.0) <= 1e-6)) {
    throw InvalidArgument("bloch_moments: state norm off by " +
                          std::to_string(norm - 1.0));
  }
  // A = b2+ b1 lowers n by one: A|n> = sqrt(n (N-n+1)) |n-1>
  Complex a1 = lowering_expectation(c);
  Complex a2 = 0.0;
  double a_dag_a = 0.0;
  double a_a_dag = 0.0;
  double jz = 0.0;
  double jz2 = 0.0;
  for (int n = 0; n <= big_n; ++n) {
    const double p = std::norm(c[n]);
    const double m = 0.5 * (big_n - 2.0 * n);
    jz += p * m;
    jz2 += p * m * m;
    a_dag_a += p * n * (big_n - n + 1.0);
    a_a_dag += p * (n + 1.0) * (big_n - n);
    if (n >= 2) {
      a2 += std::conj(c[n - 2]) * c[n] *
            std::sqrt(static_cast<double>(n) * (big_n - n + 1) * (n - 1) *
                      (big_n - n + 2));
    }
  }
  BlochMoments out;
  out.particles = big_n;
  out.x = a1.real();
  out.y = a1.imag();
  out.z = jz;
  const double jx2 = 0.25 * (2.0 * a2.real() + a_a_dag + a_dag_a);
  const double jy2 = 0.25 * (-2.0 * a2.real() + a_a_dag + a_dag_a);
  out.var_x = std::max(0.0, jx2 - out.x * out.x);
  out.var_y = std::max(0.0, jy2 - out.y * out.y);
  out.var_z = std::max(0.0, jz2 - out.z * out.z);
  out.spin_length =
      spin_length_from_variances(big_n, out.var_x + out.var_y + out.var_z);
  return out;
}

}  // namespace dimer
