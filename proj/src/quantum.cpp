#include "dimer/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dimer/parallel.hpp"

namespace dimer {

void HermitianBand::apply(std::span<const Complex> in,
                          std::span<Complex> out) const {
  const std::size_t n = diagonal.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = diagonal[i] * in[i];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    out[i] += first[i] * in[i + 1];
    out[i + 1] += std::conj(first[i]) * in[i];
  }
  if (!second.empty()) {
    for (std::size_t i = 0; i + 2 < n; ++i) {
      out[i] += second[i] * in[i + 2];
      out[i + 2] += std::conj(second[i]) * in[i];
    }
  }
}

std::pair<double, double> HermitianBand::spectral_bounds() const {
  const std::size_t n = diagonal.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i + 1 < n) radius += std::abs(first[i]);
    if (i >= 1) radius += std::abs(first[i - 1]);
    if (!second.empty()) {
      if (i + 2 < n) radius += std::abs(second[i]);
      if (i >= 2) radius += std::abs(second[i - 2]);
    }
    lo = std::min(lo, diagonal[i] - radius);
    hi = std::max(hi, diagonal[i] + radius);
  }
  return {lo, hi};
}

std::vector<double> bessel_j_sequence(int m, double x) {
  std::vector<double> out(m + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  // Miller: recur downward from well above max(m, x), then normalize with
  // J_0 + 2 sum J_2k = 1.
  const int start = std::max(m, static_cast<int>(x)) + 30 +
                    static_cast<int>(8.0 * std::cbrt(std::max(x, 1.0)));
  std::vector<double> j(start + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-300;
  for (int k = start; k >= 1; --k) {
    j[k - 1] = (2.0 * k / x) * j[k] - j[k + 1];
    if (std::abs(j[k - 1]) > 1e250) {
      for (int q = k - 1; q <= start; ++q) j[q] *= 1e-250;
    }
  }
  double norm = j[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0 * j[k];
  for (int k = 0; k <= m; ++k) out[k] = j[k] / norm;
  return out;
}

int chebyshev_exp(const HermitianBand& k, std::vector<Complex>& psi,
                  double tolerance) {
  const auto [lo, hi] = k.spectral_bounds();
  const double centre = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo) * (1.0 + 1e-12) + 1e-300;
  const Complex shift = std::polar(1.0, -centre);
  const std::size_t n = psi.size();

  const int m_max =
      static_cast<int>(half + 10.0 * std::cbrt(std::max(half, 1.0)) + 25.0);
  const auto bessel = bessel_j_sequence(m_max, half);
  int terms = m_max;
  while (terms > 1 && std::abs(bessel[terms]) < tolerance && terms > half) --terms;

  // X = (K - centre) / half has spectrum inside [-1, 1].
  auto apply_x = [&](const std::vector<Complex>& in, std::vector<Complex>& out) {
    k.apply(in, out);
    for (std::size_t i = 0; i < n; ++i) out[i] = (out[i] - centre * in[i]) / half;
  };

  std::vector<Complex> prev = psi;
  std::vector<Complex> cur(n);
  std::vector<Complex> next(n);
  std::vector<Complex> acc(n);
  apply_x(prev, cur);
  const Complex minus_i(0.0, -1.0);
  Complex phase = minus_i;  // (-i)^k
  for (std::size_t i = 0; i < n; ++i) {
    acc[i] = bessel[0] * prev[i] + 2.0 * bessel[1] * phase * cur[i];
  }
  for (int q = 2; q <= terms; ++q) {
    apply_x(cur, next);
    for (std::size_t i = 0; i < n; ++i) next[i] = 2.0 * next[i] - prev[i];
    phase *= minus_i;
    const Complex c = 2.0 * bessel[q] * phase;
    for (std::size_t i = 0; i < n; ++i) acc[i] += c * next[i];
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  for (std::size_t i = 0; i < n; ++i) psi[i] = shift * acc[i];
  return terms + 1;
}

QuantumPropagator::QuantumPropagator(const SystemParams& p,
                                     HamiltonianSource source,
                                     PropagatorControls controls)
    : params_(p), source_(source), controls_(controls) {
  validate(p);
  if (!(controls_.max_step > 0.0)) {
    throw InvalidArgument("max_step must be positive");
  }
  if (source_ == HamiltonianSource::effective) {
    effective_ = effective_hamiltonian_matrix(p);
  }
  interaction_ = interaction_diagonal(p.particles, p.interaction);
  hopping_ = hopping_band(p.particles);
  commutator_.resize(hopping_.size());
  for (std::size_t n = 0; n < hopping_.size(); ++n) {
    commutator_[n] = (interaction_[n] - interaction_[n + 1]) * hopping_[n];
  }
  const std::size_t dim = interaction_.size();
  work_.diagonal.resize(dim);
  work_.first.resize(dim - 1);
  if (effective_ && dim >= 3) work_.second.resize(dim - 2);
}

void QuantumPropagator::step(std::vector<Complex>& psi, double t, double h) {
  if (effective_) {
    const auto& d = effective_->diagonal();
    const auto& f = effective_->first_off_diagonal();
    const auto& s = effective_->second_off_diagonal();
    for (std::size_t i = 0; i < d.size(); ++i) work_.diagonal[i] = h * d[i];
    for (std::size_t i = 0; i < f.size(); ++i) work_.first[i] = h * f[i];
    for (std::size_t i = 0; i < s.size(); ++i) work_.second[i] = h * s[i];
  } else {
    // Omega = -i K with K = h/2 (H1 + H2) - i (sqrt3 h^2 / 12) (J1 - J2) [D, T]
    const double offset = std::sqrt(3.0) / 6.0;
    const double j1 = tunnelling_rate(params_, t + h * (0.5 - offset));
    const double j2 = tunnelling_rate(params_, t + h * (0.5 + offset));
    const double mean = 0.5 * h * (j1 + j2);
    const double twist = std::sqrt(3.0) * h * h / 12.0 * (j1 - j2);
    for (std::size_t i = 0; i < interaction_.size(); ++i) {
      work_.diagonal[i] = h * interaction_[i];
    }
    for (std::size_t i = 0; i < hopping_.size(); ++i) {
      work_.first[i] = Complex(mean * hopping_[i], -twist * commutator_[i]);
    }
  }
  chebyshev_exp(work_, psi, controls_.chebyshev_tolerance);
  ++steps_;
}

void QuantumPropagator::advance(std::vector<Complex>& psi, double& t,
                                double t_target) {
  if (t_target <= t) return;
  const double span = t_target - t;
  const auto n = static_cast<long>(std::ceil(span / controls_.max_step - 1e-9));
  const double h = span / static_cast<double>(std::max(1L, n));
  const double t0 = t;
  for (long k = 0; k < std::max(1L, n); ++k) step(psi, t0 + k * h, h);
  t = t_target;
  const double drift = std::abs(norm_squared(psi) - 1.0);
  if (!(drift <= controls_.norm_abort)) {
    std::ostringstream os;
    os << "norm drift " << drift << " at t = " << t << " with step " << h
       << "; reduce max_step";
    throw NormDriftError(os.str());
  }
}

Evolution evolve_state(const SystemParams& p, const StateVector& initial,
                       double t_end, const EvolveOptions& options) {
  if (initial.particles() != p.particles) {
    throw InvalidArgument("state dimension does not match N");
  }
  if (t_end < 0.0) throw InvalidArgument("t_end must be >= 0");
  auto times = options.sample_times;
  if (!std::is_sorted(times.begin(), times.end()) ||
      (!times.empty() && (times.front() < 0.0 || times.back() > t_end))) {
    throw InvalidArgument("sample times must be sorted within [0, t_end]");
  }

  QuantumPropagator prop(p, options.source, options.controls);
  std::vector<Complex> psi(initial.amplitudes().begin(), initial.amplitudes().end());
  double t = 0.0;
  ObservableSeries series;
  auto record = [&] {
    const auto m = bloch_moments(psi);
    series.times.push_back(t);
    series.moments.push_back(m);
    series.condensate_fraction.push_back(condensate_fraction(m));
    if (options.on_sample) options.on_sample(t, psi);
  };
  for (double target : times) {
    prop.advance(psi, t, target);
    record();
  }
  prop.advance(psi, t, t_end);
  const double drift = norm_squared(psi) - 1.0;
  return Evolution{StateVector(std::move(psi), options.controls.norm_abort),
                   std::move(series), drift, prop.steps()};
}

NumberDistribution number_distribution(std::span<const Complex> amplitudes) {
  NumberDistribution d;
  d.probabilities.reserve(amplitudes.size());
  for (const auto& c : amplitudes) d.probabilities.push_back(std::norm(c));
  return d;
}

double condensate_fraction(const BlochMoments& m) {
  return m.lambda_max() / m.particles;
}

double condensate_fraction(const StateVector& s) {
  return condensate_fraction(bloch_moments(s));
}

double condensate_fraction_reduced_density(std::span<const Complex> c) {
  const int big_n = static_cast<int>(c.size()) - 1;
  double n1 = 0.0;
  for (int n = 0; n <= big_n; ++n) n1 += n * std::norm(c[n]);
  const double n2 = big_n - n1;
  const Complex coherence = lowering_expectation(c);  // <b2+ b1>
  const double lambda =
      0.5 * (n1 + n2) + std::sqrt(0.25 * (n1 - n2) * (n1 - n2) + std::norm(coherence));
  return lambda / big_n;
}

double QGrid::normalization() const {
  double s = 0.0;
  for (double v : values) s += v;
  return (particles + 1.0) / (4.0 * kPi) * s * 2.0 * grid.dz() * grid.dphi();
}

std::size_t QGrid::argmax() const {
  return static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
}

QGrid q_function(std::span<const Complex> amplitudes, const GridSpec& grid) {
  grid.validate();
  const int big_n = static_cast<int>(amplitudes.size()) - 1;
  QGrid q;
  q.grid = grid;
  q.particles = big_n;
  q.values.assign(grid.size(), 0.0);
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<Complex> w(big_n + 1);
  for (int i = 0; i < grid.nz; ++i) {
    const double z = std::clamp(grid.z_fraction(i), -0.5, 0.5) * big_n;
    const auto amps = coherent_amplitudes(big_n, z, 0.0);
    double scale = 0.0;
    for (int n = 0; n <= big_n; ++n) {
      w[n] = std::exp(amps.log_magnitude[n]) * amplitudes[n];
      scale += std::abs(w[n]);
    }
    // Horner rounding bound; anything below it is numerically zero
    const double floor = std::pow(2.0 * (big_n + 1) * eps * scale, 2);
    for (int j = 0; j < grid.nphi; ++j) {
      // <z, phi|psi> = sum_n m_n e^{+i n phi} c_n
      const Complex e = std::polar(1.0, grid.phi(j));
      Complex s = w[big_n];
      for (int n = big_n - 1; n >= 0; --n) s = s * e + w[n];
      const double value = std::norm(s);
      q.values[grid.index(i, j)] = (value < floor || value < 1e-300) ? 0.0 : value;
    }
  }
  return q;
}

CondensateMap condensate_fraction_map(const SystemParams& p, const GridSpec& grid,
                                      double t_end, const PropagatorControls& controls,
                                      unsigned threads) {
  validate(p);
  grid.validate();
  CondensateMap map;
  map.grid = grid;
  map.fraction.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  map.errors.resize(grid.size());
  EvolveOptions options;
  options.controls = controls;
  parallel_for(grid.size(), threads, [&](std::size_t k) {
    try {
      const double z = grid.z_fraction(grid.row(k)) * p.particles;
      const auto start = bloch_coherent_state(p.particles, z, grid.phi(grid.col(k)));
      const auto evo = evolve_state(p, start, t_end, options);
      map.fraction[k] = condensate_fraction(evo.state);
    } catch (const std::exception& e) {
      map.errors[k] = e.what();
    }
  });
  return map;
}

}  // namespace dimer
