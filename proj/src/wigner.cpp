#include "dimer/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dimer/parallel.hpp"

namespace dimer {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform_open(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t key = splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
  const std::uint64_t bits = splitmix64(key + counter * 0xD1B54A32D192ED03ULL);
  // (0, 1]: never zero, so the logarithm below is finite
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t k) {
  const double u1 = uniform_open(seed, stream, 2 * k);
  const double u2 = uniform_open(seed, stream, 2 * k + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * kPi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

std::size_t WignerEnsemble::quarantine_count() const {
  return static_cast<std::size_t>(std::count(quarantined.begin(), quarantined.end(), 1));
}

std::array<Complex, 2> mean_field_amplitudes(int particles, double z0, double phi0) {
  const double half = 0.5 * particles;
  if (particles < 1 || !(std::abs(z0) <= half) || !std::isfinite(phi0)) {
    throw InvalidArgument("initial point needs |z0| <= N/2 and finite phi0");
  }
  return {std::polar(std::sqrt(half - z0), -0.5 * phi0),
          std::polar(std::sqrt(half + z0), 0.5 * phi0)};
}

WignerEnsemble sample_initial_ensemble(const SystemParams& p, double z0, double phi0,
                                       std::size_t n_traj, std::uint64_t seed,
                                       InitialSampling sampling) {
  validate(p);
  if (n_traj < 1) throw InvalidArgument("n_traj must be >= 1");
  const auto alpha = mean_field_amplitudes(p.particles, z0, phi0);
  WignerEnsemble e;
  e.particles = p.particles;
  e.seed = seed;
  e.paths.resize(n_traj);
  e.quarantined.assign(n_traj, 0);
  e.failures.resize(n_traj);
  const double root_n = std::sqrt(static_cast<double>(p.particles));
  const Complex u1 = alpha[0] / root_n;
  const Complex u2 = alpha[1] / root_n;
  // each vacuum quadrature has variance 1/4
  for (std::size_t i = 0; i < n_traj; ++i) {
    const auto g1 = normal_pair(seed, i, 0);
    const auto g2 = normal_pair(seed, i, 1);
    if (sampling == InitialSampling::glauber) {
      e.paths[i].beta1 = alpha[0] + 0.5 * Complex(g1[0], g1[1]);
      e.paths[i].beta2 = alpha[1] + 0.5 * Complex(g2[0], g2[1]);
      continue;
    }
    const double w = std::max(0.0, p.particles + 0.5 + 0.5 * g1[0]);
    const Complex a = std::polar(std::sqrt(w), 2.0 * kPi * uniform_open(seed, i, 4));
    const Complex b = 0.5 * Complex(g2[0], g2[1]);
    e.paths[i].beta1 = u1 * a - std::conj(u2) * b;
    e.paths[i].beta2 = u2 * a + std::conj(u1) * b;
  }
  return e;
}

namespace {

using Amplitudes = std::array<double, 4>;  // Re b1, Im b1, Re b2, Im b2

struct TruncatedWignerRhs {
  const SystemParams& p;
  void operator()(const Amplitudes& s, Amplitudes& d, double t) const {
    const double j = tunnelling_rate(p, t);
    const double u2 = 2.0 * p.interaction;
    const double g1 = u2 * (s[0] * s[0] + s[1] * s[1] - 1.0);
    const double g2 = u2 * (s[2] * s[2] + s[3] * s[3] - 1.0);
    // db1/dt = i J b2 - i g1 b1
    d[0] = -j * s[3] + g1 * s[1];
    d[1] = j * s[2] - g1 * s[0];
    d[2] = -j * s[1] + g2 * s[3];
    d[3] = j * s[0] - g2 * s[2];
  }
};

}  // namespace

void evolve_ensemble(const SystemParams& p, WignerEnsemble& ensemble, double t_end,
                     const WignerControls& controls) {
  validate(p);
  if (ensemble.particles != p.particles) {
    throw InvalidArgument("ensemble particle number does not match N");
  }
  if (t_end < ensemble.t) throw InvalidArgument("t_end precedes ensemble time");
  const double t0 = ensemble.t;
  std::vector<double> drift(ensemble.size(), 0.0);
  parallel_for(ensemble.size(), controls.threads, [&](std::size_t i) {
    if (ensemble.quarantined[i]) return;
    auto& path = ensemble.paths[i];
    Amplitudes s{path.beta1.real(), path.beta1.imag(), path.beta2.real(),
                 path.beta2.imag()};
    const double norm0 = path.norm();
    try {
      AdaptiveIntegrator<Amplitudes> integrator(controls.tolerances);
      double t = t0;
      integrator.advance(TruncatedWignerRhs{p}, s, t, t_end, [](const Amplitudes& x) {
        return std::isfinite(x[0] + x[1] + x[2] + x[3]);
      });
    } catch (const std::exception& e) {
      ensemble.quarantined[i] = 1;
      ensemble.failures[i] = e.what();
      return;
    }
    path.beta1 = Complex(s[0], s[1]);
    path.beta2 = Complex(s[2], s[3]);
    drift[i] = std::abs(path.norm() - norm0) / std::max(norm0, 1.0);
  });
  ensemble.t = t_end;
  for (double d : drift) ensemble.max_norm_drift = std::max(ensemble.max_norm_drift, d);
}

namespace {

struct MomentSums {
  double count = 0.0;
  double w1 = 0.0;  // |b1|^2
  double w2 = 0.0;
  double cr = 0.0;  // b2* b1
  double ci = 0.0;
  double zz = 0.0;  // symbols squared
  double xx = 0.0;
  double yy = 0.0;

  MomentSums& operator+=(const MomentSums& o) {
    count += o.count;
    w1 += o.w1;
    w2 += o.w2;
    cr += o.cr;
    ci += o.ci;
    zz += o.zz;
    xx += o.xx;
    yy += o.yy;
    return *this;
  }
  MomentSums operator-(const MomentSums& o) const {
    MomentSums r = *this;
    r.count -= o.count;
    r.w1 -= o.w1;
    r.w2 -= o.w2;
    r.cr -= o.cr;
    r.ci -= o.ci;
    r.zz -= o.zz;
    r.xx -= o.xx;
    r.yy -= o.yy;
    return r;
  }
};

struct Estimate {
  BlochMoments m;
  double fraction = 0.0;
};

// Symmetric-ordering corrections: n_j = |b_j|^2 - 1/2, J_i^2 = (J_i^W)^2 - 1/8.
Estimate estimate(const MomentSums& s) {
  Estimate e;
  const double inv = 1.0 / s.count;
  const double n_total = (s.w1 + s.w2) * inv - 1.0;
  e.m.particles = n_total;
  e.m.x = s.cr * inv;
  e.m.y = s.ci * inv;
  e.m.z = 0.5 * (s.w2 - s.w1) * inv;
  e.m.var_x = s.xx * inv - 0.125 - e.m.x * e.m.x;
  e.m.var_y = s.yy * inv - 0.125 - e.m.y * e.m.y;
  e.m.var_z = s.zz * inv - 0.125 - e.m.z * e.m.z;
  // largest eigenvalue of the one-particle reduced density matrix
  e.m.spin_length = std::sqrt(e.m.x * e.m.x + e.m.y * e.m.y + e.m.z * e.m.z);
  e.fraction = e.m.lambda_max() / n_total;
  return e;
}

}  // namespace

WignerMoments moment_estimate(const WignerEnsemble& ensemble) {
  const std::size_t live = ensemble.live_count();
  if (live < 2) throw InvalidArgument("moment_estimate needs at least two live trajectories");
  const std::size_t blocks = std::min<std::size_t>(32, live);
  std::vector<MomentSums> block(blocks);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    if (ensemble.quarantined[i]) continue;
    const auto& b = ensemble.paths[i];
    const double w1 = std::norm(b.beta1);
    const double w2 = std::norm(b.beta2);
    const Complex c = std::conj(b.beta2) * b.beta1;
    const double jz = 0.5 * (w2 - w1);
    auto& s = block[seen * blocks / live];
    s.count += 1.0;
    s.w1 += w1;
    s.w2 += w2;
    s.cr += c.real();
    s.ci += c.imag();
    s.zz += jz * jz;
    s.xx += c.real() * c.real();
    s.yy += c.imag() * c.imag();
    ++seen;
  }
  MomentSums total;
  for (const auto& s : block) total += s;

  WignerMoments out;
  const Estimate full = estimate(total);
  out.moments = full.m;
  out.condensate_fraction = full.fraction;
  out.samples = live;
  out.blocks = blocks;

  std::vector<Estimate> leave(blocks);
  for (std::size_t k = 0; k < blocks; ++k) leave[k] = estimate(total - block[k]);
  auto jackknife = [&](auto field) {
    double mean = 0.0;
    for (const auto& e : leave) mean += field(e);
    mean /= blocks;
    double ss = 0.0;
    for (const auto& e : leave) ss += (field(e) - mean) * (field(e) - mean);
    return std::sqrt((blocks - 1.0) / blocks * ss);
  };
  out.se_x = jackknife([](const Estimate& e) { return e.m.x; });
  out.se_y = jackknife([](const Estimate& e) { return e.m.y; });
  out.se_z = jackknife([](const Estimate& e) { return e.m.z; });
  out.se_var_z = jackknife([](const Estimate& e) { return e.m.var_z; });
  out.se_condensate_fraction = jackknife([](const Estimate& e) { return e.fraction; });
  return out;
}

NumberDistribution binned_number_distribution(const WignerEnsemble& ensemble, int site) {
  if (site != 1 && site != 2) throw InvalidArgument("site must be 1 or 2");
  const int big_n = ensemble.particles;
  std::vector<std::size_t> counts(big_n + 1, 0);
  NumberDistribution d;
  d.source = NumberDistribution::Source::binned;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    if (ensemble.quarantined[i]) continue;
    const auto& b = ensemble.paths[i];
    const double w = std::norm(site == 1 ? b.beta1 : b.beta2);
    if (w < big_n + 1.0) {
      ++counts[static_cast<std::size_t>(w)];
      ++d.samples;
    } else {
      ++d.out_of_range;
    }
  }
  d.probabilities.assign(big_n + 1, 0.0);
  if (d.samples > 0) {
    for (int n = 0; n <= big_n; ++n) {
      d.probabilities[n] = static_cast<double>(counts[n]) / d.samples;
    }
  }
  return d;
}

BinnedDensity binned_phase_density(const WignerEnsemble& ensemble, const GridSpec& grid) {
  grid.validate();
  BinnedDensity out;
  out.grid = grid;
  out.particles = ensemble.particles;
  out.counts.assign(grid.size(), 0);
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    if (ensemble.quarantined[i]) continue;
    const auto& b = ensemble.paths[i];
    const double z = 0.5 * (std::norm(b.beta2) - std::norm(b.beta1));
    const double phi = -std::arg(std::conj(b.beta2) * b.beta1);
    const int row = grid.row_of(z / ensemble.particles);
    if (row < 0) {
      ++out.out_of_range;
      continue;
    }
    ++out.counts[grid.index(row, grid.col_of(phi))];
    ++out.samples;
  }
  out.weights.assign(grid.size(), 0.0);
  if (out.samples > 0) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      out.weights[k] = static_cast<double>(out.counts[k]) / out.samples;
    }
  }
  return out;
}

}  // namespace dimer
