#include "dimer/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dimer/fock.hpp"
#include "dimer/parallel.hpp"

namespace dimer {
namespace {

using Flow = std::array<double, 2>;
using Bloch = std::array<double, 3>;  // (x, y, z)

double pole_limit(int particles) { return 0.5 * particles * (1.0 - kPoleMargin); }

double radius_squared(int particles, double z) {
  return 0.25 * static_cast<double>(particles) * particles - z * z;
}

Flow time_dependent_flow(const SystemParams& p, PhasePoint q, double t) {
  const double r = std::sqrt(radius_squared(p.particles, q.z));
  const double j = tunnelling_rate(p, t);
  return {2.0 * j * r * std::sin(q.phi),
          -2.0 * q.z * (j * std::cos(q.phi) / r + 2.0 * p.interaction)};
}

Flow effective_flow(const SystemParams& p, double bessel, PhasePoint q) {
  const double r2 = radius_squared(p.particles, q.z);
  const double r = std::sqrt(r2);
  const double s = std::sin(q.phi);
  const double c = std::cos(q.phi);
  const double u = p.interaction;
  const double j0 = p.tunnelling;
  return {2.0 * u * (1.0 - bessel) * r2 * s * c + 2.0 * j0 * r * s,
          -(2.0 * u * (1.0 + bessel) * q.z -
            2.0 * u * (1.0 - bessel) * q.z * s * s + 2.0 * j0 * q.z * c / r)};
}

// The (z, phi) chart is singular at the poles, which many orbits pass close
// to. Trajectories are therefore integrated as a Bloch vector, dJ/dt =
// grad H x J, with H the mean-field energy in (x, y, z).
Bloch cross(const Bloch& a, const Bloch& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

Bloch to_bloch(int particles, PhasePoint q) {
  const double r = std::sqrt(std::max(radius_squared(particles, q.z), 0.0));
  return {r * std::cos(q.phi), -r * std::sin(q.phi), q.z};
}

PhasePoint from_bloch(const Bloch& v) {
  return {v[2], wrap_phase(-std::atan2(v[1], v[0]))};
}

void check_pole(const SystemParams& p, PhasePoint point) {
  if (!(std::abs(point.z) < pole_limit(p.particles))) {
    throw PoleContact("phase point within the pole margin: z = " +
                      std::to_string(point.z));
  }
}

}  // namespace

std::array<double, 2> mean_field_rhs(const SystemParams& p, PhasePoint point,
                                     double t) {
  check_pole(p, point);
  return time_dependent_flow(p, {point.z, point.phi}, t);
}

std::array<double, 2> effective_mean_field_rhs(const SystemParams& p,
                                               PhasePoint point) {
  check_pole(p, point);
  return effective_flow(p, effective_bessel_factor(p), {point.z, point.phi});
}

double mean_field_energy(const SystemParams& p, PhasePoint point) {
  const double r = std::sqrt(std::max(radius_squared(p.particles, point.z), 0.0));
  return 2.0 * p.interaction * point.z * point.z -
         2.0 * p.tunnelling * r * std::cos(point.phi);
}

double effective_mean_field_energy(const SystemParams& p, PhasePoint point) {
  const double b = effective_bessel_factor(p);
  const double r2 = std::max(radius_squared(p.particles, point.z), 0.0);
  const double s = std::sin(point.phi);
  return p.interaction * (1.0 + b) * point.z * point.z +
         p.interaction * (1.0 - b) * r2 * s * s -
         2.0 * p.tunnelling * std::sqrt(r2) * std::cos(point.phi);
}

ClassicalTrajectory integrate_trajectory(const SystemParams& p,
                                         PhasePoint start, double t_end,
                                         const TrajectoryControls& controls) {
  validate(p);
  if (!(t_end > 0.0)) throw InvalidArgument("t_end must be positive");
  check_pole(p, start);

  std::vector<double> times = controls.sample_times;
  if (times.empty()) times.push_back(t_end);
  if (!std::is_sorted(times.begin(), times.end()) || times.front() < 0.0 ||
      times.back() > t_end) {
    throw InvalidArgument("sample times must be sorted within [0, t_end]");
  }

  ClassicalTrajectory out;
  out.tolerances = controls.tolerances;
  out.samples.push_back({0.0, {start.z, wrap_phase(start.phi)}});

  const double bessel = controls.dynamics == Dynamics::effective
                            ? effective_bessel_factor(p)
                            : 1.0;
  const double u = p.interaction;
  auto system = [&](const Bloch& v, Bloch& dvdt, double t) {
    Bloch grad;
    if (controls.dynamics == Dynamics::effective) {
      grad = {-2.0 * p.tunnelling, 2.0 * u * (1.0 - bessel) * v[1],
              2.0 * u * (1.0 + bessel) * v[2]};
    } else {
      grad = {-2.0 * tunnelling_rate(p, t), 0.0, 2.0 * 2.0 * u * v[2]};
    }
    dvdt = cross(grad, v);
  };
  auto valid = [](const Bloch& v) {
    return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
  };

  AdaptiveIntegrator<Bloch> integrator(controls.tolerances);
  Bloch v = to_bloch(p.particles, start);
  double t = 0.0;
  try {
    for (double target : times) {
      if (target == 0.0) continue;
      integrator.advance(system, v, t, target, valid);
      out.samples.push_back({t, from_bloch(v)});
    }
  } catch (const IntegrationError& e) {
    out.error = std::string(e.what());
    out.failure_time = e.time();
  }
  out.steps = integrator.steps();
  return out;
}

PoincareSection poincare_section(const SystemParams& p,
                                 std::span<const PhasePoint> seeds, int periods,
                                 const SectionControls& controls) {
  validate(p);
  if (periods < 0) throw InvalidArgument("periods must be >= 0");
  double period = 0.0;
  if (controls.strobe_period) {
    period = *controls.strobe_period;
  } else if (p.driven()) {
    period = *p.period();
  } else {
    throw InvalidArgument("undriven section needs an explicit strobe period");
  }
  if (!(period > 0.0)) throw InvalidArgument("strobe period must be positive");

  PoincareSection section;
  section.seeds.assign(seeds.begin(), seeds.end());
  section.strobe_period = period;
  section.points.resize(seeds.size());
  section.errors.resize(seeds.size());

  TrajectoryControls tc;
  tc.tolerances = controls.tolerances;
  tc.dynamics = controls.dynamics;
  for (int k = 1; k <= periods; ++k) tc.sample_times.push_back(k * period);

  parallel_for(seeds.size(), controls.threads, [&](std::size_t s) {
    if (periods == 0) {
      section.points[s] = {{seeds[s].z, wrap_phase(seeds[s].phi)}};
      return;
    }
    try {
      const auto traj =
          integrate_trajectory(p, seeds[s], periods * period, tc);
      auto& pts = section.points[s];
      pts.reserve(traj.samples.size());
      for (const auto& sample : traj.samples) pts.push_back(sample.point);
      section.errors[s] = traj.error;
    } catch (const std::exception& e) {
      section.points[s] = {};
      section.errors[s] = e.what();
    }
  });
  return section;
}

double phase_distance(int particles, PhasePoint a, PhasePoint b) {
  const double dz = (a.z - b.z) / particles;
  const double dphi = wrap_phase(a.phi - b.phi);
  return std::hypot(dz, dphi);
}

double phase_space_diameter() { return std::hypot(1.0, kPi); }

LyapunovResult pair_lyapunov(const SystemParams& p, PhasePoint first,
                             PhasePoint second,
                             const LyapunovControls& controls) {
  validate(p);
  if (controls.periods < 1) throw InvalidArgument("need at least one period");
  const double period = controls.strobe_period.value_or(p.strobe_period());
  const double d0 = phase_distance(p.particles, first, second);
  if (!(d0 > 0.0)) throw InvalidArgument("pair members must differ");

  TrajectoryControls tc;
  tc.tolerances = controls.tolerances;
  tc.dynamics = controls.dynamics;
  for (int k = 1; k <= controls.periods; ++k) tc.sample_times.push_back(k * period);
  const double t_end = controls.periods * period;

  const auto a = integrate_trajectory(p, first, t_end, tc);
  if (!a.ok()) throw LyapunovError("reference trajectory failed: " + *a.error);
  const auto b = integrate_trajectory(p, second, t_end, tc);
  if (!b.ok()) throw LyapunovError("perturbed trajectory failed: " + *b.error);

  LyapunovResult res;
  const double limit = controls.saturation_fraction * phase_space_diameter();
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    const double d = phase_distance(p.particles, a.samples[k].point,
                                    b.samples[k].point);
    if (d > limit) {
      res.saturated = true;
      // keep one saturated point if the window would otherwise be too short
      if (res.times.size() < 2) {
        res.times.push_back(a.samples[k].t);
        res.log_divergence.push_back(std::log(d / d0));
      }
      break;
    }
    res.times.push_back(a.samples[k].t);
    res.log_divergence.push_back(d > 0.0 ? std::log(d / d0)
                                         : std::log(std::numeric_limits<double>::min() / d0));
  }

  const auto n = static_cast<double>(res.times.size());
  const double mt = std::accumulate(res.times.begin(), res.times.end(), 0.0) / n;
  const double my =
      std::accumulate(res.log_divergence.begin(), res.log_divergence.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    sxx += (res.times[i] - mt) * (res.times[i] - mt);
    sxy += (res.times[i] - mt) * (res.log_divergence[i] - my);
  }
  res.lambda = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    const double fit = my + res.lambda * (res.times[i] - mt);
    ss += (res.log_divergence[i] - fit) * (res.log_divergence[i] - fit);
  }
  res.residual = std::sqrt(ss / n);
  res.fit_points = static_cast<int>(res.times.size());
  return res;
}

LyapunovResult finite_time_lyapunov(const SystemParams& p, PhasePoint point,
                                    const LyapunovControls& controls) {
  if (!(controls.initial_offset > 0.0)) {
    throw InvalidArgument("initial offset must be positive");
  }
  PhasePoint partner{point.z + controls.initial_offset, point.phi};
  return pair_lyapunov(p, point, partner, controls);
}

PhasePoint LyapunovMap::node(int particles, std::size_t k) const {
  return {grid.z_fraction(grid.row(k)) * particles, grid.phi(grid.col(k))};
}

std::size_t LyapunovMap::failed() const {
  return static_cast<std::size_t>(
      std::count_if(errors.begin(), errors.end(),
                    [](const auto& e) { return e.has_value(); }));
}

double LyapunovMap::max_lambda() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double l : lambda) {
    if (std::isfinite(l)) m = std::max(m, l);
  }
  return m;
}

LyapunovMap lyapunov_map(const SystemParams& p, const GridSpec& grid,
                         const LyapunovControls& controls, unsigned threads) {
  validate(p);
  grid.validate(0.5 * (1.0 - kPoleMargin));
  LyapunovMap map;
  map.grid = grid;
  const std::size_t n = grid.size();
  map.lambda.assign(n, std::numeric_limits<double>::quiet_NaN());
  map.residual.assign(n, std::numeric_limits<double>::quiet_NaN());
  map.saturated.assign(n, 0);
  map.errors.resize(n);
  parallel_for(n, threads, [&](std::size_t k) {
    try {
      const auto r = finite_time_lyapunov(p, map.node(p.particles, k), controls);
      map.lambda[k] = r.lambda;
      map.residual[k] = r.residual;
      map.saturated[k] = r.saturated ? 1 : 0;
    } catch (const std::exception& e) {
      map.errors[k] = e.what();
    }
  });
  return map;
}

ChaoticFraction chaotic_fraction(const LyapunovMap& driven,
                                 const LyapunovMap& unmodulated) {
  ChaoticFraction out;
  out.threshold = unmodulated.max_lambda();
  for (std::size_t k = 0; k < driven.lambda.size(); ++k) {
    if (!std::isfinite(driven.lambda[k])) {
      ++out.failed;
      continue;
    }
    ++out.classified;
    if (driven.lambda[k] > out.threshold) ++out.chaotic;
  }
  out.fraction = out.classified == 0
                     ? 0.0
                     : static_cast<double>(out.chaotic) / out.classified;
  return out;
}

ChaoticFraction chaotic_fraction(const SystemParams& p, const GridSpec& grid,
                                 const LyapunovControls& controls,
                                 unsigned threads) {
  LyapunovControls c = controls;
  if (!c.strobe_period) c.strobe_period = p.strobe_period();
  const auto undriven = p.with_drive(0.0, p.drive_frequency);
  const auto base = lyapunov_map(undriven, grid, c, threads);
  if (!p.driven()) return chaotic_fraction(base, base);
  return chaotic_fraction(lyapunov_map(p, grid, c, threads), base);
}

GridSpec sample_grid(int n_samples) {
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  int nz = static_cast<int>(std::sqrt(static_cast<double>(n_samples)));
  while (n_samples % nz != 0) --nz;
  GridSpec g;
  g.nz = nz;
  g.nphi = n_samples / nz;
  return g;
}

ChaoticFraction chaotic_fraction(const SystemParams& p, int n_samples,
                                 unsigned threads) {
  return chaotic_fraction(p, sample_grid(n_samples), LyapunovControls{}, threads);
}

std::vector<char> chaotic_component(const LyapunovMap& map, double threshold,
                                    std::size_t seed_node) {
  const auto& g = map.grid;
  std::vector<char> in(g.size(), 0);
  auto chaotic = [&](std::size_t k) {
    return std::isfinite(map.lambda[k]) && map.lambda[k] > threshold;
  };
  if (seed_node >= g.size() || !chaotic(seed_node)) return in;
  std::vector<std::size_t> stack{seed_node};
  in[seed_node] = 1;
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    const int i = g.row(k);
    const int j = g.col(k);
    const int di[] = {1, -1, 0, 0};
    const int dj[] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      const int ni = i + di[d];
      if (ni < 0 || ni >= g.nz) continue;
      const int nj = (j + dj[d] + g.nphi) % g.nphi;
      const std::size_t nk = g.index(ni, nj);
      if (!in[nk] && chaotic(nk)) {
        in[nk] = 1;
        stack.push_back(nk);
      }
    }
  }
  return in;
}

RepresentativeStates locate_representative_states(
    const SystemParams& p, const LyapunovMap& driven, double threshold,
    const LocatorOptions& options) {
  const auto& g = driven.grid;
  const double centre_phi = bifurcation_point().phi;
  const double n = p.particles;

  std::size_t chaotic_node = g.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const PhasePoint q = driven.node(p.particles, k);
    if (std::abs(q.z / n) > options.chaotic_z_window) continue;
    if (std::abs(wrap_phase(q.phi - centre_phi)) > options.chaotic_phi_window) continue;
    if (std::isfinite(driven.lambda[k]) && driven.lambda[k] > best) {
      best = driven.lambda[k];
      chaotic_node = k;
    }
  }
  if (chaotic_node == g.size()) {
    throw InvalidArgument("no grid node near the bifurcating fixed point");
  }

  RepresentativeStates out;
  out.chaotic = driven.node(p.particles, chaotic_node);

  // Bounding region of the sea, measured relative to the chaotic node so the
  // periodic phase axis is handled without seams.
  const auto sea = chaotic_component(driven, threshold, chaotic_node);
  double z_lo = out.chaotic.z;
  double z_hi = out.chaotic.z;
  double dphi_lo = 0.0;
  double dphi_hi = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!sea[k]) continue;
    const PhasePoint q = driven.node(p.particles, k);
    z_lo = std::min(z_lo, q.z);
    z_hi = std::max(z_hi, q.z);
    const double dphi = wrap_phase(q.phi - out.chaotic.phi);
    dphi_lo = std::min(dphi_lo, dphi);
    dphi_hi = std::max(dphi_hi, dphi);
  }
  auto inside = [&](PhasePoint q) {
    const double dphi = wrap_phase(q.phi - out.chaotic.phi);
    return q.z >= z_lo && q.z <= z_hi && dphi >= dphi_lo && dphi <= dphi_hi;
  };

  std::vector<PhasePoint> island_seeds;
  std::vector<std::size_t> island_nodes;
  double best_out = std::numeric_limits<double>::infinity();
  std::size_t out_node = g.size();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!std::isfinite(driven.lambda[k]) || sea[k]) continue;
    const PhasePoint q = driven.node(p.particles, k);
    if (std::abs(q.z / n) > options.max_abs_z_fraction) continue;
    const double l = driven.lambda[k];
    if (inside(q)) {
      if (l <= threshold) {
        island_seeds.push_back(q);
        island_nodes.push_back(k);
      }
    } else if (l < best_out) {
      best_out = l;
      out_node = k;
    }
  }
  if (island_seeds.empty() || out_node == g.size()) {
    throw InvalidArgument("could not locate regular reference states");
  }

  const auto section =
      poincare_section(p, island_seeds, options.island_periods, options.section);
  std::size_t in_node = g.size();
  double best_excursion = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < island_seeds.size(); ++s) {
    if (section.errors[s]) continue;
    const auto& orbit = section.points[s];
    double excursion = std::numeric_limits<double>::infinity();
    for (int q = 1; q <= options.island_max_period; ++q) {
      double worst = 0.0;
      for (std::size_t k = q; k < orbit.size(); k += q) {
        worst = std::max(worst, phase_distance(p.particles, orbit[k], island_seeds[s]));
      }
      excursion = std::min(excursion, worst);
    }
    const std::size_t node = island_nodes[s];
    if (excursion < best_excursion ||
        (excursion == best_excursion && driven.lambda[node] < driven.lambda[in_node])) {
      best_excursion = excursion;
      in_node = node;
    }
  }
  if (in_node == g.size()) {
    throw InvalidArgument("could not locate a KAM island centre");
  }
  out.regular_island = driven.node(p.particles, in_node);
  out.regular_outer = driven.node(p.particles, out_node);
  return out;
}

RepresentativeSearch find_representative_states(const SystemParams& p,
                                                const GridSpec& grid,
                                                const LyapunovControls& controls,
                                                const LocatorOptions& options,
                                                unsigned threads) {
  if (!p.driven()) throw InvalidArgument("representative states need a driven system");
  RepresentativeSearch out;
  out.driven = lyapunov_map(p, grid, controls, threads);
  out.unmodulated = lyapunov_map(p.with_drive(0.0, p.drive_frequency), grid, controls, threads);
  out.fraction = chaotic_fraction(out.driven, out.unmodulated);
  LocatorOptions located = options;
  located.section.threads = threads;
  located.section.tolerances = controls.tolerances;
  located.section.dynamics = controls.dynamics;
  out.states = locate_representative_states(p, out.driven, out.fraction.threshold, located);
  return out;
}

}  // namespace dimer
