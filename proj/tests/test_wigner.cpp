#include <doctest.h>

#include <cmath>

#include "dimer/metrics.hpp"
#include "dimer/quantum.hpp"
#include "dimer/wigner.hpp"

using namespace dimer;
using doctest::Approx;

namespace {

struct Stats {
  double mean = 0.0;
  double se = 0.0;
};

template <class F>
Stats sample_stats(const WignerEnsemble& e, F f) {
  double s = 0.0, s2 = 0.0;
  for (const auto& t : e.paths) {
    const double v = f(t);
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(e.size());
  const double mean = s / n;
  return {mean, std::sqrt((s2 / n - mean * mean) / (n - 1))};
}

SystemParams chaotic_params(int n = 1000) {
  return build_params_from_nonlinearity(1.0, 1.0, 0.2, 1.37, n);
}

}  // namespace

TEST_SUITE("wigner") {

TEST_CASE("counter-based generator") {
  CHECK(uniform_open(1, 2, 3) == uniform_open(1, 2, 3));
  CHECK(uniform_open(1, 2, 3) != uniform_open(1, 2, 4));
  CHECK(uniform_open(1, 2, 3) != uniform_open(1, 3, 3));
  CHECK(uniform_open(1, 2, 3) != uniform_open(2, 2, 3));
  double s = 0.0, s2 = 0.0, lo = 1.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const auto g = normal_pair(42, k, 0);
    s += g[0] + g[1];
    s2 += g[0] * g[0] + g[1] * g[1];
    lo = std::min(lo, uniform_open(42, k, 9));
  }
  CHECK(std::abs(s / (2 * n)) < 5 / std::sqrt(2.0 * n));
  CHECK(s2 / (2 * n) == Approx(1.0).epsilon(0.01));
  CHECK(lo > 0.0);
}

TEST_CASE("mean-field amplitudes") {
  const auto a = mean_field_amplitudes(100, 20.0, 1.3);
  CHECK(std::norm(a[0]) == Approx(30.0));
  CHECK(std::norm(a[1]) == Approx(70.0));
  CHECK(-std::arg(std::conj(a[1]) * a[0]) == Approx(1.3));
}

TEST_CASE("initial sampling reproduces the symmetric-ordered moments") {
  const int n = 1000;
  const double z0 = 137.0;
  const auto p = chaotic_params(n);
  for (auto sampling : {InitialSampling::fixed_number, InitialSampling::glauber}) {
    const auto e = sample_initial_ensemble(p, z0, 0.9, 1'000'000, 77, sampling);
    const double a1 = 0.5 * n - z0;
    const double a2 = 0.5 * n + z0;
    const auto n1 = sample_stats(e, [](const Trajectory& t) { return std::norm(t.beta1); });
    const auto n2 = sample_stats(e, [](const Trajectory& t) { return std::norm(t.beta2); });
    const auto z = sample_stats(e, [](const Trajectory& t) {
      return 0.5 * (std::norm(t.beta2) - std::norm(t.beta1));
    });
    CHECK(std::abs(n1.mean - (a1 + 0.5)) < 5 * n1.se);
    CHECK(std::abs(n2.mean - (a2 + 0.5)) < 5 * n2.se);
    CHECK(std::abs(z.mean - z0) < 5 * z.se);
    // the half-quantum is removed by the ordering correction
    const auto m = moment_estimate(e);
    CHECK(std::abs((n1.mean + n2.mean) - m.moments.particles - 1.0) < 1e-9);
  }
}

TEST_CASE("sampler particle-number statistics") {
  const int n = 400;
  const auto p = chaotic_params(n);
  const auto fixed = sample_initial_ensemble(p, 50.0, 0.2, 200'000, 5);
  const auto glauber = sample_initial_ensemble(p, 50.0, 0.2, 200'000, 5, InitialSampling::glauber);
  auto total = [](const Trajectory& t) { return t.norm(); };
  auto var = [&](const WignerEnsemble& e) {
    const auto s = sample_stats(e, total);
    return s.se * s.se * (e.size() - 1.0);
  };
  // Wigner function of |N> in one mode has <|a|^2> = N + 1/2 and a spread of 1/2
  CHECK(sample_stats(fixed, total).mean == Approx(n + 1.0).epsilon(1e-3));
  CHECK(var(fixed) < 1.0);
  CHECK(sample_stats(glauber, total).mean == Approx(n + 1.0).epsilon(1e-3));
  CHECK(var(glauber) == Approx(n + 0.5).epsilon(0.05));
}

TEST_CASE("fresh ensemble moments") {
  const int n = 1000;
  const auto e = sample_initial_ensemble(chaotic_params(n), -210.0, -2.0, 20'000, 3);
  const auto m = moment_estimate(e);
  CHECK(std::abs(m.moments.z + 210.0) < 5 * m.se_z);
  CHECK(std::abs(std::remainder(m.moments.phase() + 2.0, 2 * M_PI)) < 0.01);
  CHECK(std::abs(m.condensate_fraction - 1.0) < 5 * m.se_condensate_fraction + 1e-9);
  const auto exact = bloch_moments(bloch_coherent_state(n, -210.0, -2.0));
  CHECK(std::abs(m.moments.var_z - exact.var_z) < 5 * m.se_var_z);
  CHECK(m.blocks == 32);
  CHECK(m.samples == 20'000);
}

TEST_CASE("sampling is reproducible") {
  const auto p = chaotic_params(100);
  const auto a = sample_initial_ensemble(p, 3.0, 1.0, 500, 99);
  const auto b = sample_initial_ensemble(p, 3.0, 1.0, 500, 99);
  const auto c = sample_initial_ensemble(p, 3.0, 1.0, 500, 100);
  CHECK(std::memcmp(a.paths.data(), b.paths.data(), 500 * sizeof(Trajectory)) == 0);
  CHECK(std::memcmp(a.paths.data(), c.paths.data(), 500 * sizeof(Trajectory)) != 0);
  // a prefix of a larger ensemble is the smaller ensemble
  const auto big = sample_initial_ensemble(p, 3.0, 1.0, 800, 99);
  CHECK(std::memcmp(a.paths.data(), big.paths.data(), 500 * sizeof(Trajectory)) == 0);
}

TEST_CASE("evolution is independent of the worker count") {
  const auto p = chaotic_params(1000);
  auto a = sample_initial_ensemble(p, 50.0, 2.6, 64, 1);
  auto b = a;
  WignerControls one, four;
  one.threads = 1;
  four.threads = 4;
  evolve_ensemble(p, a, 15.0, one);
  evolve_ensemble(p, b, 7.0, four);
  evolve_ensemble(p, b, 15.0, four);
  // segmenting changes step sizes; compare thread counts on equal segments
  auto c = sample_initial_ensemble(p, 50.0, 2.6, 64, 1);
  evolve_ensemble(p, c, 15.0, four);
  CHECK(std::memcmp(a.paths.data(), c.paths.data(), 64 * sizeof(Trajectory)) == 0);
  double worst = 0.0;
  for (std::size_t k = 0; k < 64; ++k) worst = std::max(worst, std::abs(a.paths[k].beta1 - b.paths[k].beta1));
  CHECK(worst < 1e-6 * std::sqrt(1000.0));
}

TEST_CASE("linear trajectory is an exact beam splitter") {
  const auto p = build_params(0.0, 1.3, 0.0, 1.0, 10);
  WignerEnsemble e;
  e.particles = 10;
  const Complex b1(1.2, -0.4), b2(0.3, 2.0);
  e.paths = {{b1, b2}};
  e.quarantined = {0};
  const double t = 4.1;
  evolve_ensemble(p, e, t);
  const Complex i(0.0, 1.0);
  const double w = 1.3 * t;
  CHECK(std::abs(e.paths[0].beta1 - (std::cos(w) * b1 + i * std::sin(w) * b2)) < 1e-10);
  CHECK(std::abs(e.paths[0].beta2 - (std::cos(w) * b2 + i * std::sin(w) * b1)) < 1e-10);
  // |beta1|^2 oscillates at 2 J0
  CHECK(e.t == t);
}

TEST_CASE("per-trajectory norm is conserved over twenty periods") {
  const auto p = chaotic_params(1000);
  auto e = sample_initial_ensemble(p, 56.25, 2.59, 200, 8);
  std::vector<double> before;
  for (const auto& t : e.paths) before.push_back(t.norm());
  evolve_ensemble(p, e, 20 * p.strobe_period());
  CHECK(e.quarantine_count() == 0);
  double worst = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    worst = std::max(worst, std::abs(e.paths[k].norm() / before[k] - 1.0));
  }
  CHECK(worst < 1e-9);
  CHECK(e.max_norm_drift == Approx(worst).epsilon(1e-12));
  CHECK_THROWS_AS(evolve_ensemble(p, e, 1.0), InvalidArgument);
}

TEST_CASE("linear dynamics reproduces exact moments") {
  const int n = 60;
  const auto p = build_params(0.0, 1.0, 0.3, 2.0, n);
  auto e = sample_initial_ensemble(p, 12.0, 0.5, 40'000, 21);
  EvolveOptions o;
  const std::vector<double> times{0.5, 1.7, 3.0, 4.4};
  o.sample_times = times;
  const auto exact = evolve_state(p, bloch_coherent_state(n, 12.0, 0.5), times.back(), o);
  for (std::size_t k = 0; k < times.size(); ++k) {
    evolve_ensemble(p, e, times[k]);
    const auto m = moment_estimate(e);
    const auto& x = exact.series.moments[k];
    CHECK(std::abs(m.moments.z - x.z) < 4 * m.se_z);
    CHECK(std::abs(m.moments.x - x.x) < 4 * m.se_x);
    CHECK(std::abs(m.moments.var_z - x.var_z) < 4 * m.se_var_z);
  }
}

TEST_CASE("standard error scales as the inverse square root of the path count") {
  const auto p = chaotic_params(1000);
  std::vector<double> se;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    se.push_back(moment_estimate(sample_initial_ensemble(p, 100.0, 1.0, n, 6)).se_z);
  }
  CHECK(se[0] / se[1] == Approx(std::sqrt(10.0)).epsilon(0.2));
  CHECK(se[1] / se[2] == Approx(std::sqrt(10.0)).epsilon(0.2));
}

TEST_CASE("binning rules") {
  WignerEnsemble e;
  e.particles = 4;
  e.paths = {{std::polar(std::sqrt(2.5), 0.3), Complex(1.0)}};
  e.quarantined = {0};
  auto d = binned_number_distribution(e, 1);
  CHECK(d.probabilities.size() == 5);
  CHECK(d.probabilities[2] == 1.0);
  CHECK(d.source == NumberDistribution::Source::binned);

  e.paths.push_back({std::polar(std::sqrt(5.0), 0.0), Complex(0.0)});
  e.paths.push_back({std::polar(std::sqrt(0.2), 0.0), Complex(0.0)});
  e.quarantined = {0, 0, 1};
  d = binned_number_distribution(e, 1);
  CHECK(d.out_of_range == 1);
  CHECK(d.samples == 1);
  CHECK(d.probabilities[2] == 1.0);
  d = binned_number_distribution(e, 2);
  CHECK(d.probabilities[1] == 0.5);
  CHECK(d.probabilities[0] == 0.5);
}

TEST_CASE("binned coherent distribution matches the binomial") {
  const int n = 1000;
  const auto e = sample_initial_ensemble(chaotic_params(n), 0.0, 0.4, 100'000, 12);
  const auto binned = binned_number_distribution(e, 1);
  const auto exact = number_distribution(bloch_coherent_state(n, 0.0, 0.4));
  double sum = 0.0;
  for (double w : binned.probabilities) sum += w;
  CHECK(std::abs(sum - 1.0) < 1e-9);
  const auto db = bhattacharyya_distance(exact.probabilities, binned.probabilities);
  MESSAGE("binomial D_B with 1e5 paths: " << db.value);
  CHECK(db.value <= 1e-2);
}

TEST_CASE("phase density peaks at the sampled point") {
  const int n = 1000;
  const GridSpec g = q_grid();
  const double z0 = g.z_fraction(80) * n;
  const double phi0 = g.phi(190);
  const auto d = binned_phase_density(sample_initial_ensemble(chaotic_params(n), z0, phi0, 50'000, 2), g);
  const auto peak = static_cast<std::size_t>(
      std::max_element(d.weights.begin(), d.weights.end()) - d.weights.begin());
  CHECK(std::abs(g.row(peak) - 80) <= 1);
  const int dc = std::abs(g.col(peak) - 190);
  CHECK(std::min(dc, g.nphi - dc) <= 1);
  double sum = 0.0;
  for (double w : d.weights) {
    CHECK(w >= 0.0);
    sum += w;
  }
  CHECK(sum == Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
