#include <doctest.h>

#include <cmath>
#include <random>

#include "dimer/fock.hpp"
#include "dimer/quantum.hpp"
#include "dimer/semiclassical.hpp"
#include "oracles.hpp"

using namespace dimer;
using doctest::Approx;

namespace {

oracle::Vec to_eigen(std::span<const Complex> c) {
  oracle::Vec v(static_cast<int>(c.size()));
  for (std::size_t n = 0; n < c.size(); ++n) v(static_cast<int>(n)) = c[n];
  return v;
}

double distance(std::span<const Complex> a, const oracle::Vec& b) {
  double d = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) d = std::max(d, std::abs(a[n] - b(static_cast<int>(n))));
  return d;
}

StateVector random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<Complex> c(n + 1);
  double s = 0.0;
  for (auto& x : c) {
    x = {g(rng), g(rng)};
    s += std::norm(x);
  }
  for (auto& x : c) x /= std::sqrt(s);
  return StateVector(std::move(c));
}

}  // namespace

TEST_SUITE("quantum") {

TEST_CASE("bessel sequence matches the standard library") {
  for (double x : {0.0, 0.3, 2.0, 17.5, 120.0}) {
    const auto j = bessel_j_sequence(200, x);
    for (int k : {0, 1, 5, 40, 150}) {
      CHECK(std::abs(j[k] - std::cyl_bessel_j(static_cast<double>(k), x)) < 1e-13);
    }
  }
}

TEST_CASE("chebyshev exponential matches a dense eigendecomposition") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  const int d = 12;
  HermitianBand k;
  k.diagonal.resize(d);
  k.first.resize(d - 1);
  k.second.resize(d - 2);
  oracle::Mat dense = oracle::Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) dense(i, i) = k.diagonal[i] = 3 * g(rng);
  for (int i = 0; i + 1 < d; ++i) {
    k.first[i] = {g(rng), g(rng)};
    dense(i, i + 1) = k.first[i];
    dense(i + 1, i) = std::conj(k.first[i]);
  }
  for (int i = 0; i + 2 < d; ++i) {
    k.second[i] = {g(rng), g(rng)};
    dense(i, i + 2) = k.second[i];
    dense(i + 2, i) = std::conj(k.second[i]);
  }
  std::vector<Complex> psi(d);
  for (auto& x : psi) x = {g(rng), g(rng)};
  const auto ref = oracle::evolve_static(dense, to_eigen(psi), 1.0);
  chebyshev_exp(k, psi);
  CHECK(distance(psi, ref) < 1e-12);
}

TEST_CASE("diagonal hamiltonian keeps the number distribution") {
  std::mt19937_64 rng(2);
  const auto s = random_state(8, rng);
  HermitianBand k;
  for (int n = 0; n <= 8; ++n) k.diagonal.push_back(0.3 * n * n);
  k.first.assign(8, Complex(0.0));
  std::vector<Complex> psi(s.amplitudes().begin(), s.amplitudes().end());
  chebyshev_exp(k, psi);
  for (int n = 0; n <= 8; ++n) CHECK(std::norm(psi[n]) == Approx(std::norm(s[n])).epsilon(1e-13));
}

TEST_CASE("driven propagation matches a fine-step dense integration") {
  const int n = 6;
  const auto p = build_params(0.4, 1.0, 0.6, 1.7, n);
  const auto h0 = oracle::hamiltonian(n, p.interaction, p.tunnelling);
  const auto h1 = oracle::hamiltonian(n, 0.0, 1.0);
  auto drive = [&](double t) { return p.drive_amplitude * std::cos(p.drive_frequency * t); };
  const auto psi0 = bloch_coherent_state(n, 1.2, 0.8);
  const double t_end = 5.0;
  const auto ref = oracle::rk4(h0, h1, drive, to_eigen(psi0.amplitudes()), t_end, 2e-4);
  EvolveOptions coarse;
  const double e_coarse = distance(evolve_state(p, psi0, t_end, coarse).state.amplitudes(), ref);
  EvolveOptions fine;
  fine.controls.max_step = 0.005;
  const double e_fine = distance(evolve_state(p, psi0, t_end, fine).state.amplitudes(), ref);
  MESSAGE("deviation from dense oracle: " << e_coarse << " (default step), " << e_fine);
  CHECK(e_coarse < 1e-7);
  CHECK(e_fine < 1e-10);
}

TEST_CASE("effective propagation matches exponentiation of the dense matrix") {
  const int n = 6;
  const auto p = build_params(0.4, 1.0, 0.9, 3.0, n);
  const auto ref_h = oracle::effective_hamiltonian(n, p.interaction, p.tunnelling,
                                                   effective_bessel_factor(p));
  const auto psi0 = bloch_coherent_state(n, -0.7, 2.1);
  EvolveOptions o;
  o.source = HamiltonianSource::effective;
  const auto evo = evolve_state(p, psi0, 7.3, o);
  CHECK(distance(evo.state.amplitudes(), oracle::evolve_static(ref_h, to_eigen(psi0.amplitudes()), 7.3)) <
        1e-11);
}

TEST_CASE("undriven propagation is exact") {
  const int n = 14;
  const auto p = build_params_from_nonlinearity(1.5, 1.0, 0.0, 1.0, n);
  const auto psi0 = bloch_coherent_state(n, 2.0, 0.4);
  const auto ref = oracle::evolve_static(oracle::hamiltonian(n, p.interaction, 1.0),
                                         to_eigen(psi0.amplitudes()), 11.0);
  CHECK(distance(evolve_state(p, psi0, 11.0).state.amplitudes(), ref) < 1e-10);
}

TEST_CASE("magnus step converges at fourth order") {
  const int n = 30;
  const auto p = build_params_from_nonlinearity(1.0, 1.0, 0.5, 1.37, n);
  const auto psi0 = bloch_coherent_state(n, 3.0, 2.5);
  EvolveOptions fine;
  fine.controls.max_step = 0.0025;
  const auto ref = evolve_state(p, psi0, 6.0, fine).state;
  std::vector<double> err;
  for (double h : {0.2, 0.1, 0.05}) {
    EvolveOptions o;
    o.controls.max_step = h;
    const auto s = evolve_state(p, psi0, 6.0, o).state;
    double e = 0;
    for (int k = 0; k <= n; ++k) e = std::max(e, std::abs(s[k] - ref[k]));
    err.push_back(e);
  }
  CHECK(err[0] / err[1] == Approx(16.0).epsilon(0.2));
  CHECK(err[1] / err[2] == Approx(16.0).epsilon(0.2));
}

TEST_CASE("linear dynamics follows the mean-field precession") {
  const int n = 1000;
  const auto p = build_params(0.0, 1.0, 0.0, 1.0, n);
  EvolveOptions o;
  for (int k = 0; k <= 100; ++k) o.sample_times.push_back(10 * M_PI * k / 100.0);
  const auto evo = evolve_state(p, bloch_coherent_state(n, 0.0, M_PI / 2), 10 * M_PI, o);
  double worst = 0.0;
  for (std::size_t k = 0; k < evo.series.times.size(); ++k) {
    worst = std::max(worst, std::abs(evo.series.moments[k].z -
                                     0.5 * n * std::sin(2 * evo.series.times[k])));
  }
  CHECK(worst < 1e-6 * n);
}

TEST_CASE("unitarity and energy conservation over twenty periods") {
  const int n = 300;
  const auto driven = build_params_from_nonlinearity(1.0, 1.0, 0.2, 1.37, n);
  const double t_end = 20 * driven.strobe_period();
  const auto psi0 = bloch_coherent_state(n, 0.05 * n, 2.6);
  CHECK(std::abs(evolve_state(driven, psi0, t_end).norm_drift) < 1e-9);

  const auto still = driven.with_drive(0.0, 1.37);
  const auto h = hamiltonian_matrix(still, 0.0);
  const double e0 = expectation(h, psi0.amplitudes());
  const auto evo = evolve_state(still, psi0, t_end);
  CHECK(std::abs(expectation(h, evo.state.amplitudes()) - e0) < 1e-8 * std::abs(e0));
  CHECK(std::abs(evo.norm_drift) < 1e-9);
}

TEST_CASE("norm guard aborts with a diagnostic") {
  const auto p = build_params_from_nonlinearity(1.0, 1.0, 0.2, 1.37, 50);
  EvolveOptions o;
  o.controls.norm_abort = 0.0;
  o.controls.chebyshev_tolerance = 1e-3;
  CHECK_THROWS_AS(evolve_state(p, bloch_coherent_state(50, 3.0, 1.0), 5.0, o), NormDriftError);
}

TEST_CASE("series bookkeeping") {
  const auto p = build_params_from_nonlinearity(1.0, 1.0, 0.2, 1.37, 100);
  EvolveOptions o;
  o.sample_times = {0.0, 1.0, 2.5, 4.0};
  int calls = 0;
  o.on_sample = [&](double, std::span<const Complex> psi) {
    ++calls;
    CHECK(psi.size() == 101);
  };
  const auto evo = evolve_state(p, bloch_coherent_state(100, 10.0, 1.0), 4.0, o);
  CHECK(calls == 4);
  REQUIRE(evo.series.times.size() == 4);
  CHECK(evo.series.times[2] == 2.5);
  CHECK(evo.series.condensate_fraction[0] == Approx(1.0));
  for (double f : evo.series.condensate_fraction) {
    CHECK(f >= 0.5);
    CHECK(f <= 1.0 + 1e-9);
  }
  o.sample_times = {2.0, 1.0};
  CHECK_THROWS_AS(evolve_state(p, bloch_coherent_state(100, 10.0, 1.0), 4.0, o), InvalidArgument);
}

TEST_CASE("number distributions") {
  const auto f = number_distribution(fock_state(10, 3));
  for (int n = 0; n <= 10; ++n) CHECK(f.probabilities[n] == (n == 3 ? 1.0 : 0.0));

  const int big = 1000;
  const auto c = number_distribution(bloch_coherent_state(big, 0.0, 0.7));
  double sum = 0.0, worst = 0.0;
  for (int n = 0; n <= big; ++n) {
    sum += c.probabilities[n];
    worst = std::max(worst, std::abs(c.probabilities[n] -
                                     std::exp(oracle::log_binomial(big, n) - big * std::log(2.0))));
  }
  CHECK(std::abs(sum - 1.0) < 1e-12);
  CHECK(worst < 1e-14);
}

TEST_CASE("condensate fraction routes agree") {
  std::mt19937_64 rng(17);
  for (int n = 1; n <= 20; ++n) {
    const auto s = random_state(n, rng);
    CHECK(std::abs(condensate_fraction(s) - condensate_fraction_reduced_density(s.amplitudes())) <
          1e-9);
  }
  CHECK(condensate_fraction(bloch_coherent_state(1000, -200.0, 0.4)) == Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(condensate_fraction(twin_fock_state(1000)) - 0.5) < 1e-9);
}

TEST_CASE("Q function matches direct overlaps") {
  const int n = 9;
  std::mt19937_64 rng(4);
  const auto s = random_state(n, rng);
  const GridSpec g{7, 9, -0.45, 0.45};
  const auto q = q_function(s, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto c = bloch_coherent_state(n, g.z_fraction(g.row(k)) * n, g.phi(g.col(k)));
    Complex o = 0.0;
    for (int m = 0; m <= n; ++m) o += std::conj(c[m]) * s[m];
    CHECK(q.values[k] == Approx(std::norm(o)).epsilon(1e-12));
  }
}

TEST_CASE("Q function of a coherent state") {
  const int n = 1000;
  const GridSpec g = q_grid();
  // node centres so the peak is unambiguous
  const double z0 = g.z_fraction(131) * n;
  const double phi0 = g.phi(57);
  const auto q = q_function(bloch_coherent_state(n, z0, phi0));
  CHECK(q.argmax() == g.index(131, 57));
  CHECK(q.values[q.argmax()] == Approx(1.0));
  CHECK(q.normalization() == Approx(1.0).epsilon(1e-3));
  for (double v : q.values) CHECK(v >= 0.0);
  const auto antipode = q_function(bloch_coherent_state(n, -z0, phi0 + M_PI),
                                   GridSpec{1, 1, z0 / n - 1e-6, z0 / n + 1e-6});
  CHECK(antipode.values[0] == 0.0);
}

TEST_CASE("Q normalization holds for evolved states") {
  const int n = 200;
  const auto p = build_params_from_nonlinearity(1.0, 1.0, 0.2, 1.37, n);
  const auto evo = evolve_state(p, bloch_coherent_state(n, 0.05 * n, 2.6), 20 * p.strobe_period());
  CHECK(q_function(evo.state).normalization() == Approx(1.0).epsilon(1e-3));
}

TEST_CASE("condensate map at t = 0 is identically one") {
  const auto p = build_params_from_nonlinearity(1.0, 1.0, 0.2, 1.37, 100);
  const auto m = condensate_fraction_map(p, GridSpec{5, 5, -0.45, 0.45}, 0.0);
  for (double f : m.fraction) CHECK(f == Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
