#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "dimer/semiclassical.hpp"

using namespace dimer;
using doctest::Approx;

namespace {

SystemParams driven(int n = 1000, double c = 1.0, double mu = 0.2, double omega = 1.37) {
  return build_params_from_nonlinearity(c, 1.0, mu, omega, n);
}

PhasePoint end_point(const SystemParams& p, PhasePoint start, double t, Tolerances tol = {}) {
  TrajectoryControls tc;
  tc.tolerances = tol;
  const auto tr = integrate_trajectory(p, start, t, tc);
  REQUIRE(tr.ok());
  return tr.samples.back().point;
}

std::size_t occupied_cells(const PoincareSection& s, int particles) {
  std::set<std::pair<int, int>> cells;
  for (const auto& orbit : s.points)
    for (const auto& q : orbit) {
      const int i = static_cast<int>(std::floor((q.z / particles + 0.5) * 100));
      const int j = static_cast<int>(std::floor((q.phi + M_PI) / (2 * M_PI) * 100));
      cells.insert({i, j});
    }
  return cells.size();
}

}  // namespace

TEST_SUITE("semiclassical") {

TEST_CASE("fixed points and direct substitution") {
  const auto p = driven();
  for (double t : {0.0, 0.3, 2.2}) {
    for (PhasePoint q : {PhasePoint{0.0, 0.0}, PhasePoint{0.0, M_PI}}) {
      const auto r = mean_field_rhs(p, q, t);
      CHECK(std::abs(r[0]) < 1e-12);
      CHECK(r[1] == 0.0);
    }
  }
  const auto free = build_params(0.0, 1.0, 0.0, 1.0, 80);
  const auto r = mean_field_rhs(free, {0.0, M_PI / 2}, 0.0);
  CHECK(r[0] == Approx(80.0));
  CHECK(r[1] == 0.0);
}

TEST_CASE("pole contact is an error") {
  const auto p = driven(10);
  CHECK_THROWS_AS(mean_field_rhs(p, {5.0, 0.3}, 0.0), PoleContact);
  CHECK_NOTHROW(mean_field_rhs(p, {4.99, 0.3}, 0.0));
}

TEST_CASE("linear precession matches the analytic Rabi solution") {
  const int n = 1000;
  const auto p = build_params(0.0, 1.0, 0.0, 1.0, n);
  TrajectoryControls tc;
  for (int k = 0; k <= 400; ++k) tc.sample_times.push_back(10 * M_PI * k / 400.0);
  const auto tr = integrate_trajectory(p, {0.0, M_PI / 2}, 10 * M_PI, tc);
  REQUIRE(tr.ok());
  double worst = 0.0;
  for (const auto& s : tr.samples) worst = std::max(worst, std::abs(s.point.z - 0.5 * n * std::sin(2 * s.t)));
  CHECK(worst < 1e-8 * n);
}

TEST_CASE("undriven energy is conserved for random seeds") {
  const int n = 1000;
  const auto p = driven(n, 1.0, 0.0, 1.37);
  const double t_end = 20 * p.strobe_period();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uz(-0.45, 0.45), uphi(-M_PI, M_PI);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const PhasePoint start{uz(rng) * n, uphi(rng)};
    const double e0 = mean_field_energy(p, start);
    const auto q = end_point(p, start, t_end);
    worst = std::max(worst, std::abs(mean_field_energy(p, q) - e0) / std::max(std::abs(e0), 1.0 * n));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("effective flow conserves its energy") {
  const int n = 500;
  const auto p = driven(n, 1.0, 0.2, 10.0);
  TrajectoryControls tc;
  tc.dynamics = Dynamics::effective;
  const PhasePoint start{0.2 * n, 1.0};
  const auto tr = integrate_trajectory(p, start, 50.0, tc);
  REQUIRE(tr.ok());
  const double e0 = effective_mean_field_energy(p, start);
  CHECK(std::abs(effective_mean_field_energy(p, tr.samples.back().point) - e0) < 1e-8 * n);
}

TEST_CASE("driven fixed point stays put") {
  const auto p = driven();
  const auto q = end_point(p, {0.0, 0.0}, 20 * p.strobe_period());
  CHECK(q.z == 0.0);
  CHECK(q.phi == 0.0);
}

TEST_CASE("stroboscopic map preserves phase-space area") {
  // central-difference Jacobian of the one-period map on a small system
  for (double mu : {0.0, 0.2}) {
    const int n = 2;
    const auto p = driven(n, 1.0, mu, 1.37);
    const Tolerances tol{1e-13, 1e-15, 1e-4, 50'000'000};
    const double t = p.strobe_period();
    const double h = 1e-4;
    for (PhasePoint c : {PhasePoint{0.3, 0.4}, PhasePoint{-0.1, 2.9}, PhasePoint{0.05, M_PI - 0.2}}) {
      auto diff = [&](PhasePoint a, PhasePoint b) {
        return std::array<double, 2>{a.z - b.z, std::remainder(a.phi - b.phi, 2 * M_PI)};
      };
      const auto dz = diff(end_point(p, {c.z + h, c.phi}, t, tol), end_point(p, {c.z - h, c.phi}, t, tol));
      const auto dp = diff(end_point(p, {c.z, c.phi + h}, t, tol), end_point(p, {c.z, c.phi - h}, t, tol));
      const double det = (dz[0] * dp[1] - dz[1] * dp[0]) / (4 * h * h);
      CHECK(det == Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("undriven section lies on one energy level") {
  const auto p = driven(1000, 1.0, 0.0, 1.37);
  SectionControls sc;
  sc.strobe_period = 1.234;
  const std::vector<PhasePoint> seeds{{120.0, 0.7}, {-300.0, 2.0}, {10.0, 3.0}};
  const auto s = poincare_section(p, seeds, 60, sc);
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    REQUIRE(s.points[k].size() == 61);
    const double e0 = mean_field_energy(p, seeds[k]);
    double spread = 0.0;
    for (const auto& q : s.points[k]) spread = std::max(spread, std::abs(mean_field_energy(p, q) - e0));
    CHECK(spread < 1e-8 * std::abs(e0));
  }
}

TEST_CASE("section from a fixed point is constant and undriven sections need a period") {
  const auto p = driven();
  const std::vector<PhasePoint> seeds{{0.0, 0.0}};
  const auto s = poincare_section(p, seeds, 30);
  CHECK(s.strobe_period == Approx(2 * M_PI / 1.37));
  for (const auto& q : s.points[0]) {
    CHECK(q.z == 0.0);
    CHECK(q.phi == 0.0);
  }
}

TEST_CASE("driving fills a two-dimensional region near the bifurcating point") {
  const int n = 1000;
  std::vector<PhasePoint> seeds;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) seeds.push_back({0.01 * a * n, M_PI + 0.1 * b});
  const auto on = poincare_section(driven(n), seeds, 200);
  SectionControls sc;
  sc.strobe_period = 2 * M_PI / 1.37;
  const auto off = poincare_section(driven(n, 1.0, 0.0), seeds, 200, sc);
  const auto c_on = occupied_cells(on, n);
  const auto c_off = occupied_cells(off, n);
  MESSAGE("occupied cells driven " << c_on << " undriven " << c_off);
  CHECK(c_on > 5 * c_off);
  const auto shorter = poincare_section(driven(n), seeds, 50);
  CHECK(occupied_cells(shorter, n) < c_on);
}

TEST_CASE("lyapunov exponent at a stable centre is small") {
  const auto p = driven(1000, 0.5, 0.0);
  LyapunovControls lc;
  lc.strobe_period = 2 * M_PI / 1.37;
  const auto r = finite_time_lyapunov(p, {0.0, 0.0}, lc);
  CHECK(r.lambda < 0.05);
  CHECK(r.fit_points == 21);
}

TEST_CASE("pair exponent is symmetric under swapping members") {
  const int n = 1000;
  const auto p = driven(n);
  const PhasePoint a{0.03 * n, 2.6};
  const PhasePoint b{0.03 * n + 1e-4, 2.6};
  const auto ab = pair_lyapunov(p, a, b);
  const auto ba = pair_lyapunov(p, b, a);
  CHECK(ab.lambda == Approx(ba.lambda).epsilon(1e-6));
}

TEST_CASE("lyapunov map is deterministic and single-node maps work") {
  const auto p = driven(1000);
  const GridSpec g{6, 6, -0.3, 0.3};
  const auto m1 = lyapunov_map(p, g, {}, 1);
  const auto m2 = lyapunov_map(p, g, {}, 3);
  CHECK(m1.failed() == 0);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(m1.lambda[k] == m2.lambda[k]);

  const GridSpec single{1, 1, -0.01, 0.01};
  LyapunovControls lc;
  lc.strobe_period = 2 * M_PI / 1.37;
  const auto m0 = lyapunov_map(driven(1000, 1.0, 0.0), single, lc);
  CHECK(std::abs(single.z_fraction(0)) < 1e-15);
  CHECK(m0.lambda[0] < 0.05);
}

TEST_CASE("chaotic fraction vanishes without drive and is partial at low frequency") {
  const GridSpec g = sample_grid(400);
  CHECK(g.nz == 20);
  LyapunovControls lc;
  lc.strobe_period = 2 * M_PI / 1.37;
  const auto zero = chaotic_fraction(driven(1000, 1.0, 0.0), g, lc);
  CHECK(zero.fraction == 0.0);
  CHECK(zero.chaotic == 0);
  const auto f = chaotic_fraction(driven(1000), g, lc);
  MESSAGE("chaotic fraction on 20x20: " << f.fraction);
  CHECK(f.fraction > 0.05);
  CHECK(f.fraction < 0.6);
}

TEST_CASE("phase distance wraps the phase") {
  CHECK(phase_distance(100, {0.0, M_PI - 0.1}, {0.0, -M_PI + 0.1}) == Approx(0.2));
  CHECK(phase_distance(100, {10.0, 0.0}, {0.0, 0.0}) == Approx(0.1));
}

}  // TEST_SUITE
