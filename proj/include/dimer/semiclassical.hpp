#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dimer/grid.hpp"
#include "dimer/integrator.hpp"
#include "dimer/params.hpp"

namespace dimer {

/// Mean-field coordinates: population difference z = (n2 - n1)/2 in
/// particle units and relative phase phi = -arg(x + i y) in (-pi, pi].
struct PhasePoint {
  double z = 0.0;
  double phi = 0.0;
};

/// Which Hamiltonian generates the flow.
enum class Dynamics { time_dependent, effective };

/// Relative pole margin: |z| must stay below (N/2)(1 - margin).
inline constexpr double kPoleMargin = 1e-9;

class PoleContact : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Equations of motion (dz/dt, dphi/dt) of the driven mean-field dimer.
/// Throws PoleContact within the pole margin.
std::array<double, 2> mean_field_rhs(const SystemParams& p, PhasePoint point,
                                     double t);

/// Same for the period-averaged high-frequency Hamiltonian.
std::array<double, 2> effective_mean_field_rhs(const SystemParams& p,
                                               PhasePoint point);

/// Energy of the undriven flow, E = 2U z^2 - 2 J0 sqrt(N^2/4 - z^2) cos(phi).
double mean_field_energy(const SystemParams& p, PhasePoint point);

/// Conserved energy of the effective flow.
double effective_mean_field_energy(const SystemParams& p, PhasePoint point);

/// The fixed point (0, pi). It bifurcates at C = 1 for U > 0 and is where
/// the chaotic sea forms under modulation.
inline PhasePoint bifurcation_point() { return {0.0, kPi}; }

struct TrajectoryControls {
  Tolerances tolerances{};
  Dynamics dynamics = Dynamics::time_dependent;
  /// Output times; empty means only the final time.
  std::vector<double> sample_times;
};

struct TrajectorySample {
  double t = 0.0;
  PhasePoint point;
};

struct ClassicalTrajectory {
  std::vector<TrajectorySample> samples;  // starts with t = 0
  Tolerances tolerances{};
  std::size_t steps = 0;
  /// Set when the integration stopped early (pole contact, step failure);
  /// samples then end at the last valid output time.
  std::optional<std::string> error;
  double failure_time = 0.0;

  [[nodiscard]] bool ok() const { return !error.has_value(); }
};

/// Integrates the mean-field equations from `start` at t = 0 to `t_end`.
/// The phase is unwrapped internally and wrapped to (-pi, pi] on output.
ClassicalTrajectory integrate_trajectory(const SystemParams& p,
                                         PhasePoint start, double t_end,
                                         const TrajectoryControls& controls = {});

struct PoincareSection {
  std::vector<PhasePoint> seeds;
  double strobe_period = 0.0;
  /// points[s][k] is seed s at t = k * strobe_period.
  std::vector<std::vector<PhasePoint>> points;
  /// Per-seed failure message; points[s] is then truncated.
  std::vector<std::optional<std::string>> errors;
};

struct SectionControls {
  /// Required when the system is undriven.
  std::optional<double> strobe_period;
  Tolerances tolerances{};
  Dynamics dynamics = Dynamics::time_dependent;
  unsigned threads = 0;
};

PoincareSection poincare_section(const SystemParams& p,
                                 std::span<const PhasePoint> seeds, int periods,
                                 const SectionControls& controls = {});

struct LyapunovControls {
  double initial_offset = 1e-4;  // applied to z, particle units
  int periods = 20;
  std::optional<double> strobe_period;  // defaults to 2 pi / omega
  double saturation_fraction = 0.1;     // of the phase-space diameter
  Tolerances tolerances{};
  Dynamics dynamics = Dynamics::time_dependent;
};

struct LyapunovResult {
  double lambda = 0.0;     // fitted slope, units of J0
  double residual = 0.0;   // rms deviation of the fit
  bool saturated = false;  // fit window truncated
  int fit_points = 0;
  std::vector<double> times;
  std::vector<double> log_divergence;
};

class LyapunovError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Distance in the flat (z/N, phi) metric with the phase difference wrapped.
double phase_distance(int particles, PhasePoint a, PhasePoint b);

/// Diameter of the (z/N, phi) cylinder in the same metric.
double phase_space_diameter();

/// Finite-time exponent from the logarithmic divergence of two given
/// trajectories, sampled stroboscopically and fitted by least squares.
LyapunovResult pair_lyapunov(const SystemParams& p, PhasePoint first,
                             PhasePoint second,
                             const LyapunovControls& controls = {});

/// Finite-time exponent at `point` with the partner displaced by the
/// initial offset in z.
LyapunovResult finite_time_lyapunov(const SystemParams& p, PhasePoint point,
                                    const LyapunovControls& controls = {});

struct LyapunovMap {
  GridSpec grid;
  std::vector<double> lambda;  // NaN where the node failed
  std::vector<double> residual;
  std::vector<char> saturated;
  std::vector<std::optional<std::string>> errors;

  [[nodiscard]] PhasePoint node(int particles, std::size_t k) const;
  [[nodiscard]] std::size_t failed() const;
  /// Largest finite exponent.
  [[nodiscard]] double max_lambda() const;
};

LyapunovMap lyapunov_map(const SystemParams& p, const GridSpec& grid,
                         const LyapunovControls& controls = {},
                         unsigned threads = 0);

struct ChaoticFraction {
  double fraction = 0.0;
  double threshold = 0.0;  // max exponent of the unmodulated map
  std::size_t chaotic = 0;
  std::size_t classified = 0;
  std::size_t failed = 0;
};

/// Classifies each node as chaotic iff its exponent strictly exceeds the
/// maximum of the unmodulated map on the same grid and strobe period.
ChaoticFraction chaotic_fraction(const LyapunovMap& driven,
                                 const LyapunovMap& unmodulated);

ChaoticFraction chaotic_fraction(const SystemParams& p, const GridSpec& grid,
                                 const LyapunovControls& controls = {},
                                 unsigned threads = 0);

/// Uses a near-square grid with n_samples nodes over |z/N| <= 0.45.
ChaoticFraction chaotic_fraction(const SystemParams& p, int n_samples = 1600,
                                 unsigned threads = 0);

GridSpec sample_grid(int n_samples);

/// The three initial conditions used to contrast regular and chaotic
/// quantum dynamics.
struct RepresentativeStates {
  PhasePoint chaotic;
  PhasePoint regular_island;  // "regular 1": KAM island inside the sea
  PhasePoint regular_outer;   // "regular 2": regular region outside the sea
};

struct LocatorOptions {
  /// Window around the bifurcating fixed point searched for the chaotic
  /// node: |z/N| <= chaotic_z_window and |phi - pi| <= chaotic_phi_window.
  double chaotic_z_window = 0.1;
  double chaotic_phi_window = 0.6;
  double max_abs_z_fraction = 0.45;
  /// Island centres are found as the regular nodes whose stroboscopic orbit
  /// returns closest to its start, allowing islands of period up to
  /// island_max_period.
  int island_periods = 20;
  int island_max_period = 3;
  SectionControls section{};
};

/// Picks representative states from a driven map and the regular threshold:
/// chaotic = largest exponent near the bifurcating fixed point; island =
/// regular node within the bounding region of the connected chaotic sea
/// with the smallest recurrence excursion (an island centre); outer =
/// smallest exponent outside that region.
RepresentativeStates locate_representative_states(
    const SystemParams& p, const LyapunovMap& driven, double threshold,
    const LocatorOptions& options = {});

/// Driven and unmodulated maps on one grid, the resulting classification and
/// the located states.
struct RepresentativeSearch {
  LyapunovMap driven;
  LyapunovMap unmodulated;
  ChaoticFraction fraction;
  RepresentativeStates states;
};

RepresentativeSearch find_representative_states(const SystemParams& p,
                                                const GridSpec& grid = lyapunov_grid(),
                                                const LyapunovControls& controls = {},
                                                const LocatorOptions& options = {},
                                                unsigned threads = 0);

/// Mask of nodes belonging to the connected chaotic component that contains
/// `seed_node` (phase axis periodic).
std::vector<char> chaotic_component(const LyapunovMap& map, double threshold,
                                    std::size_t seed_node);

}  // namespace dimer
