#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace dimer {

inline constexpr double kPi = 3.14159265358979323846;

/// Raised when a physical parameter set or a function argument violates
/// its documented preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameters of the driven two-site Bose-Hubbard model, hbar = 1.
///
/// The tunnelling rate is J(t) = J0 + mu cos(omega t). Energies and rates are
/// conventionally quoted in units of J0.
struct SystemParams {
  double interaction = 0.0;      // U
  double tunnelling = 1.0;       // J0
  double drive_amplitude = 0.0;  // mu
  double drive_frequency = 1.0;  // omega
  int particles = 1;             // N

  /// C = U N / J0.
  [[nodiscard]] double nonlinearity() const {
    return interaction * particles / tunnelling;
  }
  [[nodiscard]] bool driven() const { return drive_amplitude != 0.0; }
  /// Driving period 2 pi / omega; empty for an undriven system.
  [[nodiscard]] std::optional<double> period() const;
  /// Driving period if defined, otherwise 2 pi / omega when omega > 0.
  /// Undriven runs still need a strobe interval for sections and fits.
  [[nodiscard]] double strobe_period() const;

  [[nodiscard]] SystemParams with_interaction(double u) const {
    SystemParams p = *this;
    p.interaction = u;
    return p;
  }
  [[nodiscard]] SystemParams with_drive(double mu, double omega) const {
    SystemParams p = *this;
    p.drive_amplitude = mu;
    p.drive_frequency = omega;
    return p;
  }
};

/// Validates and assembles a parameter set.
SystemParams build_params(double interaction, double tunnelling,
                          double drive_amplitude, double drive_frequency,
                          int particles);

/// Same, but specified through the nonlinearity C instead of U.
SystemParams build_params_from_nonlinearity(double nonlinearity,
                                            double tunnelling,
                                            double drive_amplitude,
                                            double drive_frequency,
                                            int particles);

/// Throws InvalidArgument when `p` breaks an invariant.
void validate(const SystemParams& p);

/// J(t) = J0 + mu cos(omega t).
double tunnelling_rate(const SystemParams& p, double t);

std::string describe(const SystemParams& p);

}  // namespace dimer
