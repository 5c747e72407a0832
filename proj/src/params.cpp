#include "dimer/params.hpp"

#include <cmath>
#include <sstream>

namespace dimer {

std::optional<double> SystemParams::period() const {
  if (!driven()) return std::nullopt;
  return 2.0 * kPi / drive_frequency;
}

double SystemParams::strobe_period() const {
  if (!(drive_frequency > 0.0)) {
    throw InvalidArgument("strobe period needs a positive drive frequency");
  }
  return 2.0 * kPi / drive_frequency;
}

void validate(const SystemParams& p) {
  if (p.particles < 1) {
    throw InvalidArgument("particle number N must be >= 1, got " +
                          std::to_string(p.particles));
  }
  if (!(p.tunnelling > 0.0) || !std::isfinite(p.tunnelling)) {
    throw InvalidArgument("tunnelling J0 must be positive and finite");
  }
  if (!std::isfinite(p.interaction) || !std::isfinite(p.drive_amplitude) ||
      !std::isfinite(p.drive_frequency)) {
    throw InvalidArgument("parameters must be finite");
  }
  if (p.driven() && !(p.drive_frequency > 0.0)) {
    throw InvalidArgument("drive frequency omega must be > 0 when mu != 0");
  }
}

SystemParams build_params(double interaction, double tunnelling,
                          double drive_amplitude, double drive_frequency,
                          int particles) {
  SystemParams p;
  p.interaction = interaction;
  p.tunnelling = tunnelling;
  p.drive_amplitude = drive_amplitude;
  p.drive_frequency = drive_frequency;
  p.particles = particles;
  validate(p);
  return p;
}

SystemParams build_params_from_nonlinearity(double nonlinearity,
                                            double tunnelling,
                                            double drive_amplitude,
                                            double drive_frequency,
                                            int particles) {
  if (particles < 1) {
    throw InvalidArgument("particle number N must be >= 1");
  }
  return build_params(nonlinearity * tunnelling / particles, tunnelling,
                      drive_amplitude, drive_frequency, particles);
}

double tunnelling_rate(const SystemParams& p, double t) {
  return p.tunnelling + p.drive_amplitude * std::cos(p.drive_frequency * t);
}

std::string describe(const SystemParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "U=" << p.interaction << " J0=" << p.tunnelling
     << " mu=" << p.drive_amplitude << " omega=" << p.drive_frequency
     << " N=" << p.particles << " C=" << p.nonlinearity();
  return os.str();
}

}  // namespace dimer
