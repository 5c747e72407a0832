#pragma once

#include <cmath>
#include <cstddef>

#include "dimer/params.hpp"

namespace dimer {

/// Wraps an angle into (-pi, pi].
inline double wrap_phase(double phi) {
  double w = std::remainder(phi, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

/// Cell-centred rectangular grid over (z/N, phi). The phase axis always
/// spans one full period starting at -pi; z is given as a fraction of N.
/// Node (i, j) sits at z/N = z_min + (i + 1/2) dz and phi = -pi + (j + 1/2) dphi.
struct GridSpec {
  int nz = 40;
  int nphi = 40;
  double z_min = -0.45;  // fraction of N
  double z_max = 0.45;

  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(nz) * static_cast<std::size_t>(nphi);
  }
  [[nodiscard]] double dz() const { return (z_max - z_min) / nz; }
  [[nodiscard]] double dphi() const { return 2.0 * kPi / nphi; }
  [[nodiscard]] double z_fraction(int i) const {
    return z_min + (i + 0.5) * dz();
  }
  [[nodiscard]] double phi(int j) const { return -kPi + (j + 0.5) * dphi(); }
  /// Flat index, phase fastest.
  [[nodiscard]] std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * nphi + j;
  }
  [[nodiscard]] int row(std::size_t k) const {
    return static_cast<int>(k / nphi);
  }
  [[nodiscard]] int col(std::size_t k) const {
    return static_cast<int>(k % nphi);
  }
  /// Cell containing (z/N, phi); -1 components when z is out of range.
  [[nodiscard]] int row_of(double z_frac) const {
    const double u = (z_frac - z_min) / dz();
    if (!(u >= 0.0) || u >= nz) return -1;
    return static_cast<int>(u);
  }
  [[nodiscard]] int col_of(double phi_value) const {
    const double u = (wrap_phase(phi_value) + kPi) / dphi();
    int j = static_cast<int>(u);
    return std::min(std::max(j, 0), nphi - 1);
  }

  void validate(double pole_limit = 0.5) const {
    if (nz < 1 || nphi < 1) throw InvalidArgument("grid needs nz, nphi >= 1");
    if (!(z_min < z_max) || z_min < -pole_limit || z_max > pole_limit) {
      throw InvalidArgument("grid z range must satisfy -0.5 <= z_min < z_max <= 0.5");
    }
  }
};

/// Default Lyapunov/chaotic-fraction layout: 40 x 40 over |z/N| <= 0.45.
inline GridSpec lyapunov_grid() { return GridSpec{}; }

/// Default Q-function layout: 200 x 200 over the whole sphere.
inline GridSpec q_grid() { return GridSpec{200, 200, -0.5, 0.5}; }

}  // namespace dimer
