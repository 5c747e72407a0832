#pragma once

#include <complex>
#include <span>
#include <vector>

#include "dimer/params.hpp"

namespace dimer {

using Complex = std::complex<double>;

/// Real symmetric banded matrix in the Fock basis n = 0..N, where n is the
/// occupation of site 1. Stores the main diagonal, the first super-diagonal
/// (n <-> n+1) and optionally the second super-diagonal (n <-> n+2).
class FockMatrix {
 public:
  FockMatrix() = default;
  FockMatrix(std::vector<double> diagonal, std::vector<double> first,
             std::vector<double> second = {});

  [[nodiscard]] int dimension() const {
    return static_cast<int>(diagonal_.size());
  }
  [[nodiscard]] int bandwidth() const { return second_.empty() ? 1 : 2; }
  [[nodiscard]] const std::vector<double>& diagonal() const {
    return diagonal_;
  }
  [[nodiscard]] const std::vector<double>& first_off_diagonal() const {
    return first_;
  }
  [[nodiscard]] const std::vector<double>& second_off_diagonal() const {
    return second_;
  }

  /// Element (i, j); zero outside the band.
  [[nodiscard]] double operator()(int i, int j) const;

  /// out = M * in.
  void apply(std::span<const Complex> in, std::span<Complex> out) const;

  [[nodiscard]] std::vector<std::vector<double>> dense() const;

  /// Maximum absolute entry-wise difference, band structures may differ.
  [[nodiscard]] double max_abs_difference(const FockMatrix& other) const;

 private:
  std::vector<double> diagonal_;
  std::vector<double> first_;
  std::vector<double> second_;
};

/// Hamiltonian at time t:
///   H = U (b1+ b1+ b1 b1 + b2+ b2+ b2 b2) - J(t) (b1+ b2 + b2+ b1).
FockMatrix hamiltonian_matrix(const SystemParams& p, double t);

/// Interaction part U[n(n-1) + (N-n)(N-n-1)] of the diagonal.
std::vector<double> interaction_diagonal(int particles, double interaction);

/// Hopping pattern -sqrt((n+1)(N-n)); multiply by J(t) to get the
/// tunnelling band.
std::vector<double> hopping_band(int particles);

/// Bessel factor J_0(4 mu / omega) entering the high-frequency Hamiltonian.
double effective_bessel_factor(const SystemParams& p);

/// Static Hamiltonian obtained by period-averaging in the rotating frame of
/// a fast drive. Pentadiagonal in the Fock basis.
FockMatrix effective_hamiltonian_matrix(const SystemParams& p);

/// <psi|M|psi> for a normalized state.
double expectation(const FockMatrix& m, std::span<const Complex> psi);

}  // namespace dimer
