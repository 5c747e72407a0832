#include "dimer/fock.hpp"

#include <algorithm>
#include <cmath>

namespace dimer {

FockMatrix::FockMatrix(std::vector<double> diagonal, std::vector<double> first,
                       std::vector<double> second)
    : diagonal_(std::move(diagonal)),
      first_(std::move(first)),
      second_(std::move(second)) {
  const auto n = diagonal_.size();
  if (n == 0) throw InvalidArgument("FockMatrix needs dimension >= 1");
  if (first_.size() + 1 != n) {
    throw InvalidArgument("first off-diagonal must have dimension-1 entries");
  }
  if (!second_.empty() && second_.size() + 2 != n) {
    throw InvalidArgument("second off-diagonal must have dimension-2 entries");
  }
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
  };
  if (!finite(diagonal_) || !finite(first_) || !finite(second_)) {
    throw InvalidArgument("FockMatrix entries must be finite");
  }
}

double FockMatrix::operator()(int i, int j) const {
  const int d = std::abs(i - j);
  const int lo = std::min(i, j);
  if (d == 0) return diagonal_[i];
  if (d == 1) return first_[lo];
  if (d == 2 && !second_.empty()) return second_[lo];
  return 0.0;
}

void FockMatrix::apply(std::span<const Complex> in,
                       std::span<Complex> out) const {
  const int n = dimension();
  for (int i = 0; i < n; ++i) out[i] = diagonal_[i] * in[i];
  for (int i = 0; i + 1 < n; ++i) {
    out[i] += first_[i] * in[i + 1];
    out[i + 1] += first_[i] * in[i];
  }
  if (!second_.empty()) {
    for (int i = 0; i + 2 < n; ++i) {
      out[i] += second_[i] * in[i + 2];
      out[i + 2] += second_[i] * in[i];
    }
  }
}

std::vector<std::vector<double>> FockMatrix::dense() const {
  const int n = dimension();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m[i][j] = (*this)(i, j);
  }
  return m;
}

double FockMatrix::max_abs_difference(const FockMatrix& other) const {
  if (other.dimension() != dimension()) {
    throw InvalidArgument("dimension mismatch");
  }
  double worst = 0.0;
  const int n = dimension();
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) {
      worst = std::max(worst, std::abs((*this)(i, j) - other(i, j)));
    }
  }
  return worst;
}

std::vector<double> interaction_diagonal(int particles, double interaction) {
  std::vector<double> d(particles + 1);
  for (int n = 0; n <= particles; ++n) {
    const double n1 = n;
    const double n2 = particles - n;
    d[n] = interaction * (n1 * (n1 - 1.0) + n2 * (n2 - 1.0));
  }
  return d;
}

std::vector<double> hopping_band(int particles) {
  std::vector<double> o(particles);
  for (int n = 0; n < particles; ++n) {
    o[n] = -std::sqrt(static_cast<double>(n + 1) * (particles - n));
  }
  return o;
}

FockMatrix hamiltonian_matrix(const SystemParams& p, double t) {
  validate(p);
  const double j = tunnelling_rate(p, t);
  auto band = hopping_band(p.particles);
  for (double& x : band) x *= j;
  return {interaction_diagonal(p.particles, p.interaction), std::move(band)};
}

double effective_bessel_factor(const SystemParams& p) {
  if (!p.driven()) return 1.0;
  if (!(p.drive_frequency > 0.0)) {
    throw InvalidArgument("effective Hamiltonian needs omega > 0");
  }
  return std::cyl_bessel_j(0.0, 4.0 * p.drive_amplitude / p.drive_frequency);
}

FockMatrix effective_hamiltonian_matrix(const SystemParams& p) {
  validate(p);
  if (!(p.drive_frequency > 0.0)) {
    throw InvalidArgument("effective Hamiltonian needs omega > 0");
  }
  const int big_n = p.particles;
  const double bessel = effective_bessel_factor(p);
  const double onsite = 0.25 * p.interaction * (3.0 + bessel);
  const double exchange = -0.25 * p.interaction * (1.0 - bessel);

  std::vector<double> diag(big_n + 1);
  for (int n = 0; n <= big_n; ++n) {
    const double n1 = n;
    const double n2 = big_n - n;
    // the -4 n1 n2 part of the exchange bracket sits on the diagonal
    diag[n] = onsite * (n1 * (n1 - 1.0) + n2 * (n2 - 1.0)) -
              4.0 * exchange * n1 * n2;
  }
  auto first = hopping_band(big_n);
  for (double& x : first) x *= p.tunnelling;

  // b1+ b1+ b2 b2 |n, N-n> = sqrt((n+1)(n+2)(N-n)(N-n-1)) |n+2, N-n-2>
  std::vector<double> second;
  if (big_n >= 2) {
    second.resize(big_n - 1);
    for (int n = 0; n + 2 <= big_n; ++n) {
      const double n2 = big_n - n;
      second[n] = exchange * std::sqrt((n + 1.0) * (n + 2.0) * n2 * (n2 - 1.0));
    }
  }
  return {std::move(diag), std::move(first), std::move(second)};
}

double expectation(const FockMatrix& m, std::span<const Complex> psi) {
  std::vector<Complex> tmp(psi.size());
  m.apply(psi, tmp);
  Complex acc = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) acc += std::conj(psi[i]) * tmp[i];
  return acc.real();
}

}  // namespace dimer
