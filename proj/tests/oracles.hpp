#pragma once

// Reference constructions used only by the tests. They share no code with
// the library: operators are built as dense matrices on the full two-mode
// space and projected onto fixed total number.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct Modes {
  int cutoff;  // occupations 0..cutoff per mode
  Mat b1, b2;

  explicit Modes(int n_max) : cutoff(n_max) {
    const int d = n_max + 1;
    Mat a = Mat::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    const Mat id = Mat::Identity(d, d);
    b1 = kron(a, id);
    b2 = kron(id, a);
  }

  static Mat kron(const Mat& x, const Mat& y) {
    Mat out(x.rows() * y.rows(), x.cols() * y.cols());
    for (int i = 0; i < x.rows(); ++i)
      for (int j = 0; j < x.cols(); ++j)
        out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
  }

  // product index of |n1, n2>
  [[nodiscard]] int index(int n1, int n2) const { return n1 * (cutoff + 1) + n2; }

  // Restriction to n1 + n2 = N, ordered by n1 = 0..N.
  [[nodiscard]] Mat project(const Mat& op, int particles) const {
    Mat out(particles + 1, particles + 1);
    for (int i = 0; i <= particles; ++i)
      for (int j = 0; j <= particles; ++j)
        out(i, j) = op(index(i, particles - i), index(j, particles - j));
    return out;
  }
};

inline Mat adj(const Mat& m) { return m.adjoint(); }

// U (b1+ b1+ b1 b1 + b2+ b2+ b2 b2) - J (b1+ b2 + b2+ b1)
inline Mat hamiltonian(int particles, double u, double j) {
  Modes m(particles);
  const Mat h = u * (adj(m.b1) * adj(m.b1) * m.b1 * m.b1 + adj(m.b2) * adj(m.b2) * m.b2 * m.b2) -
                j * (adj(m.b1) * m.b2 + adj(m.b2) * m.b1);
  return m.project(h, particles);
}

// Period-averaged Hamiltonian with Bessel factor bf.
inline Mat effective_hamiltonian(int particles, double u, double j0, double bf) {
  Modes m(particles);
  const Mat n1 = adj(m.b1) * m.b1;
  const Mat n2 = adj(m.b2) * m.b2;
  const Mat onsite = adj(m.b1) * adj(m.b1) * m.b1 * m.b1 + adj(m.b2) * adj(m.b2) * m.b2 * m.b2;
  const Mat pair = adj(m.b1) * adj(m.b1) * m.b2 * m.b2;
  const Mat h = 0.25 * u * (3.0 + bf) * onsite -
                0.25 * u * (1.0 - bf) * (pair + adj(pair) - 4.0 * n1 * n2) -
                j0 * (adj(m.b1) * m.b2 + adj(m.b2) * m.b1);
  return m.project(h, particles);
}

struct Spin {
  Mat jx, jy, jz;
};

// J+ = b2+ b1, Jz = (n2 - n1)/2.
inline Spin spin(int particles) {
  Modes m(particles);
  const Mat jp = adj(m.b2) * m.b1;
  const Complex i(0.0, 1.0);
  Spin s;
  s.jx = m.project(0.5 * (jp + adj(jp)), particles);
  s.jy = m.project((jp - adj(jp)) / (2.0 * i), particles);
  s.jz = m.project(0.5 * (adj(m.b2) * m.b2 - adj(m.b1) * m.b1), particles);
  return s;
}

inline double expect(const Mat& op, const Vec& psi) { return psi.dot(op * psi).real(); }

// Classical RK4 on a dense Hamiltonian H(t) = H0 + f(t) H1.
template <class Drive>
Vec rk4(const Mat& h0, const Mat& h1, Drive f, Vec psi, double t_end, double h) {
  const Complex mi(0.0, -1.0);
  const int steps = static_cast<int>(std::ceil(t_end / h));
  h = t_end / steps;
  double t = 0.0;
  auto rhs = [&](double tt, const Vec& v) -> Vec { return mi * ((h0 + f(tt) * h1) * v); };
  for (int k = 0; k < steps; ++k) {
    const Vec k1 = rhs(t, psi);
    const Vec k2 = rhs(t + h / 2, psi + (h / 2) * k1);
    const Vec k3 = rhs(t + h / 2, psi + (h / 2) * k2);
    const Vec k4 = rhs(t + h, psi + h * k3);
    psi += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  return psi;
}

// exp(-i H t) psi for Hermitian H via eigendecomposition.
inline Vec evolve_static(const Mat& hmat, const Vec& psi, double t) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hmat);
  const Complex mi(0.0, -1.0);
  Vec phase = (mi * t * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint() * psi;
}

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace oracle
