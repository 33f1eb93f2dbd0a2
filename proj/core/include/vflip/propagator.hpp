#pragma once

#include <array>
#include <complex>
#include <vector>

#include "vflip/chain.hpp"

namespace vflip {

/// 2x2 real matrix, row-major
struct Mat2 {
  std::array<double, 4> a{};
  double& operator()(int i, int j) { return a[2 * i + j]; }
  double operator()(int i, int j) const { return a[2 * i + j]; }
  static Mat2 identity() { return {{1.0, 0.0, 0.0, 1.0}}; }
  Mat2 transpose() const { return {{a[0], a[2], a[1], a[3]}}; }
  double det() const { return a[0] * a[3] - a[1] * a[2]; }
  double max_abs() const;
};
Mat2 operator*(const Mat2& x, const Mat2& y);
Mat2 operator*(double s, const Mat2& x);
Mat2 operator+(const Mat2& x, const Mat2& y);
Mat2 operator-(const Mat2& x, const Mat2& y);

struct PropagatorSymbol {
  double k = 0.0;
  Complex Omega;      // (gamma/2) sqrt(1 - (2 omega/gamma)^2); imaginary if gamma < 2 omega
  Complex mu_plus;    // gamma/2 + Omega
  Complex mu_minus;   // gamma/2 - Omega
};

PropagatorSymbol make_symbol(const ChainModel& model, double k);

/// Closed-form semigroup symbol Ahat_t(k) of e^{-t M_gamma}; real in both
/// regimes (Omega real or purely imaginary). Throws for t < 0.
Mat2 a_hat(const ChainModel& model, double t, double k);

/// Analytic k-derivative of a_hat (chain rule through Omega(k)).
Mat2 a_hat_dk(const ChainModel& model, double t, double k);

/// Real-space kernel A_t(x) over the lattice, entrywise inverse dft of a_hat.
std::vector<Mat2> a_real(const ChainModel& model, double t, int L);

/// Slowest decay rate delta0 = gamma/2 - max_k Re Omega(k); requires the
/// theorem regime gamma > 2 omega_max.
double decay_rate(const ChainModel& model);

/// Time of truncation T with e^{-2 delta0 T} * (1 + 2 delta0 T)^2 below rel_tail.
double quadrature_horizon(const ChainModel& model, double rel_tail = 1e-12);

/// q(k) = 2 gamma int_0^inf Ahat_t^22 d_k Ahat_t^21 dt, dyadic Gauss-Legendre.
double q_numeric(const ChainModel& model, double k);

/// closed form omega'(k) / (gamma omega(k))
double q_closed(const ChainModel& model, double k);

Mat2 u0_closed(const ChainModel& model, double k);   // diag(omega^-2, 1)
Mat2 u1_closed(const ChainModel& model, double k);   // -(v/omega) [[w^-2, -1/g],[1/g, 0]]
Mat2 u0_quadrature(const ChainModel& model, double k);  // 2 gamma int A^T P2 A
Mat2 u1_quadrature(const ChainModel& model, double k);  // 2 gamma int (1/2pi) dA^T P2 A

struct StationaryMatrices {
  const ChainModel* model = nullptr;
  double max_deviation = 0.0;  // closed form vs quadrature over the check grid
  Mat2 u0(double k) const { return u0_closed(*model, k); }
  Mat2 u1(double k) const { return u1_closed(*model, k); }
};

/// Builds the closed forms and cross-checks them against the time-integral
/// definitions on a k grid; throws if the deviation exceeds 1e-8.
StationaryMatrices stationary_matrices(const ChainModel& model, int check_points = 33);

}  // namespace vflip
