#pragma once

#include <vector>

namespace vflip {

/// Lattice averaging kernel phi(xi) = R^-1 sum_n phi0((xi - L n)/R) built from
/// phi0 = g^2 where ghat is a smooth real even bump supported in [-1/2, 1/2]
/// with integral of ghat^2 equal to 1. Hence rho_phi = 1 and phi0hat = ghat*ghat
/// is supported in [-1, 1], which makes the periodization a finite cosine sum:
/// the kernel identities (lattice normalization, discrete Fourier transform)
/// hold exactly up to the tabulation error.
struct AveragingKernel {
  double R = 0.0;
  double rho_phi = 1.0;
  double period = 0.0;                 // L
  std::vector<double> samples;         // phi tabulated on [0, period)
  double dx = 0.0;                     // sample spacing, min(R,1)/64
  std::vector<double> cosine_coeff;    // phi0hat(R m / L), m = 0..M

  /// cubic (4-point) interpolation on the tabulated grid, L-periodic
  double operator()(double xi) const;

  /// analytic derivative from the cosine representation
  double derivative(double xi) const;

  /// exact evaluation from the cosine representation (tabulation source)
  double exact(double xi) const;
};

/// Throws if R < 2*rho_phi or period <= R.
AveragingKernel build_kernel(double R, double period);

/// The normalized bump ghat(p) = c exp(-1/(1-(2p)^2)) on |p| < 1/2.
double bump_ghat(double p);

/// phi0hat(p) = (ghat * ghat)(p), supported in [-1, 1], phi0hat(0) = 1.
double phi0_hat(double p);

}  // namespace vflip
