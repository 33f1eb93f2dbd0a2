#include "vflip/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "vflip/util/quadrature.hpp"

namespace vflip {

namespace {
double bump_raw(double p) {
  double u = 2.0 * p;
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

double bump_norm() {
  // c fixed by int ghat^2 = 1 (adaptive Simpson, tol 1e-12)
  static const double n2 = adaptive_simpson(
      [](double p) { return bump_raw(p) * bump_raw(p); }, -0.5, 0.5, 1e-13);
  return 1.0 / std::sqrt(n2);
}
}  // namespace

double bump_ghat(double p) { return bump_norm() * bump_raw(p); }

double phi0_hat(double p) {
  double ap = std::abs(p);
  if (ap >= 1.0) return 0.0;
  // overlap of supports: q in [ap - 1/2, 1/2]
  double lo = ap - 0.5, hi = 0.5;
  return integrate_gl([&](double q) { return bump_ghat(q) * bump_ghat(ap - q); }, lo, hi,
                      160);
}

double AveragingKernel::exact(double xi) const {
  double acc = cosine_coeff[0];
  for (std::size_t m = 1; m < cosine_coeff.size(); ++m)
    acc += 2.0 * cosine_coeff[m] * std::cos(2.0 * M_PI * m * xi / period);
  return acc / period;
}

double AveragingKernel::derivative(double xi) const {
  double acc = 0.0;
  for (std::size_t m = 1; m < cosine_coeff.size(); ++m)
    acc -= 2.0 * cosine_coeff[m] * (2.0 * M_PI * m / period) *
           std::sin(2.0 * M_PI * m * xi / period);
  return acc / period;
}

double AveragingKernel::operator()(double xi) const {
  const int n = static_cast<int>(samples.size());
  double u = xi / dx;
  double fl = std::floor(u);
  double frac = u - fl;
  long long i0 = static_cast<long long>(fl);
  auto at = [&](long long i) {
    long long r = i % n;
    if (r < 0) r += n;
    return samples[static_cast<std::size_t>(r)];
  };
  // 4-point Lagrange through samples i0-1..i0+2
  double f_1 = at(i0 - 1), f0 = at(i0), f1 = at(i0 + 1), f2 = at(i0 + 2);
  double t = frac;
  return f_1 * (-t * (t - 1.0) * (t - 2.0) / 6.0) +
         f0 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
         f1 * (-(t + 1.0) * t * (t - 2.0) / 2.0) + f2 * ((t + 1.0) * t * (t - 1.0) / 6.0);
}

AveragingKernel build_kernel(double R, double period) {
  AveragingKernel k;
  k.rho_phi = 1.0;
  if (R < 2.0 * k.rho_phi)
    throw std::invalid_argument("build_kernel: require R >= 2*rho_phi");
  if (period <= R) throw std::invalid_argument("build_kernel: require L > R");
  k.R = R;
  k.period = period;
  int M = static_cast<int>(std::floor(period / R));
  k.cosine_coeff.resize(M + 1);
  for (int m = 0; m <= M; ++m) k.cosine_coeff[m] = phi0_hat(R * m / period);

  k.dx = std::min(R, 1.0) / 64.0;
  int nsamp = static_cast<int>(std::ceil(period / k.dx));
  k.dx = period / nsamp;  // commensurate with the period
  k.samples.resize(nsamp);
  for (int i = 0; i < nsamp; ++i) k.samples[i] = k.exact(i * k.dx);
  return k;
}

}  // namespace vflip
