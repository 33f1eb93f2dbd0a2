#include "vflip/propagator.hpp"

#include <cmath>
#include <stdexcept>

#include "vflip/util/quadrature.hpp"

namespace vflip {

double Mat2::max_abs() const {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

Mat2 operator*(const Mat2& x, const Mat2& y) {
  Mat2 r;
  r.a[0] = x.a[0] * y.a[0] + x.a[1] * y.a[2];
  r.a[1] = x.a[0] * y.a[1] + x.a[1] * y.a[3];
  r.a[2] = x.a[2] * y.a[0] + x.a[3] * y.a[2];
  r.a[3] = x.a[2] * y.a[1] + x.a[3] * y.a[3];
  return r;
}
Mat2 operator*(double s, const Mat2& x) {
  return {{s * x.a[0], s * x.a[1], s * x.a[2], s * x.a[3]}};
}
Mat2 operator+(const Mat2& x, const Mat2& y) {
  return {{x.a[0] + y.a[0], x.a[1] + y.a[1], x.a[2] + y.a[2], x.a[3] + y.a[3]}};
}
Mat2 operator-(const Mat2& x, const Mat2& y) {
  return {{x.a[0] - y.a[0], x.a[1] - y.a[1], x.a[2] - y.a[2], x.a[3] - y.a[3]}};
}

PropagatorSymbol make_symbol(const ChainModel& model, double k) {
  PropagatorSymbol s;
  s.k = k;
  double g = model.gamma();
  double w = model.omega(k);
  s.Omega = 0.5 * std::sqrt(Complex(g * g - 4.0 * w * w, 0.0));
  s.mu_plus = 0.5 * g + s.Omega;
  s.mu_minus = 0.5 * g - s.Omega;
  return s;
}

namespace {

// s = sinh(Om t)/Om and c = cosh(Om t); both real for Om real or imaginary.
// Series for s when |Om t| is small (removable singularity at Om = 0).
void sinhc_cosh(Complex Om, double t, double& s, double& c) {
  Complex u = Om * t;
  if (std::abs(u) < 0.5) {
    Complex z = u * u;
    Complex acc(1.0, 0.0);
    Complex term(1.0, 0.0);
    for (int m = 1; m <= 10; ++m) {
      term *= z / static_cast<double>(2 * m * (2 * m + 1));
      acc += term;
    }
    s = (t * acc).real();
    c = std::cosh(u).real();
  } else {
    s = (std::sinh(u) / Om).real();
    c = std::cosh(u).real();
  }
}

// B = (t cosh(Om t) - sinh(Om t)/Om) / Om^2, series t^3 sum_{m>=1} 2m u^{2(m-1)}/(2m+1)!
double tcosh_minus_sinhc_over_om2(Complex Om, double t) {
  Complex u = Om * t;
  if (std::abs(u) < 0.5) {
    Complex z = u * u;
    Complex acc(1.0 / 3.0, 0.0);
    Complex pw(1.0, 0.0);
    double fact = 6.0;  // (2m+1)! at m = 1
    for (int m = 2; m <= 10; ++m) {
      pw *= z;
      fact *= (2.0 * m) * (2.0 * m + 1.0);
      acc += pw * (2.0 * m / fact);
    }
    return (t * t * t * acc).real();
  }
  double s, c;
  sinhc_cosh(Om, t, s, c);
  return ((t * c - s) / (Om * Om)).real();
}

}  // namespace

Mat2 a_hat(const ChainModel& model, double t, double k) {
  if (t < 0.0) throw std::invalid_argument("a_hat: t must be nonnegative");
  double g = model.gamma();
  double w2 = model.phi_hat(k);
  Complex Om = 0.5 * std::sqrt(Complex(g * g - 4.0 * w2, 0.0));
  double s, c;
  sinhc_cosh(Om, t, s, c);
  double e = std::exp(-0.5 * g * t);
  Mat2 r;
  r(0, 0) = e * (0.5 * g * s + c);
  r(0, 1) = -e * w2 * s;
  r(1, 0) = e * s;
  r(1, 1) = e * (-0.5 * g * s + c);
  return r;
}

Mat2 a_hat_dk(const ChainModel& model, double t, double k) {
  if (t < 0.0) throw std::invalid_argument("a_hat_dk: t must be nonnegative");
  double g = model.gamma();
  double w2 = model.phi_hat(k);
  double dw2 = model.phi_hat_deriv(k);  // d(omega^2)/dk = 2 omega omega'
  Complex Om = 0.5 * std::sqrt(Complex(g * g - 4.0 * w2, 0.0));
  double s, c;
  sinhc_cosh(Om, t, s, c);
  double B = tcosh_minus_sinhc_over_om2(Om, t);
  // Om' = -(omega omega')/Om, so ds/dk = Om' (t c - s)/Om = -(dw2/2) B
  // and dc/dk = Om' t sinh = -(dw2/2) t s.
  double ds = -0.5 * dw2 * B;
  double dc = -0.5 * dw2 * t * s;
  double e = std::exp(-0.5 * g * t);
  Mat2 r;
  r(0, 0) = e * (0.5 * g * ds + dc);
  r(0, 1) = -e * (dw2 * s + w2 * ds);
  r(1, 0) = e * ds;
  r(1, 1) = e * (-0.5 * g * ds + dc);
  return r;
}

std::vector<Mat2> a_real(const ChainModel& model, double t, int L) {
  PeriodicLattice lat(L);
  std::array<ComplexVec, 4> comp;
  for (auto& c : comp) c.resize(L);
  for (int n = 0; n < L; ++n) {
    Mat2 m = a_hat(model, t, lat.freq(n));
    for (int e = 0; e < 4; ++e) comp[e][n] = m.a[e];
  }
  std::vector<Mat2> out(L);
  for (int e = 0; e < 4; ++e) {
    ComplexVec real_space = lat.idft(comp[e]);
    for (int x = 0; x < L; ++x) out[x].a[e] = real_space[x].real();
  }
  return out;
}

double decay_rate(const ChainModel& model) {
  if (!model.noise_dominates())
    throw std::invalid_argument("decay_rate: requires gamma > 2 max omega");
  double g = model.gamma();
  double w0 = model.omega0();
  double om_max = 0.5 * std::sqrt(g * g - 4.0 * w0 * w0);
  return 0.5 * g - om_max;
}

double quadrature_horizon(const ChainModel& model, double rel_tail) {
  double d0 = decay_rate(model);
  double T = std::log(1.0 / rel_tail) / (2.0 * d0);
  for (int i = 0; i < 4; ++i)
    T = (std::log(1.0 / rel_tail) + 2.0 * std::log1p(2.0 * d0 * T)) / (2.0 * d0);
  return T;
}

double q_numeric(const ChainModel& model, double k) {
  double T = quadrature_horizon(model);
  double w0 = 0.5 / model.gamma();
  double g = model.gamma();
  return integrate_dyadic(
      [&](double t) {
        return 2.0 * g * a_hat(model, t, k)(1, 1) * a_hat_dk(model, t, k)(1, 0);
      },
      w0, T);
}

double q_closed(const ChainModel& model, double k) {
  return model.omega_deriv(k) / (model.gamma() * model.omega(k));
}

Mat2 u0_closed(const ChainModel& model, double k) {
  double w2 = model.phi_hat(k);
  return {{1.0 / w2, 0.0, 0.0, 1.0}};
}

Mat2 u1_closed(const ChainModel& model, double k) {
  double w = model.omega(k);
  double v = model.group_velocity(k);
  double g = model.gamma();
  double f = -v / w;
  return {{f / (w * w), -f / g, f / g, 0.0}};
}

namespace {
Mat2 u_quadrature(const ChainModel& model, double k, bool derivative) {
  double T = quadrature_horizon(model);
  double w0 = 0.5 / model.gamma();
  double g = model.gamma();
  double acc[4] = {0, 0, 0, 0};
  integrate_dyadic_vec(
      [&](double t, double* out) {
        Mat2 A = a_hat(model, t, k);
        Mat2 B = derivative ? a_hat_dk(model, t, k) : A;
        // (B^T P2 A)_{ij} = B_{2i} A_{2j}
        out[0] = B(1, 0) * A(1, 0);
        out[1] = B(1, 0) * A(1, 1);
        out[2] = B(1, 1) * A(1, 0);
        out[3] = B(1, 1) * A(1, 1);
      },
      4, w0, T, acc);
  double scale = derivative ? g / M_PI : 2.0 * g;
  return {{scale * acc[0], scale * acc[1], scale * acc[2], scale * acc[3]}};
}
}  // namespace

Mat2 u0_quadrature(const ChainModel& model, double k) {
  return u_quadrature(model, k, false);
}

Mat2 u1_quadrature(const ChainModel& model, double k) {
  return u_quadrature(model, k, true);
}

StationaryMatrices stationary_matrices(const ChainModel& model, int check_points) {
  StationaryMatrices sm;
  sm.model = &model;
  double dev = 0.0;
  for (int i = 0; i < check_points; ++i) {
    double k = -0.5 + (i + 0.5) / check_points;
    dev = std::max(dev, (u0_quadrature(model, k) - u0_closed(model, k)).max_abs());
    dev = std::max(dev, (u1_quadrature(model, k) - u1_closed(model, k)).max_abs());
  }
  sm.max_deviation = dev;
  if (dev > 1e-8)
    throw std::runtime_error("stationary_matrices: quadrature disagrees with closed form");
  return sm;
}

}  // namespace vflip
