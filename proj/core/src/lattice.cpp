#include "vflip/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace vflip {

PeriodicLattice::PeriodicLattice(int sites) : L_(sites) {
  if (sites < 1) throw std::invalid_argument("PeriodicLattice: L must be positive");
}

void PeriodicLattice::check_len(std::size_t n) const {
  if (static_cast<int>(n) != L_)
    throw std::invalid_argument("lattice transform: array length does not match L");
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_pow2(ComplexVec& a, bool inverse) {
  const int n = static_cast<int>(a.size());
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * M_PI / len * (inverse ? 1.0 : -1.0);
    Complex wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (int j = 0; j < len / 2; ++j) {
        Complex u = a[i + j];
        Complex v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= n;
}

ComplexVec PeriodicLattice::dft(const ComplexVec& f) const {
  check_len(f.size());
  if (is_power_of_two(L_)) {
    ComplexVec a = f;
    fft_pow2(a, false);
    return a;
  }
  return dft_direct(f);
}

ComplexVec PeriodicLattice::idft(const ComplexVec& g) const {
  check_len(g.size());
  if (is_power_of_two(L_)) {
    ComplexVec a = g;
    fft_pow2(a, true);
    return a;
  }
  return idft_direct(g);
}

ComplexVec PeriodicLattice::dft(const RealVec& f) const {
  check_len(f.size());
  ComplexVec c(f.begin(), f.end());
  return dft(c);
}

ComplexVec PeriodicLattice::dft_direct(const ComplexVec& f) const {
  check_len(f.size());
  if (L_ > 512 && !is_power_of_two(L_))
    throw std::invalid_argument("direct DFT limited to L <= 512 for non powers of two");
  ComplexVec out(L_);
  for (int n = 0; n < L_; ++n) {
    Complex acc(0.0, 0.0);
    for (int m = 0; m < L_; ++m) {
      double ang = -2.0 * M_PI * static_cast<double>((static_cast<long long>(n) * m) % L_) / L_;
      acc += f[m] * Complex(std::cos(ang), std::sin(ang));
    }
    out[n] = acc;
  }
  return out;
}

ComplexVec PeriodicLattice::idft_direct(const ComplexVec& g) const {
  check_len(g.size());
  ComplexVec out(L_);
  for (int m = 0; m < L_; ++m) {
    Complex acc(0.0, 0.0);
    for (int n = 0; n < L_; ++n) {
      double ang = 2.0 * M_PI * static_cast<double>((static_cast<long long>(n) * m) % L_) / L_;
      acc += g[n] * Complex(std::cos(ang), std::sin(ang));
    }
    out[m] = acc / static_cast<double>(L_);
  }
  return out;
}

}  // namespace vflip
