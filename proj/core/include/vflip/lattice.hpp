#pragma once

#include <complex>
#include <vector>

namespace vflip {

using Complex = std::complex<double>;
using RealVec = std::vector<double>;
using ComplexVec = std::vector<Complex>;

/// Periodic lattice of L sites labelled {-(L-1)/2,...,(L-1)/2} for odd L and
/// {-L/2+1,...,L/2} for even L. Arrays are stored in mod-L order, i.e. entry
/// i holds the value at site(i), which makes the transforms plain DFTs of the
/// storage arrays. The dual lattice is k = n/L with n running over the sites.
class PeriodicLattice {
 public:
  explicit PeriodicLattice(int sites);

  int size() const { return L_; }

  /// site label for storage index i in [0, L)
  int site(int index) const { return index <= L_ / 2 ? index : index - L_; }

  /// map any integer into the lattice
  int wrap(long long x) const { return site(index_of(x)); }

  /// storage index of (possibly out-of-range) site x
  int index_of(long long x) const {
    long long r = x % L_;
    if (r < 0) r += L_;
    return static_cast<int>(r);
  }

  /// dual wavenumber for storage index i, in (-1/2, 1/2]
  double freq(int index) const { return static_cast<double>(site(index)) / L_; }

  // f_hat(k) = sum_x f(x) e^{-i 2 pi k x}; inverse carries the 1/L factor.
  // Radix-2 FFT for powers of two, direct O(L^2) otherwise (L <= 512).
  ComplexVec dft(const ComplexVec& f) const;
  ComplexVec idft(const ComplexVec& g) const;

  // reference path, always O(L^2)
  ComplexVec dft_direct(const ComplexVec& f) const;
  ComplexVec idft_direct(const ComplexVec& g) const;

  ComplexVec dft(const RealVec& f) const;

 private:
  void check_len(std::size_t n) const;
  int L_;
};

bool is_power_of_two(int n);

/// In-place radix-2 transform; inverse includes the 1/L normalization.
void fft_pow2(ComplexVec& a, bool inverse);

}  // namespace vflip
