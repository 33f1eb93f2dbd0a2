#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vflip/lattice.hpp"

namespace vflip {

/// Finite-range symmetric interaction. coeff[d] holds Phi(d) for
/// d = 0..(r_phi-1)/2; negative offsets follow by symmetry.
struct Potential {
  std::vector<double> coeff;

  int half_range() const { return static_cast<int>(coeff.size()) - 1; }
  int r_phi() const { return 2 * half_range() + 1; }

  double at(long long x) const {
    long long a = x < 0 ? -x : x;
    return a <= half_range() ? coeff[static_cast<std::size_t>(a)] : 0.0;
  }

  /// pinned nearest-neighbor chain: Phi(0) = omega0^2 + 2, Phi(+-1) = -1,
  /// giving omega(k)^2 = omega0^2 + 4 sin^2(pi k)
  static Potential nearest_neighbor(double omega0);

  /// flat band Phi(0) = omega0^2
  static Potential onsite(double omega0);

  /// next-to-nearest-only coupling; on even L the chain decouples into two
  /// independent sublattices (nondegeneracy regression fixture)
  static Potential next_to_nearest(double omega0);

  /// (offset, coefficient) pairs with offsets >= 0, symmetry completed
  static Potential from_pairs(const std::vector<std::pair<int, double>>& pairs);
};

class ChainModel {
 public:
  ChainModel(Potential pot, double gamma);

  const Potential& potential() const { return pot_; }
  double gamma() const { return gamma_; }
  double omega0() const { return omega0_; }
  double omega_max() const { return omega_max_; }

  double phi_hat(double k) const;
  double phi_hat_deriv(double k) const;

  double omega(double k) const { return std::sqrt(phi_hat(k)); }
  double omega_deriv(double k) const { return phi_hat_deriv(k) / (2.0 * omega(k)); }
  double group_velocity(double k) const { return omega_deriv(k) / (2.0 * M_PI); }

  /// theorem regime gamma > 2 max omega
  bool noise_dominates() const { return gamma_ > 2.0 * omega_max_; }

  /// dense circulant (Phi_L)_{x',x} = Phi([x'-x]_L), row-major; throws if L < r_phi
  std::vector<double> build_phi_matrix(int L) const;

 private:
  Potential pot_;
  double gamma_;
  double omega0_;
  double omega_max_;
};

struct AssumptionReport {
  bool exponential_decay = false;  // item 1, finite range
  bool symmetric = false;          // item 2
  bool pinned = false;             // item 3
  bool noise_dominates = false;    // item 4
  bool nondegenerate = false;      // item 5
  std::map<double, double> c_eps_table;  // eps -> min of the double integral
  double pass_threshold = 1e-8;
  double omega0 = 0.0, omega_max = 0.0, gamma = 0.0;

  bool all_pass() const {
    return exponential_decay && symmetric && pinned && noise_dominates && nondegenerate;
  }
  std::string summary() const;
};

/// Checks all five items. Item 5 evaluates, for each eps, the minimum over a
/// 64-point k0 grid covering eps <= |k0| <= 1/2 of
///   int_0^inf dt int_T dk (F_t(k+k0/2) - F_t(k-k0/2))^2,  F_t = Ahat_t^22,
/// truncating the time integral once the e^{-2 delta0 t} tail is below 1e-10.
AssumptionReport validate_assumptions(const ChainModel& model, int pinning_grid = 4096,
                                      const std::vector<double>& eps_list = {0.05},
                                      const std::vector<int>& lattice_sizes = {},
                                      int threads = 0);

}  // namespace vflip
