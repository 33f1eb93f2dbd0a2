#pragma once

#include "vflip/chain.hpp"

namespace vflip {

/// Renewal-equation diffusion comparator: weights Ktilde_x and the symbol
/// Dhat(k) = sum_y (1 - cos(2 pi k y)) 2 Ktilde_y over the dual lattice.
struct DiffusionKernel {
  int L = 0;
  const ChainModel* model = nullptr;
  RealVec ktilde;  // indexed by displacement storage index
  RealVec dhat;    // indexed by dual storage index
};

/// K_{t,x} = 2 gamma (A_t^22(x))^2
double k_kernel(const ChainModel& model, int L, double t, int x);

/// Ktilde_x = (gamma/2) int_0^inf K_{s,x} ds; requires the theorem regime.
DiffusionKernel build_diffusion(const ChainModel& model, int L);

/// Spectral application of e^{-t D} to a lattice profile.
RealVec heat_semigroup(const DiffusionKernel& kernel, const RealVec& profile, double t);

struct DiffusionKineticReport {
  double k_min = 0.0;
  double dhat_ratio = 0.0;   // Dhat(k_min) / (2 pi k_min)^2
  double kappa_value = 0.0;  // kinetic conductivity at the same L
  double rel_deviation = 0.0;
  bool skipped_degenerate = false;  // both sides ~ 0 (flat band)
};

/// Compares the hydrodynamic small-k symbol against the kinetic conductivity.
DiffusionKineticReport diffusion_vs_kinetic(const DiffusionKernel& kernel,
                                            const ChainModel& model);

}  // namespace vflip
