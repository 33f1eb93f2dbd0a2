#pragma once

#include <cstdint>
#include <functional>

#include "vflip/chain.hpp"
#include "vflip/covariance.hpp"
#include "vflip/util/philox.hpp"

namespace vflip {

struct Trajectory {
  double t = 0.0;
  RealVec q, p;
  std::uint64_t flips = 0;
};

/// Exact harmonic flow over duration tau (gamma = 0), evaluated spectrally:
/// qhat -> cos(w tau) qhat + sin(w tau)/w phat, phat -> -w sin(w tau) qhat + cos(w tau) phat.
void harmonic_step(const ChainModel& model, Trajectory& traj, double tau);

/// Negate the momentum at one site.
void flip_event(Trajectory& traj, int site);

using InitialSampler = std::function<void(Philox&, RealVec& q, RealVec& p)>;

/// Draw (q, p) as a centered Gaussian with the covariance of `law`
/// (spectral square root of the assembled 2L x 2L matrix).
InitialSampler gaussian_sampler(const CovarianceState& law);

/// Event-driven simulation of the flip process: each site carries an
/// independent Poisson clock of rate gamma/2 (so the total event rate is
/// gamma L / 2, matching the moment equations), with the exact harmonic flow
/// between events.
Trajectory simulate(const ChainModel& model, int L, const InitialSampler& init,
                    double t_end, std::uint64_t seed, std::uint64_t stream = 0);

struct MomentEstimate {
  int L = 0;
  long N = 0;
  RealVec c11, c12, c22;      // empirical second moments (c21 = c12^T)
  RealVec se11, se12, se22;   // per-entry standard errors

  RealVec temperature() const;
  RealVec temperature_se() const;
};

/// Empirical second moments over N independent realizations, each sampled
/// from `law` at t = 0 and simulated to t_end. Realizations are keyed by
/// (seed, realization index); the reduction runs over fixed-size blocks
/// combined in index order, so results do not depend on the thread count.
MomentEstimate estimate_covariance(const ChainModel& model, const CovarianceState& law,
                                   double t_end, long N, std::uint64_t seed,
                                   int threads = 0);

/// Per-realization summaries (seed, realization, energy drift, flip count).
struct RealizationSummary {
  std::uint64_t realization = 0;
  double energy_initial = 0.0;
  double energy_drift_rel = 0.0;
  std::uint64_t flips = 0;
};
std::vector<RealizationSummary> run_realization_summaries(const ChainModel& model,
                                                          const CovarianceState& law,
                                                          double t_end, long N,
                                                          std::uint64_t seed);

double trajectory_energy(const ChainModel& model, const Trajectory& traj);

}  // namespace vflip
