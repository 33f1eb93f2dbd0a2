#pragma once

#include <string>
#include <vector>

#include "vflip/chain.hpp"
#include "vflip/propagator.hpp"

namespace vflip {

/// Second-moment state. The 2L x 2L matrix is stored as the three independent
/// L x L blocks (c21 = c12^T is derived, never stored). Index 1 = position,
/// 2 = momentum; blocks are row-major over storage order.
struct CovarianceState {
  double t = 0.0;
  int L = 0;
  RealVec c11, c12, c22;

  double at(int i, int j, int x, int y) const;  // full matrix accessor, i,j in {0,1}
  void resymmetrize();                          // average c11, c22 with transposes
};

struct MeanState {
  double t = 0.0;
  RealVec qbar, pbar;
};

/// Translation-invariant drift operator with blocks [[0, Phi_L],[-I, gamma I]].
struct MGammaMatrix {
  const ChainModel* model = nullptr;
  int L = 0;
  /// Fourier symbol [[0, omega^2],[-1, gamma]]
  Mat2 symbol(double k) const;
  /// dense 2L x 2L (ordering: q block then p block), for small-L tests
  std::vector<double> dense() const;
};

/// Quadratic form blockdiag(Phi_L, Id) defining H_L = X^T G_L X / 2.
struct EnergyForm {
  const ChainModel* model = nullptr;
  int L = 0;
  std::vector<double> dense() const;
};

CovarianceState gibbs_state(const ChainModel& model, int L, double T);
CovarianceState modulated_state(const ChainModel& model, int L, const RealVec& profile);

/// rhs of d/dt C = -M^T C - C M + 2 gamma G(C); returned as a CovarianceState
/// holding the derivative blocks (t field = state.t).
CovarianceState covariance_rhs(const ChainModel& model, const CovarianceState& state);

MeanState evolve_means(const ChainModel& model, const MeanState& means, double t);

/// One classical RK4 step; h must satisfy h <= 0.1/max(gamma, 2 omega_max).
CovarianceState step_rk4(const ChainModel& model, const CovarianceState& state, double h);
CovarianceState evolve_rk4(const ChainModel& model, CovarianceState state, double t_end,
                           double h, int threads = 0);

enum class DuhamelClosure {
  collocation,          // within-step Chebyshev collocation of the temperature
  predictor_corrector,  // frozen predictor + trapezoid corrector
};

/// Fourier-block Duhamel scheme: exact two-sided semigroup plus the
/// self-consistent temperature source, O(L^2) per step. h must satisfy
/// h <= 0.5/gamma.
CovarianceState evolve_duhamel(const ChainModel& model, const CovarianceState& state,
                               double t_end, double h,
                               DuhamelClosure closure = DuhamelClosure::collocation,
                               int threads = 0);

RealVec temperature(const CovarianceState& state);
double total_energy(const ChainModel& model, const CovarianceState& state);

/// Smallest eigenvalue of the full 2L x 2L matrix (positivity diagnostic).
double min_eigenvalue(const CovarianceState& state);

// Binary snapshot: magic "VFCOV001", u64 L, f64 t, f64 gamma, u64 ncoef,
// ncoef * f64 potential coefficients, then c11, c12, c22 row-major f64 (LE).
void write_snapshot(const std::string& path, const ChainModel& model,
                    const CovarianceState& state);
CovarianceState read_snapshot(const std::string& path, Potential* pot_out = nullptr,
                              double* gamma_out = nullptr);

void write_temperature_csv(const std::string& path, const CovarianceState& state,
                           const std::vector<std::string>& header_comments = {});

}  // namespace vflip
