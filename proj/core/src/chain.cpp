#include "vflip/chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vflip/propagator.hpp"
#include "vflip/util/parallel.hpp"
#include "vflip/util/quadrature.hpp"

namespace vflip {

Potential Potential::nearest_neighbor(double omega0) {
  return Potential{{omega0 * omega0 + 2.0, -1.0}};
}

Potential Potential::onsite(double omega0) { return Potential{{omega0 * omega0}}; }

Potential Potential::next_to_nearest(double omega0) {
  return Potential{{omega0 * omega0 + 2.0, 0.0, -1.0}};
}

Potential Potential::from_pairs(const std::vector<std::pair<int, double>>& pairs) {
  int maxoff = 0;
  for (const auto& [off, c] : pairs) {
    if (off < 0)
      throw std::invalid_argument("Potential: offsets must be nonnegative; symmetry is implied");
    (void)c;
    maxoff = std::max(maxoff, off);
  }
  Potential p;
  p.coeff.assign(maxoff + 1, 0.0);
  for (const auto& [off, c] : pairs) p.coeff[off] += c;
  return p;
}

ChainModel::ChainModel(Potential pot, double gamma) : pot_(std::move(pot)), gamma_(gamma) {
  if (pot_.coeff.empty()) throw std::invalid_argument("ChainModel: empty potential");
  if (gamma_ <= 0.0) throw std::invalid_argument("ChainModel: gamma must be positive");
  const int grid = 4096;
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < grid; ++i) {
    double v = phi_hat(static_cast<double>(i) / grid - 0.5);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo <= 0.0)
    throw std::invalid_argument("ChainModel: potential is not pinning (phi_hat <= 0)");
  omega0_ = std::sqrt(lo);
  omega_max_ = std::sqrt(hi);
}

double ChainModel::phi_hat(double k) const {
  double acc = pot_.coeff[0];
  for (int d = 1; d <= pot_.half_range(); ++d)
    acc += 2.0 * pot_.coeff[d] * std::cos(2.0 * M_PI * k * d);
  return acc;
}

double ChainModel::phi_hat_deriv(double k) const {
  double acc = 0.0;
  for (int d = 1; d <= pot_.half_range(); ++d)
    acc -= 4.0 * M_PI * d * pot_.coeff[d] * std::sin(2.0 * M_PI * k * d);
  return acc;
}

std::vector<double> ChainModel::build_phi_matrix(int L) const {
  if (L < pot_.r_phi())
    throw std::invalid_argument("build_phi_matrix: L must be at least r_phi");
  PeriodicLattice lat(L);
  std::vector<double> m(static_cast<std::size_t>(L) * L, 0.0);
  for (int x = 0; x < L; ++x)
    for (int y = 0; y < L; ++y)
      m[static_cast<std::size_t>(x) * L + y] = pot_.at(lat.wrap(static_cast<long long>(lat.site(x)) - lat.site(y)));
  return m;
}

std::string AssumptionReport::summary() const {
  std::ostringstream os;
  auto line = [&](const char* name, bool ok) {
    os << name << ": " << (ok ? "pass" : "FAIL") << "\n";
  };
  line("1 exponential decay (finite range)", exponential_decay);
  line("2 symmetry", symmetric);
  line("3 pinning", pinned);
  os << "  omega0 = " << omega0 << ", omega_max = " << omega_max << "\n";
  line("4 noise dominates (gamma > 2 max omega)", noise_dominates);
  os << "  gamma = " << gamma << ", 2*omega_max = " << 2.0 * omega_max << "\n";
  line("5 nondegenerate harmonic forces", nondegenerate);
  for (const auto& [eps, ce] : c_eps_table)
    os << "  eps = " << eps << ": C_eps = " << ce << (ce > pass_threshold ? "" : "  (below threshold)")
       << "\n";
  return os.str();
}

namespace {

// min over the k0 grid of the nondegeneracy integral, production path:
// dyadic GL windows in t, uniform (spectrally accurate) grid in k.
double nondegeneracy_minimum(const ChainModel& model, double eps, int threads) {
  const int nk0 = 64;
  const int nk = 256;
  const double T = quadrature_horizon(model, 1e-10);
  const double w0 = 0.5 / model.gamma();
  std::vector<double> vals(nk0);
  parallel_for(
      nk0,
      [&](std::int64_t i) {
        double k0 = eps + (0.5 - eps) * static_cast<double>(i) / (nk0 - 1);
        vals[i] = integrate_dyadic(
            [&](double t) {
              double acc = 0.0;
              for (int j = 0; j < nk; ++j) {
                double k = static_cast<double>(j) / nk;
                double d = a_hat(model, t, k + 0.5 * k0)(1, 1) -
                           a_hat(model, t, k - 0.5 * k0)(1, 1);
                acc += d * d;
              }
              return acc / nk;
            },
            w0, T);
      },
      threads);
  return *std::min_element(vals.begin(), vals.end());
}

}  // namespace

AssumptionReport validate_assumptions(const ChainModel& model, int pinning_grid,
                                      const std::vector<double>& eps_list,
                                      const std::vector<int>& lattice_sizes, int threads) {
  AssumptionReport rep;
  rep.gamma = model.gamma();
  rep.exponential_decay = true;  // finite range by construction
  rep.symmetric = true;          // stored as one-sided coefficients

  double lo = 1e300, hi = -1e300;
  auto scan = [&](double k) {
    double v = model.phi_hat(k);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (int i = 0; i < pinning_grid; ++i) scan(static_cast<double>(i) / pinning_grid - 0.5);
  for (int L : lattice_sizes) {
    PeriodicLattice lat(L);
    for (int n = 0; n < L; ++n) scan(lat.freq(n));
  }
  rep.pinned = lo > 0.0;
  rep.omega0 = lo > 0.0 ? std::sqrt(lo) : 0.0;
  rep.omega_max = hi > 0.0 ? std::sqrt(hi) : 0.0;
  rep.noise_dominates = model.gamma() > 2.0 * rep.omega_max;

  rep.nondegenerate = rep.noise_dominates;  // item 5 needs the decay rate
  if (rep.noise_dominates) {
    for (double eps : eps_list) {
      double ce = nondegeneracy_minimum(model, eps, threads);
      rep.c_eps_table[eps] = ce;
      if (!(ce > rep.pass_threshold)) rep.nondegenerate = false;
    }
  }
  return rep;
}

}  // namespace vflip
