#include "vflip/trajectory.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "vflip/util/parallel.hpp"

namespace vflip {

void harmonic_step(const ChainModel& model, Trajectory& traj, double tau) {
  if (tau < 0.0) throw std::invalid_argument("harmonic_step: tau must be nonnegative");
  if (tau == 0.0) return;
  int L = static_cast<int>(traj.q.size());
  PeriodicLattice lat(L);
  ComplexVec qh = lat.dft(traj.q);
  ComplexVec ph = lat.dft(traj.p);
  for (int n = 0; n < L; ++n) {
    double w = model.omega(lat.freq(n));
    double c = std::cos(w * tau), s = std::sin(w * tau);
    Complex q = qh[n], p = ph[n];
    qh[n] = c * q + s / w * p;
    ph[n] = -w * s * q + c * p;
  }
  ComplexVec q = lat.idft(qh), p = lat.idft(ph);
  for (int x = 0; x < L; ++x) {
    traj.q[x] = q[x].real();
    traj.p[x] = p[x].real();
  }
  traj.t += tau;
}

void flip_event(Trajectory& traj, int site) {
  if (site < 0 || site >= static_cast<int>(traj.p.size()))
    throw std::invalid_argument("flip_event: site out of range");
  traj.p[site] = -traj.p[site];
  ++traj.flips;
}

InitialSampler gaussian_sampler(const CovarianceState& law) {
  int L = law.L;
  auto sqrt_factor = std::make_shared<Eigen::MatrixXd>();
  Eigen::MatrixXd C(2 * L, 2 * L);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int x = 0; x < L; ++x)
        for (int y = 0; y < L; ++y) C(i * L + x, j * L + y) = law.at(i, j, x, y);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (C + C.transpose()));
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  *sqrt_factor = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return [L, sqrt_factor](Philox& rng, RealVec& q, RealVec& p) {
    Eigen::VectorXd xi(2 * L);
    for (int i = 0; i < 2 * L; ++i) xi(i) = rng.gaussian();
    Eigen::VectorXd z = (*sqrt_factor) * xi;
    q.resize(L);
    p.resize(L);
    for (int x = 0; x < L; ++x) {
      q[x] = z(x);
      p[x] = z(L + x);
    }
  };
}

Trajectory simulate(const ChainModel& model, int L, const InitialSampler& init,
                    double t_end, std::uint64_t seed, std::uint64_t stream) {
  if (t_end < 0.0) throw std::invalid_argument("simulate: t_end must be nonnegative");
  Philox rng(seed, stream);
  Trajectory traj;
  traj.q.resize(L);
  traj.p.resize(L);
  init(rng, traj.q, traj.p);
  double rate = 0.5 * model.gamma() * L;
  while (true) {
    double wait = rng.exponential(rate);
    if (traj.t + wait >= t_end) {
      harmonic_step(model, traj, t_end - traj.t);
      traj.t = t_end;
      return traj;
    }
    harmonic_step(model, traj, wait);
    int site = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(L));
    flip_event(traj, site);
  }
}

double trajectory_energy(const ChainModel& model, const Trajectory& traj) {
  int L = static_cast<int>(traj.q.size());
  const Potential& pot = model.potential();
  PeriodicLattice lat(L);
  double e = 0.0;
  for (int x = 0; x < L; ++x) {
    e += 0.5 * traj.p[x] * traj.p[x];
    for (int d = -pot.half_range(); d <= pot.half_range(); ++d)
      e += 0.5 * traj.q[x] * pot.at(d) * traj.q[lat.index_of(x + d)];
  }
  return e;
}

RealVec MomentEstimate::temperature() const {
  RealVec T(L);
  for (int x = 0; x < L; ++x) T[x] = c22[static_cast<std::size_t>(x) * L + x];
  return T;
}

RealVec MomentEstimate::temperature_se() const {
  RealVec T(L);
  for (int x = 0; x < L; ++x) T[x] = se22[static_cast<std::size_t>(x) * L + x];
  return T;
}

MomentEstimate estimate_covariance(const ChainModel& model, const CovarianceState& law,
                                   double t_end, long N, std::uint64_t seed, int threads) {
  if (N < 2) throw std::invalid_argument("estimate_covariance: need N >= 2");
  int L = law.L;
  std::size_t n2 = static_cast<std::size_t>(L) * L;
  InitialSampler init = gaussian_sampler(law);

  const long block = 256;
  long nblocks = (N + block - 1) / block;
  // per-block partial sums and sums of squares for the three blocks
  std::vector<RealVec> bs(nblocks), bss(nblocks);
  parallel_for(
      nblocks,
      [&](std::int64_t b) {
        RealVec sum(3 * n2, 0.0), sumsq(3 * n2, 0.0);
        long lo = b * block, hi = std::min(N, (b + 1) * block);
        for (long r = lo; r < hi; ++r) {
          Trajectory traj =
              simulate(model, L, init, t_end, seed, static_cast<std::uint64_t>(r));
          for (int x = 0; x < L; ++x)
            for (int y = 0; y < L; ++y) {
              std::size_t i = static_cast<std::size_t>(x) * L + y;
              double v11 = traj.q[x] * traj.q[y];
              double v12 = traj.q[x] * traj.p[y];
              double v22 = traj.p[x] * traj.p[y];
              sum[i] += v11;
              sumsq[i] += v11 * v11;
              sum[n2 + i] += v12;
              sumsq[n2 + i] += v12 * v12;
              sum[2 * n2 + i] += v22;
              sumsq[2 * n2 + i] += v22 * v22;
            }
        }
        bs[b] = std::move(sum);
        bss[b] = std::move(sumsq);
      },
      threads);

  RealVec sum(3 * n2, 0.0), sumsq(3 * n2, 0.0);
  for (long b = 0; b < nblocks; ++b) {
    for (std::size_t i = 0; i < 3 * n2; ++i) {
      sum[i] += bs[b][i];
      sumsq[i] += bss[b][i];
    }
  }

  MomentEstimate est;
  est.L = L;
  est.N = N;
  est.c11.resize(n2);
  est.c12.resize(n2);
  est.c22.resize(n2);
  est.se11.resize(n2);
  est.se12.resize(n2);
  est.se22.resize(n2);
  auto finish = [&](std::size_t off, RealVec& mean, RealVec& se) {
    for (std::size_t i = 0; i < n2; ++i) {
      double m = sum[off + i] / N;
      double var = (sumsq[off + i] - N * m * m) / (N - 1);
      mean[i] = m;
      se[i] = std::sqrt(std::max(var, 0.0) / N);
    }
  };
  finish(0, est.c11, est.se11);
  finish(n2, est.c12, est.se12);
  finish(2 * n2, est.c22, est.se22);
  return est;
}

std::vector<RealizationSummary> run_realization_summaries(const ChainModel& model,
                                                          const CovarianceState& law,
                                                          double t_end, long N,
                                                          std::uint64_t seed) {
  InitialSampler init = gaussian_sampler(law);
  std::vector<RealizationSummary> out(N);
  for (long r = 0; r < N; ++r) {
    Philox rng(seed, static_cast<std::uint64_t>(r));
    Trajectory traj;
    traj.q.resize(law.L);
    traj.p.resize(law.L);
    init(rng, traj.q, traj.p);
    double e0 = trajectory_energy(model, traj);
    Trajectory done = simulate(model, law.L, init, t_end, seed, static_cast<std::uint64_t>(r));
    double e1 = trajectory_energy(model, done);
    out[r] = {static_cast<std::uint64_t>(r), e0, e0 != 0.0 ? (e1 - e0) / e0 : 0.0,
              done.flips};
  }
  return out;
}

}  // namespace vflip
