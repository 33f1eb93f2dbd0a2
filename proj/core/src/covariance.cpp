#include "vflip/covariance.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "vflip/util/csv.hpp"
#include "vflip/util/parallel.hpp"
#include "vflip/util/quadrature.hpp"

namespace vflip {

double CovarianceState::at(int i, int j, int x, int y) const {
  std::size_t idx = static_cast<std::size_t>(x) * L + y;
  std::size_t idxT = static_cast<std::size_t>(y) * L + x;
  if (i == 0 && j == 0) return c11[idx];
  if (i == 0 && j == 1) return c12[idx];
  if (i == 1 && j == 0) return c12[idxT];
  return c22[idx];
}

void CovarianceState::resymmetrize() {
  for (int x = 0; x < L; ++x)
    for (int y = x + 1; y < L; ++y) {
      std::size_t a = static_cast<std::size_t>(x) * L + y;
      std::size_t b = static_cast<std::size_t>(y) * L + x;
      double m11 = 0.5 * (c11[a] + c11[b]);
      c11[a] = c11[b] = m11;
      double m22 = 0.5 * (c22[a] + c22[b]);
      c22[a] = c22[b] = m22;
    }
}

Mat2 MGammaMatrix::symbol(double k) const {
  return {{0.0, model->phi_hat(k), -1.0, model->gamma()}};
}

std::vector<double> MGammaMatrix::dense() const {
  std::vector<double> phi = model->build_phi_matrix(L);
  std::size_t n = 2 * static_cast<std::size_t>(L);
  std::vector<double> m(n * n, 0.0);
  for (int x = 0; x < L; ++x) {
    for (int y = 0; y < L; ++y) m[static_cast<std::size_t>(x) * n + (L + y)] = phi[static_cast<std::size_t>(x) * L + y];
    m[static_cast<std::size_t>(L + x) * n + x] = -1.0;
    m[static_cast<std::size_t>(L + x) * n + (L + x)] = model->gamma();
  }
  return m;
}

std::vector<double> EnergyForm::dense() const {
  std::vector<double> phi = model->build_phi_matrix(L);
  std::size_t n = 2 * static_cast<std::size_t>(L);
  std::vector<double> m(n * n, 0.0);
  for (int x = 0; x < L; ++x) {
    for (int y = 0; y < L; ++y) m[static_cast<std::size_t>(x) * n + y] = phi[static_cast<std::size_t>(x) * L + y];
    m[static_cast<std::size_t>(L + x) * n + (L + x)] = 1.0;
  }
  return m;
}

CovarianceState gibbs_state(const ChainModel& model, int L, double T) {
  if (T < 0.0) throw std::invalid_argument("gibbs_state: negative temperature");
  CovarianceState s;
  s.L = L;
  std::size_t n2 = static_cast<std::size_t>(L) * L;
  s.c11.assign(n2, 0.0);
  s.c12.assign(n2, 0.0);
  s.c22.assign(n2, 0.0);
  PeriodicLattice lat(L);
  // c11 is the circulant with symbol T / omega(k)^2
  ComplexVec sym(L);
  for (int n = 0; n < L; ++n) sym[n] = T / model.phi_hat(lat.freq(n));
  ComplexVec row = lat.idft(sym);
  for (int x = 0; x < L; ++x)
    for (int y = 0; y < L; ++y)
      s.c11[static_cast<std::size_t>(x) * L + y] = row[lat.index_of(x - y)].real();
  for (int x = 0; x < L; ++x) s.c22[static_cast<std::size_t>(x) * L + x] = T;
  return s;
}

CovarianceState modulated_state(const ChainModel& model, int L, const RealVec& profile) {
  if (static_cast<int>(profile.size()) != L)
    throw std::invalid_argument("modulated_state: profile length mismatch");
  for (double v : profile)
    if (v < 0.0) throw std::invalid_argument("modulated_state: negative temperature profile");
  CovarianceState s;
  s.L = L;
  std::size_t n2 = static_cast<std::size_t>(L) * L;
  s.c11.assign(n2, 0.0);
  s.c12.assign(n2, 0.0);
  s.c22.assign(n2, 0.0);
  double phihat0 = model.phi_hat(0.0);
  for (int x = 0; x < L; ++x) {
    s.c11[static_cast<std::size_t>(x) * L + x] = profile[x] / phihat0;
    s.c22[static_cast<std::size_t>(x) * L + x] = profile[x];
  }
  return s;
}

namespace {

// y = Phi_L x for the banded circulant, blockwise helpers for the RK4 path
void phi_apply_rows(const ChainModel& model, int L, const RealVec& in, RealVec& out) {
  // out = Phi * in  (apply to the row index)
  const Potential& pot = model.potential();
  int hr = pot.half_range();
  PeriodicLattice lat(L);
  std::fill(out.begin(), out.end(), 0.0);
  for (int d = -hr; d <= hr; ++d) {
    double c = pot.at(d);
    if (c == 0.0) continue;
    for (int x = 0; x < L; ++x) {
      int xs = lat.index_of(x + d);
      const double* src = &in[static_cast<std::size_t>(xs) * L];
      double* dst = &out[static_cast<std::size_t>(x) * L];
      for (int y = 0; y < L; ++y) dst[y] += c * src[y];
    }
  }
}

void phi_apply_cols(const ChainModel& model, int L, const RealVec& in, RealVec& out) {
  // out = in * Phi  (apply to the column index)
  const Potential& pot = model.potential();
  int hr = pot.half_range();
  PeriodicLattice lat(L);
  std::fill(out.begin(), out.end(), 0.0);
  for (int d = -hr; d <= hr; ++d) {
    double c = pot.at(d);
    if (c == 0.0) continue;
    for (int x = 0; x < L; ++x) {
      const double* src = &in[static_cast<std::size_t>(x) * L];
      double* dst = &out[static_cast<std::size_t>(x) * L];
      for (int y = 0; y < L; ++y) dst[y] += c * src[lat.index_of(y + d)];
    }
  }
}

struct Blocks {
  RealVec c11, c12, c22;
};

void rhs_blocks(const ChainModel& model, int L, const RealVec& c11, const RealVec& c12,
                const RealVec& c22, Blocks& out) {
  std::size_t n2 = static_cast<std::size_t>(L) * L;
  out.c11.resize(n2);
  out.c12.resize(n2);
  out.c22.resize(n2);
  double g = model.gamma();
  RealVec tmp1(n2), tmp2(n2);
  // d c11 = c21 + c12 = c12^T + c12
  for (int x = 0; x < L; ++x)
    for (int y = 0; y < L; ++y)
      out.c11[static_cast<std::size_t>(x) * L + y] =
          c12[static_cast<std::size_t>(y) * L + x] + c12[static_cast<std::size_t>(x) * L + y];
  // d c12 = c22 - c11 Phi - gamma c12
  phi_apply_cols(model, L, c11, tmp1);
  for (std::size_t i = 0; i < n2; ++i) out.c12[i] = c22[i] - tmp1[i] - g * c12[i];
  // d c22 = -Phi c12 - c21 Phi - 2 gamma c22 + 2 gamma diag(T)
  phi_apply_rows(model, L, c12, tmp1);  // Phi c12
  for (std::size_t i = 0; i < n2; ++i) out.c22[i] = -tmp1[i] - 2.0 * g * c22[i];
  // c21 Phi = (Phi c12)^T applied as transpose of tmp1
  for (int x = 0; x < L; ++x)
    for (int y = 0; y < L; ++y)
      out.c22[static_cast<std::size_t>(x) * L + y] -= tmp1[static_cast<std::size_t>(y) * L + x];
  for (int x = 0; x < L; ++x)
    out.c22[static_cast<std::size_t>(x) * L + x] += 2.0 * g * c22[static_cast<std::size_t>(x) * L + x];
}

}  // namespace

CovarianceState covariance_rhs(const ChainModel& model, const CovarianceState& state) {
  Blocks b;
  rhs_blocks(model, state.L, state.c11, state.c12, state.c22, b);
  CovarianceState out;
  out.t = state.t;
  out.L = state.L;
  out.c11 = std::move(b.c11);
  out.c12 = std::move(b.c12);
  out.c22 = std::move(b.c22);
  return out;
}

MeanState evolve_means(const ChainModel& model, const MeanState& means, double t) {
  if (t < 0.0) throw std::invalid_argument("evolve_means: t must be nonnegative");
  int L = static_cast<int>(means.qbar.size());
  PeriodicLattice lat(L);
  ComplexVec qh = lat.dft(means.qbar);
  ComplexVec ph = lat.dft(means.pbar);
  // (qbar, pbar)_t = e^{-t M^T} (qbar, pbar)_0; the symbol of e^{-t M^T} at k
  // is Ahat_t(k)^T since Ahat is even in k.
  for (int n = 0; n < L; ++n) {
    Mat2 A = a_hat(model, t, lat.freq(n));
    Complex q = qh[n], p = ph[n];
    qh[n] = A(0, 0) * q + A(1, 0) * p;
    ph[n] = A(0, 1) * q + A(1, 1) * p;
  }
  MeanState out;
  out.t = means.t + t;
  out.qbar.resize(L);
  out.pbar.resize(L);
  ComplexVec q = lat.idft(qh), p = lat.idft(ph);
  for (int x = 0; x < L; ++x) {
    out.qbar[x] = q[x].real();
    out.pbar[x] = p[x].real();
  }
  return out;
}

CovarianceState step_rk4(const ChainModel& model, const CovarianceState& state, double h) {
  double hmax = 0.1 / std::max(model.gamma(), 2.0 * model.omega_max());
  if (h > hmax * (1.0 + 1e-12)) throw std::invalid_argument("step_rk4: step too large");
  int L = state.L;
  std::size_t n2 = static_cast<std::size_t>(L) * L;
  Blocks k1, k2, k3, k4;
  RealVec t11(n2), t12(n2), t22(n2);
  auto stage = [&](const Blocks& k, double f, Blocks& out) {
    for (std::size_t i = 0; i < n2; ++i) {
      t11[i] = state.c11[i] + f * k.c11[i];
      t12[i] = state.c12[i] + f * k.c12[i];
      t22[i] = state.c22[i] + f * k.c22[i];
    }
    rhs_blocks(model, L, t11, t12, t22, out);
  };
  rhs_blocks(model, L, state.c11, state.c12, state.c22, k1);
  stage(k1, 0.5 * h, k2);
  stage(k2, 0.5 * h, k3);
  stage(k3, h, k4);
  CovarianceState out;
  out.t = state.t + h;
  out.L = L;
  out.c11.resize(n2);
  out.c12.resize(n2);
  out.c22.resize(n2);
  for (std::size_t i = 0; i < n2; ++i) {
    out.c11[i] = state.c11[i] + h / 6.0 * (k1.c11[i] + 2.0 * k2.c11[i] + 2.0 * k3.c11[i] + k4.c11[i]);
    out.c12[i] = state.c12[i] + h / 6.0 * (k1.c12[i] + 2.0 * k2.c12[i] + 2.0 * k3.c12[i] + k4.c12[i]);
    out.c22[i] = state.c22[i] + h / 6.0 * (k1.c22[i] + 2.0 * k2.c22[i] + 2.0 * k3.c22[i] + k4.c22[i]);
  }
  out.resymmetrize();
  return out;
}

CovarianceState evolve_rk4(const ChainModel& model, CovarianceState state, double t_end,
                           double h, int /*threads*/) {
  while (state.t < t_end - 1e-14) {
    double step = std::min(h, t_end - state.t);
    state = step_rk4(model, state, step);
  }
  state.t = t_end;
  return state;
}

// ---------------------------------------------------------------------------
// Fourier-block Duhamel scheme.
//
// State in Fourier space: Chat(k1,k2) = sum_{x,y} e^{-2pi i (x k1 + y k2)} C(x,y)
// per 2x2 block. One step of width h:
//   Chat <- Ahat_h(k1)^T Chat Ahat_h(k2)
//           + 2 gamma int_0^h That_{t+u}(k1+k2) Ahat_{h-u}(k1)^T P2 Ahat_{h-u}(k2) du
// where That(kappa) = int dk1 Chat^22(k1, kappa-k1) is the dft of the
// temperature profile. Within the step That solves the scalar renewal
// (Volterra) equation
//   That(s) = F_s(kappa) + 2 gamma int_0^s G_{s-u}(kappa) That(u) du,
//   F_s(kappa) = int dk1 [Ahat_s^T Chat_t Ahat_s]^22,   G_u(kappa) = int dk1 A22 A22.
// The collocation closure solves it on Chebyshev nodes with a precomputed
// (I - V) LU factorization per kappa, which makes each step exact to machine
// precision; the predictor-corrector closure is the cheaper O(h^3)-biased
// variant kept for cross-checks.
// ---------------------------------------------------------------------------

namespace {

struct FourierState {
  int L = 0;
  // blocks[e][k1*L + k2], e in {11=0, 12=1, 21=2, 22=3}
  std::array<ComplexVec, 4> b;
};

FourierState to_fourier(const CovarianceState& s) {
  int L = s.L;
  PeriodicLattice lat(L);
  FourierState f;
  f.L = L;
  auto transform = [&](const RealVec& blk, bool transpose) {
    ComplexVec m(static_cast<std::size_t>(L) * L);
    // rows
    ComplexVec row(L);
    for (int x = 0; x < L; ++x) {
      for (int y = 0; y < L; ++y)
        row[y] = transpose ? blk[static_cast<std::size_t>(y) * L + x]
                           : blk[static_cast<std::size_t>(x) * L + y];
      ComplexVec rh = lat.dft(row);
      for (int n = 0; n < L; ++n) m[static_cast<std::size_t>(x) * L + n] = rh[n];
    }
    // columns
    ComplexVec col(L);
    for (int n = 0; n < L; ++n) {
      for (int x = 0; x < L; ++x) col[x] = m[static_cast<std::size_t>(x) * L + n];
      ComplexVec ch = lat.dft(col);
      for (int x = 0; x < L; ++x) m[static_cast<std::size_t>(x) * L + n] = ch[x];
    }
    return m;
  };
  f.b[0] = transform(s.c11, false);
  f.b[1] = transform(s.c12, false);
  f.b[2] = transform(s.c12, true);
  f.b[3] = transform(s.c22, false);
  return f;
}

CovarianceState from_fourier(const FourierState& f, const ChainModel& /*model*/, double t) {
  int L = f.L;
  PeriodicLattice lat(L);
  CovarianceState s;
  s.t = t;
  s.L = L;
  auto back = [&](const ComplexVec& m) {
    ComplexVec w(static_cast<std::size_t>(L) * L);
    ComplexVec col(L);
    for (int n = 0; n < L; ++n) {
      for (int x = 0; x < L; ++x) col[x] = m[static_cast<std::size_t>(x) * L + n];
      ComplexVec ci = lat.idft(col);
      for (int x = 0; x < L; ++x) w[static_cast<std::size_t>(x) * L + n] = ci[x];
    }
    RealVec out(static_cast<std::size_t>(L) * L);
    ComplexVec row(L);
    for (int x = 0; x < L; ++x) {
      for (int n = 0; n < L; ++n) row[n] = w[static_cast<std::size_t>(x) * L + n];
      ComplexVec ri = lat.idft(row);
      for (int y = 0; y < L; ++y) out[static_cast<std::size_t>(x) * L + y] = ri[y].real();
    }
    return out;
  };
  s.c11 = back(f.b[0]);
  s.c12 = back(f.b[1]);
  s.c22 = back(f.b[3]);
  return s;
}

class DuhamelStepper {
 public:
  DuhamelStepper(const ChainModel& model, int L, double h, DuhamelClosure closure,
                 int threads)
      : model_(model), L_(L), h_(h), closure_(closure), threads_(threads), lat_(L) {
    build_tables();
  }

  void step(FourierState& f, double t_now) {
    compute_drive(f);
    solve_temperature(f);
    (void)t_now;
    update_pairs(f);
  }

 private:
  static constexpr int kCheb = 10;   // collocation nodes on [0, h]
  static constexpr int kSrc = 8;     // Gauss-Legendre nodes for the source integral
  static constexpr int kVolt = 16;   // GL nodes for the collocation matrix

  void build_tables() {
    // Chebyshev points of the second kind mapped to [0, h]
    s_nodes_.resize(kCheb);
    for (int j = 0; j < kCheb; ++j)
      s_nodes_[j] = 0.5 * h_ * (1.0 - std::cos(M_PI * j / (kCheb - 1)));

    const GaussRule& gs = gauss_legendre(kSrc);
    src_u_.resize(kSrc);
    src_w_.resize(kSrc);
    for (int g = 0; g < kSrc; ++g) {
      src_u_[g] = 0.5 * h_ * (gs.nodes[g] + 1.0);
      src_w_[g] = 0.5 * h_ * gs.weights[g] * 2.0 * model_.gamma();
    }

    // Ahat rows at the step width and at the source nodes
    ah_.resize(L_);
    for (int n = 0; n < L_; ++n) ah_[n] = a_hat(model_, h_, lat_.freq(n));
    arow_.assign(static_cast<std::size_t>(kSrc) * L_ * 2, 0.0);
    for (int g = 0; g < kSrc; ++g)
      for (int n = 0; n < L_; ++n) {
        Mat2 A = a_hat(model_, h_ - src_u_[g], lat_.freq(n));
        arow_[(static_cast<std::size_t>(g) * L_ + n) * 2 + 0] = A(1, 0);
        arow_[(static_cast<std::size_t>(g) * L_ + n) * 2 + 1] = A(1, 1);
      }
    // Ahat node tables for the drive F_s
    fa_.assign(static_cast<std::size_t>(kCheb) * L_, Mat2{});
    for (int j = 0; j < kCheb; ++j)
      for (int n = 0; n < L_; ++n)
        fa_[static_cast<std::size_t>(j) * L_ + n] = a_hat(model_, s_nodes_[j], lat_.freq(n));

    // Lagrange basis on the collocation nodes evaluated at the source nodes
    lag_src_.assign(static_cast<std::size_t>(kSrc) * kCheb, 0.0);
    for (int g = 0; g < kSrc; ++g)
      for (int i = 0; i < kCheb; ++i)
        lag_src_[static_cast<std::size_t>(g) * kCheb + i] = lagrange(i, src_u_[g]);

    if (closure_ == DuhamelClosure::collocation) build_collocation_matrices();
    if (closure_ == DuhamelClosure::predictor_corrector) {
      // int_0^h G_u(kappa) du for the frozen-temperature predictor
      g_int_.assign(L_, 0.0);
      const GaussRule& gv = gauss_legendre(kVolt);
      RealVec row(L_);
      for (int q = 0; q < kVolt; ++q) {
        double u = 0.5 * h_ * (gv.nodes[q] + 1.0);
        double w = 0.5 * h_ * gv.weights[q];
        g_kernel(u, row);
        for (int m = 0; m < L_; ++m) g_int_[m] += w * row[m];
      }
    }
    tnodes_.assign(static_cast<std::size_t>(kCheb) * L_, Complex(0, 0));
    tsrc_.assign(static_cast<std::size_t>(kSrc) * L_, Complex(0, 0));
    drive_.assign(static_cast<std::size_t>(kCheb) * L_, Complex(0, 0));
  }

  double lagrange(int i, double u) const {
    double num = 1.0, den = 1.0;
    for (int q = 0; q < kCheb; ++q) {
      if (q == i) continue;
      num *= (u - s_nodes_[q]);
      den *= (s_nodes_[i] - s_nodes_[q]);
    }
    return num / den;
  }

  // G_u(kappa) = (1/L) sum_k1 A22_u(k1) A22_u(kappa - k1)
  void g_kernel(double u, RealVec& out) const {
    RealVec a22(L_);
    for (int n = 0; n < L_; ++n) a22[n] = a_hat(model_, u, lat_.freq(n))(1, 1);
    for (int m = 0; m < L_; ++m) {
      double acc = 0.0;
      for (int n = 0; n < L_; ++n) {
        int n2 = m - n;
        if (n2 < 0) n2 += L_;
        acc += a22[n] * a22[n2];
      }
      out[m] = acc / L_;
    }
  }

  void build_collocation_matrices() {
    using CMat = Eigen::MatrixXcd;
    const GaussRule& gv = gauss_legendre(kVolt);
    // V[kappa](j,i) = 2 gamma int_0^{s_j} G_{s_j-u}(kappa) l_i(u) du
    std::vector<CMat> V(L_, CMat::Zero(kCheb, kCheb));
    RealVec grow(L_);
    for (int j = 1; j < kCheb; ++j) {
      double sj = s_nodes_[j];
      for (int q = 0; q < kVolt; ++q) {
        double u = 0.5 * sj * (gv.nodes[q] + 1.0);
        double w = 0.5 * sj * gv.weights[q] * 2.0 * model_.gamma();
        g_kernel(sj - u, grow);
        for (int i = 0; i < kCheb; ++i) {
          double li = lagrange(i, u);
          for (int m = 0; m < L_; ++m) V[m](j, i) += w * grow[m] * li;
        }
      }
    }
    lu_.reserve(L_);
    for (int m = 0; m < L_; ++m)
      lu_.emplace_back(CMat::Identity(kCheb, kCheb) - V[m]);
  }

  // F_{s_j}(kappa) for all collocation nodes; O(kCheb * L^2)
  void compute_drive(const FourierState& f) {
    parallel_for(
        static_cast<std::int64_t>(kCheb) * L_,
        [&](std::int64_t idx) {
          int j = static_cast<int>(idx / L_);
          int m = static_cast<int>(idx % L_);
          const Mat2* A = &fa_[static_cast<std::size_t>(j) * L_];
          Complex acc(0.0, 0.0);
          for (int n1 = 0; n1 < L_; ++n1) {
            int n2 = m - n1;
            if (n2 < 0) n2 += L_;
            std::size_t p = static_cast<std::size_t>(n1) * L_ + n2;
            const Mat2 &A1 = A[n1], &A2 = A[n2];
            acc += A1(0, 1) * (f.b[0][p] * A2(0, 1) + f.b[1][p] * A2(1, 1)) +
                   A1(1, 1) * (f.b[2][p] * A2(0, 1) + f.b[3][p] * A2(1, 1));
          }
          drive_[idx] = acc / static_cast<double>(L_);
        },
        threads_);
  }

  void solve_temperature(const FourierState& /*f*/) {
    if (closure_ == DuhamelClosure::collocation) {
      parallel_for(
          L_,
          [&](std::int64_t m) {
            Eigen::VectorXcd rhs(kCheb);
            for (int j = 0; j < kCheb; ++j) rhs(j) = drive_[static_cast<std::size_t>(j) * L_ + m];
            Eigen::VectorXcd sol = lu_[m].solve(rhs);
            for (int j = 0; j < kCheb; ++j) tnodes_[static_cast<std::size_t>(j) * L_ + m] = sol(j);
          },
          threads_);
    } else {
      // predictor: That frozen at the step start (= drive at s=0);
      // corrector: linear interpolation to the predicted endpoint
      for (int m = 0; m < L_; ++m) {
        Complex t0 = drive_[m];  // s_nodes_[0] == 0
        Complex tpred = drive_[static_cast<std::size_t>(kCheb - 1) * L_ + m] +
                        2.0 * model_.gamma() * g_int_[m] * t0;
        for (int j = 0; j < kCheb; ++j) {
          double s = s_nodes_[j] / h_;
          tnodes_[static_cast<std::size_t>(j) * L_ + m] = t0 + s * (tpred - t0);
        }
      }
    }
    // temperature at the source quadrature nodes
    for (int g = 0; g < kSrc; ++g)
      for (int m = 0; m < L_; ++m) {
        Complex acc(0.0, 0.0);
        for (int i = 0; i < kCheb; ++i)
          acc += lag_src_[static_cast<std::size_t>(g) * kCheb + i] *
                 tnodes_[static_cast<std::size_t>(i) * L_ + m];
        tsrc_[static_cast<std::size_t>(g) * L_ + m] = acc;
      }
  }

  void update_pairs(FourierState& f) {
    parallel_for(
        L_,
        [&](std::int64_t n1) {
          const Mat2& A1 = ah_[n1];
          for (int n2 = 0; n2 < L_; ++n2) {
            const Mat2& A2 = ah_[n2];
            std::size_t p = static_cast<std::size_t>(n1) * L_ + n2;
            Complex c11 = f.b[0][p], c12 = f.b[1][p], c21 = f.b[2][p], c22 = f.b[3][p];
            // A1^T C A2
            Complex r11 = A1(0, 0) * c11 + A1(1, 0) * c21;
            Complex r12 = A1(0, 0) * c12 + A1(1, 0) * c22;
            Complex r21 = A1(0, 1) * c11 + A1(1, 1) * c21;
            Complex r22 = A1(0, 1) * c12 + A1(1, 1) * c22;
            Complex n11 = r11 * A2(0, 0) + r12 * A2(1, 0);
            Complex n12 = r11 * A2(0, 1) + r12 * A2(1, 1);
            Complex n21 = r21 * A2(0, 0) + r22 * A2(1, 0);
            Complex n22 = r21 * A2(0, 1) + r22 * A2(1, 1);
            int m = static_cast<int>(n1) + n2;
            if (m >= L_) m -= L_;
            for (int g = 0; g < kSrc; ++g) {
              Complex tval = src_w_[g] * tsrc_[static_cast<std::size_t>(g) * L_ + m];
              const double* r1 = &arow_[(static_cast<std::size_t>(g) * L_ + n1) * 2];
              const double* r2 = &arow_[(static_cast<std::size_t>(g) * L_ + n2) * 2];
              n11 += tval * (r1[0] * r2[0]);
              n12 += tval * (r1[0] * r2[1]);
              n21 += tval * (r1[1] * r2[0]);
              n22 += tval * (r1[1] * r2[1]);
            }
            f.b[0][p] = n11;
            f.b[1][p] = n12;
            f.b[2][p] = n21;
            f.b[3][p] = n22;
          }
        },
        threads_);
    // re-symmetrize: Chat(k1,k2) = Chat(k2,k1)^T
    for (int n1 = 0; n1 < L_; ++n1)
      for (int n2 = n1; n2 < L_; ++n2) {
        std::size_t p = static_cast<std::size_t>(n1) * L_ + n2;
        std::size_t q = static_cast<std::size_t>(n2) * L_ + n1;
        Complex m11 = 0.5 * (f.b[0][p] + f.b[0][q]);
        f.b[0][p] = f.b[0][q] = m11;
        Complex m22 = 0.5 * (f.b[3][p] + f.b[3][q]);
        f.b[3][p] = f.b[3][q] = m22;
        Complex m12 = 0.5 * (f.b[1][p] + f.b[2][q]);
        f.b[1][p] = f.b[2][q] = m12;
        Complex m21 = 0.5 * (f.b[2][p] + f.b[1][q]);
        f.b[2][p] = f.b[1][q] = m21;
      }
  }

  const ChainModel& model_;
  int L_;
  double h_;
  DuhamelClosure closure_;
  int threads_;
  PeriodicLattice lat_;

  RealVec s_nodes_, src_u_, src_w_, lag_src_, g_int_;
  std::vector<Mat2> ah_;
  std::vector<Mat2> fa_;
  RealVec arow_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXcd>> lu_;
  ComplexVec tnodes_, tsrc_, drive_;
};

}  // namespace

CovarianceState evolve_duhamel(const ChainModel& model, const CovarianceState& state,
                               double t_end, double h, DuhamelClosure closure,
                               int threads) {
  if (h > 0.5 / model.gamma() * (1.0 + 1e-12))
    throw std::invalid_argument("evolve_duhamel: step too large (h <= 0.5/gamma)");
  if (t_end < state.t) throw std::invalid_argument("evolve_duhamel: t_end before state time");
  FourierState f = to_fourier(state);
  double t = state.t;
  double span = t_end - state.t;
  long nfull = static_cast<long>(std::floor(span / h + 1e-9));
  double rem = span - nfull * h;
  if (nfull > 0) {
    DuhamelStepper stepper(model, state.L, h, closure, threads);
    for (long i = 0; i < nfull; ++i) {
      stepper.step(f, t);
      t += h;
    }
  }
  if (rem > 1e-12) {
    DuhamelStepper stepper(model, state.L, rem, closure, threads);
    stepper.step(f, t);
  }
  CovarianceState out = from_fourier(f, model, t_end);
  out.resymmetrize();
  return out;
}

RealVec temperature(const CovarianceState& state) {
  RealVec T(state.L);
  for (int x = 0; x < state.L; ++x) T[x] = state.c22[static_cast<std::size_t>(x) * state.L + x];
  return T;
}

double total_energy(const ChainModel& model, const CovarianceState& state) {
  int L = state.L;
  // Tr(Phi c11): banded circulant trace
  const Potential& pot = model.potential();
  PeriodicLattice lat(L);
  double tr_phi = 0.0;
  for (int d = -pot.half_range(); d <= pot.half_range(); ++d) {
    double c = pot.at(d);
    if (c == 0.0) continue;
    for (int x = 0; x < L; ++x)
      tr_phi += c * state.c11[static_cast<std::size_t>(lat.index_of(x + d)) * L + x];
  }
  double tr_22 = 0.0;
  for (int x = 0; x < L; ++x) tr_22 += state.c22[static_cast<std::size_t>(x) * L + x];
  return 0.5 * (tr_phi + tr_22);
}

double min_eigenvalue(const CovarianceState& state) {
  int L = state.L;
  Eigen::MatrixXd C(2 * L, 2 * L);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int x = 0; x < L; ++x)
        for (int y = 0; y < L; ++y) C(i * L + x, j * L + y) = state.at(i, j, x, y);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (C + C.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace {
constexpr char kSnapshotMagic[8] = {'V', 'F', 'C', 'O', 'V', '0', '0', '1'};
}

void write_snapshot(const std::string& path, const ChainModel& model,
                    const CovarianceState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_snapshot: cannot open " + path);
  out.write(kSnapshotMagic, 8);
  std::uint64_t L = static_cast<std::uint64_t>(state.L);
  double t = state.t, g = model.gamma();
  std::uint64_t nc = model.potential().coeff.size();
  out.write(reinterpret_cast<const char*>(&L), 8);
  out.write(reinterpret_cast<const char*>(&t), 8);
  out.write(reinterpret_cast<const char*>(&g), 8);
  out.write(reinterpret_cast<const char*>(&nc), 8);
  out.write(reinterpret_cast<const char*>(model.potential().coeff.data()),
            static_cast<std::streamsize>(8 * nc));
  for (const RealVec* blk : {&state.c11, &state.c12, &state.c22})
    out.write(reinterpret_cast<const char*>(blk->data()),
              static_cast<std::streamsize>(8 * blk->size()));
}

CovarianceState read_snapshot(const std::string& path, Potential* pot_out,
                              double* gamma_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_snapshot: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kSnapshotMagic, 8) != 0)
    throw std::runtime_error("read_snapshot: bad magic");
  std::uint64_t L = 0, nc = 0;
  double t = 0, g = 0;
  in.read(reinterpret_cast<char*>(&L), 8);
  in.read(reinterpret_cast<char*>(&t), 8);
  in.read(reinterpret_cast<char*>(&g), 8);
  in.read(reinterpret_cast<char*>(&nc), 8);
  Potential pot;
  pot.coeff.resize(nc);
  in.read(reinterpret_cast<char*>(pot.coeff.data()), static_cast<std::streamsize>(8 * nc));
  CovarianceState s;
  s.t = t;
  s.L = static_cast<int>(L);
  std::size_t n2 = static_cast<std::size_t>(L) * L;
  for (RealVec* blk : {&s.c11, &s.c12, &s.c22}) {
    blk->resize(n2);
    in.read(reinterpret_cast<char*>(blk->data()), static_cast<std::streamsize>(8 * n2));
  }
  if (!in) throw std::runtime_error("read_snapshot: truncated file");
  if (pot_out) *pot_out = pot;
  if (gamma_out) *gamma_out = g;
  return s;
}

void write_temperature_csv(const std::string& path, const CovarianceState& state,
                           const std::vector<std::string>& header_comments) {
  CsvWriter csv(path, header_comments, {"x", "T"});
  PeriodicLattice lat(state.L);
  RealVec T = temperature(state);
  for (int i = 0; i < state.L; ++i)
    csv.row({static_cast<double>(lat.site(i)), T[i]});
}

}  // namespace vflip
