#include "bjj/dimer.hpp"

#include <algorithm>
#include <cmath>

#include "bjj/kernels.hpp"
#include "bjj/linalg.hpp"

namespace bjj {

namespace {
using cd = std::complex<double>;
}

double DimerState::norm_sq() const {
  return kernels::norm_sq(amplitudes.data(), amplitudes.size());
}

double DimerState::imbalance() const {
  const std::size_t nn = n_bosons;
  double s = 0.0;
  for (std::size_t n = 0; n <= nn; ++n)
    s += static_cast<double>(2.0 * n - static_cast<double>(nn)) * std::norm(amplitudes[n]);
  return s / static_cast<double>(nn);
}

DimerState DimerState::mirrored() const {
  DimerState m = *this;
  std::reverse(m.amplitudes.begin(), m.amplitudes.end());
  return m;
}

TridiagOp build_dimer_hamiltonian(const DimerParams& params, std::size_t n_bosons,
                                  double d) {
  if (!(params.j > 0)) throw SimError("dimer: J must be > 0");
  if (n_bosons < 1) throw SimError("dimer: N must be >= 1");
  const double nd = static_cast<double>(n_bosons);
  TridiagOp h;
  h.diag.resize(n_bosons + 1);
  h.off.resize(n_bosons);
  for (std::size_t n = 0; n <= n_bosons; ++n) {
    const double nl = static_cast<double>(n);
    const double nr = nd - nl;
    h.diag[n] = 0.5 * params.u * (nl * (nl - 1.0) + nr * (nr - 1.0)) +
                (d + params.du) * (nl - nr);
  }
  for (std::size_t n = 0; n < n_bosons; ++n) {
    const double nl = static_cast<double>(n);
    h.off[n] = -params.j * std::sqrt((nl + 1.0) * (nd - nl));
  }
  return h;
}

DimerState dimer_ground_state(const DimerParams& params, std::size_t n_bosons,
                              double d_prep) {
  const TridiagOp h = build_dimer_hamiltonian(params, n_bosons, d_prep);
  const std::size_t k = std::min<std::size_t>(2, n_bosons + 1);
  const auto eig = linalg::sym_tridiag_lowest(h.diag, h.off, k);
  double scale = 1.0;
  for (double x : h.diag) scale = std::max(scale, std::abs(x));
  if (k == 2 && std::abs(eig.values[1] - eig.values[0]) < 1e-12 * scale)
    throw SimError("dimer_ground_state: degenerate ground state");

  DimerState s;
  s.n_bosons = n_bosons;
  s.amplitudes.resize(n_bosons + 1);
  const auto& v = eig.vectors[0];
  std::size_t imax = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  const double sign = v[imax] >= 0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) s.amplitudes[i] = sign * v[i];
  return s;
}

DimerTrajectory propagate_dimer(const DimerState& s0, const DimerParams& params,
                                const Control& control, double T, double dt,
                                const DimerRunOptions& opts) {
  const std::size_t nb = s0.n_bosons;
  const std::size_t dim = nb + 1;
  if (s0.amplitudes.size() != dim) throw SimError("propagate_dimer: bad state size");
  if (!(dt > 0)) throw SimError("propagate_dimer: dt must be positive");

  TridiagOp h0 = build_dimer_hamiltonian(params, nb, 0.0);

  // z operator diagonal (per particle) and static diagonal with the initial
  // energy expectation removed (a pure global phase)
  std::vector<double> zop(dim), zop_per_n(dim);
  for (std::size_t n = 0; n < dim; ++n) {
    zop[n] = 2.0 * static_cast<double>(n) - static_cast<double>(nb);
    zop_per_n[n] = zop[n] / static_cast<double>(nb);
  }
  double shift = 0.0;
  for (std::size_t n = 0; n < dim; ++n)
    shift += h0.diag[n] * std::norm(s0.amplitudes[n]);
  std::vector<double> diag0(dim);
  for (std::size_t n = 0; n < dim; ++n) diag0[n] = h0.diag[n] - shift;

  // Gershgorin radius of the shifted operator including the control bound,
  // then cap dt so the accumulated RK4 norm error stays within 1e-11.
  double d_bound = std::abs(params.du);
  if (control.is_feedback()) {
    d_bound += std::abs(control.at(0.0, 1.0));
    d_bound = std::max(d_bound, std::abs(control.at(0.0, -1.0)) + std::abs(params.du));
  } else {
    // sampled pulse: direct bound
    d_bound = 0.0;
    for (double t = 0.0; t <= T; t += std::max(T / 512.0, dt))
      d_bound = std::max(d_bound, std::abs(control.at(t, 0.0)));
    d_bound += std::abs(params.du);
  }
  double radius = 0.0;
  for (std::size_t n = 0; n < dim; ++n) {
    double r = std::abs(diag0[n]) + d_bound * std::abs(zop[n]);
    if (n > 0) r += std::abs(h0.off[n - 1]);
    if (n + 1 < dim) r += std::abs(h0.off[n]);
    radius = std::max(radius, r);
  }
  // RK4 keeps the norm budget only when its step stays under dt_safe; when
  // that would blow the run up by more than ~8x, switch to Lanczos stepping
  // (exact short-time exponentials, no stability limit)
  double dt_safe = dt;
  if (radius > 0.0 && T > 0.0)
    dt_safe = std::pow(1.44e-9 / (T * std::pow(radius, 6.0)), 0.2);
  bool use_lanczos = dt_safe < 0.125 * dt;
  if (opts.stepper == DimerStepper::rk4) use_lanczos = false;
  if (opts.stepper == DimerStepper::lanczos) use_lanczos = true;
  const double dt_eff = use_lanczos ? dt : std::min(dt, dt_safe);
  std::size_t nsteps = static_cast<std::size_t>(std::ceil(T / dt_eff - 1e-12));
  if (nsteps == 0) nsteps = 1;
  if (use_lanczos && radius > 0.0) {
    // keep ||H|| h <= 4 so the small Taylor exponential stays well conditioned
    const auto nmin = static_cast<std::size_t>(std::ceil(T * radius / 4.0));
    nsteps = std::max(nsteps, nmin);
  }
  const double h = T / static_cast<double>(nsteps);

  DimerTrajectory traj;
  traj.dt_used = h;
  traj.step_times.resize(nsteps + 1);
  traj.z.resize(nsteps + 1);
  traj.d.resize(nsteps + 1);
  const bool with_eps = opts.fidelity_target != nullptr;
  if (with_eps) traj.eps.resize(nsteps + 1);

  std::vector<cd> a(s0.amplitudes);
  std::vector<cd> k1(dim), k2(dim), k3(dim), k4(dim), stage(dim);
  std::vector<double> dtot(dim);

  auto rhs = [&](const std::vector<cd>& x, double t, std::vector<cd>& out) {
    // imbalance normalized by the substage norm (RK4 stages drift off the
    // unit sphere by O(dt))
    const double nrm = kernels::norm_sq(x.data(), dim);
    const double z = kernels::weighted_abs2(zop_per_n.data(), x.data(), dim) / nrm;
    const double dval = control.at(t, z) + params.du;
    for (std::size_t n = 0; n < dim; ++n) dtot[n] = diag0[n] + dval * zop[n];
    kernels::tridiag_matvec(dtot.data(), h0.off.data(), x.data(), out.data(), dim);
    kernels::cscale(cd(0.0, -1.0), out.data(), dim);
  };

  auto record = [&](std::size_t i, double t) {
    traj.step_times[i] = t;
    traj.z[i] = kernels::weighted_abs2(zop_per_n.data(), a.data(), dim);
    traj.d[i] = control.at(t, traj.z[i]);
    if (with_eps) {
      const cd ov = kernels::dotc(opts.fidelity_target->amplitudes.data(),
                                  a.data(), dim);
      traj.eps[i] = 1.0 - std::norm(ov);
    }
  };

  auto snapshot = [&](double t) {
    traj.snap_times.push_back(t);
    DimerState snap;
    snap.n_bosons = nb;
    snap.amplitudes = a;
    traj.snapshots.push_back(std::move(snap));
  };

  // Lanczos stepping with a fourth-order Magnus generator. Two Gauss nodes
  // t + h/2 -+ sqrt(3)h/6 give
  //   M = h (H0 + dbar Z) - i g [H0, Z],  g = (sqrt(3)/12) h^2 (d1 - d2),
  // a complex-Hermitian tridiagonal; the step applies exp(-i M) through an
  // adaptively-sized Krylov space. The small exponential is a Taylor sum on
  // the real tridiagonal T_m (O(m) per term); the chain stops once the
  // Expokit-style residual estimate |beta_j y_j| falls below tolerance.
  // Unitary up to rounding for any |D|.
  const std::size_t krylov_max = std::min<std::size_t>(dim, 48);
  std::vector<std::vector<cd>> basis;
  std::vector<double> alpha, beta, mdiag;
  std::vector<cd> w(dim), moff, ysmall, term, tmp_small;
  if (use_lanczos) {
    basis.assign(krylov_max, std::vector<cd>(dim));
    alpha.resize(krylov_max);
    beta.resize(krylov_max);
    mdiag.resize(dim);
    moff.resize(dim - 1);
    ysmall.reserve(krylov_max);
    term.reserve(krylov_max);
    tmp_small.reserve(krylov_max);
  }

  // y = exp(-i T_j) e1 for the current chain (the step h lives inside M)
  auto small_exp = [&](std::size_t m) {
    ysmall.assign(m, cd(0, 0));
    term.assign(m, cd(0, 0));
    tmp_small.assign(m, cd(0, 0));
    ysmall[0] = term[0] = cd(1.0, 0.0);
    const cd mi(0.0, -1.0);
    for (int k = 1; k <= 96; ++k) {
      for (std::size_t i = 0; i < m; ++i) {
        cd acc = alpha[i] * term[i];
        if (i > 0) acc += beta[i - 1] * term[i - 1];
        if (i + 1 < m) acc += beta[i] * term[i + 1];
        tmp_small[i] = acc * (mi / static_cast<double>(k));
      }
      term = tmp_small;
      double tn = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        ysmall[i] += term[i];
        tn += std::norm(term[i]);
      }
      if (tn < 1e-34) break;
    }
  };

  const double gauss_off = std::sqrt(3.0) / 6.0;
  auto lanczos_step = [&](double t) {
    const double z = kernels::weighted_abs2(zop_per_n.data(), a.data(), dim) /
                     kernels::norm_sq(a.data(), dim);
    const double d1 = control.at(t + (0.5 - gauss_off) * h, z) + params.du;
    const double d2 = control.at(t + (0.5 + gauss_off) * h, z) + params.du;
    const double dbar = 0.5 * (d1 + d2);
    const double g = std::sqrt(3.0) / 12.0 * h * h * (d1 - d2);
    for (std::size_t n = 0; n < dim; ++n)
      mdiag[n] = h * (diag0[n] + dbar * zop[n]);
    // [H0, Z] upper off-diagonal is 2 off_n (zop spacing is 2)
    for (std::size_t n = 0; n + 1 < dim; ++n)
      moff[n] = h0.off[n] * cd(h, -2.0 * g);

    basis[0] = a;
    std::size_t m = krylov_max;
    for (std::size_t j = 0; j < krylov_max; ++j) {
      kernels::htridiag_matvec(mdiag.data(), moff.data(), basis[j].data(),
                               w.data(), dim);
      alpha[j] = kernels::dotc(basis[j].data(), w.data(), dim).real();
      kernels::caxpy(cd(-alpha[j], 0.0), basis[j].data(), w.data(), dim);
      if (j > 0)
        kernels::caxpy(cd(-beta[j - 1], 0.0), basis[j - 1].data(), w.data(), dim);
      const double nw = std::sqrt(kernels::norm_sq(w.data(), dim));
      beta[j] = nw;
      if (nw < 1e-12) {
        m = j + 1;  // happy breakdown: the Krylov space is invariant
        break;
      }
      if (j >= 2) {
        small_exp(j + 1);
        if (nw * std::abs(ysmall[j]) < 1e-13) {
          m = j + 1;
          break;
        }
      }
      if (j + 1 == krylov_max) break;
      basis[j + 1] = w;
      kernels::cscale(cd(1.0 / nw, 0.0), basis[j + 1].data(), dim);
    }

    small_exp(m);
    // polish the O(1e-15) Taylor/orthogonality slack; anything larger is a
    // genuine failure and is left for the norm check to catch
    double yn = 0.0;
    for (std::size_t jj = 0; jj < m; ++jj) yn += std::norm(ysmall[jj]);
    const double scale = std::abs(yn - 1.0) < 1e-8 ? 1.0 / std::sqrt(yn) : 1.0;
    std::fill(a.begin(), a.end(), cd(0, 0));
    for (std::size_t jj = 0; jj < m; ++jj)
      kernels::caxpy(ysmall[jj] * scale, basis[jj].data(), a.data(), dim);
  };

  record(0, 0.0);
  snapshot(0.0);

  const std::size_t stride = std::max<std::size_t>(1, opts.snapshot_stride);
  for (std::size_t i = 0; i < nsteps; ++i) {
    const double t = h * static_cast<double>(i);
    if (use_lanczos) {
      lanczos_step(t);
    } else {
      rhs(a, t, k1);
      stage = a;
      kernels::caxpy(0.5 * h, k1.data(), stage.data(), dim);
      rhs(stage, t + 0.5 * h, k2);
      stage = a;
      kernels::caxpy(0.5 * h, k2.data(), stage.data(), dim);
      rhs(stage, t + 0.5 * h, k3);
      stage = a;
      kernels::caxpy(h, k3.data(), stage.data(), dim);
      rhs(stage, t + h, k4);

      kernels::caxpy(h / 6.0, k1.data(), a.data(), dim);
      kernels::caxpy(h / 3.0, k2.data(), a.data(), dim);
      kernels::caxpy(h / 3.0, k3.data(), a.data(), dim);
      kernels::caxpy(h / 6.0, k4.data(), a.data(), dim);
    }

    const double nrm = kernels::norm_sq(a.data(), dim);
    if (std::abs(nrm - 1.0) > 1e-8)
      throw SimError("propagate_dimer: norm drift beyond tolerance");

    record(i + 1, h * static_cast<double>(i + 1));
    if ((i + 1) % stride == 0 || i + 1 == nsteps)
      snapshot(h * static_cast<double>(i + 1));
  }
  return traj;
}

OneBodyRdm one_body_rdm(const DimerState& s) {
  const std::size_t nb = s.n_bosons;
  const double nd = static_cast<double>(nb);
  double nl = 0.0;
  cd cross(0.0, 0.0);
  for (std::size_t n = 0; n <= nb; ++n)
    nl += static_cast<double>(n) * std::norm(s.amplitudes[n]);
  for (std::size_t n = 0; n < nb; ++n) {
    const double nlv = static_cast<double>(n);
    cross += std::conj(s.amplitudes[n + 1]) *
             std::sqrt((nlv + 1.0) * (nd - nlv)) * s.amplitudes[n];
  }
  OneBodyRdm r;
  r.m[0][0] = nl / nd;
  r.m[1][1] = (nd - nl) / nd;
  r.m[0][1] = cross / nd;
  r.m[1][0] = std::conj(cross) / nd;
  const double trace = r.m[0][0].real() + r.m[1][1].real();
  const double half = 0.5 * trace;
  const double disc = std::sqrt(0.25 * (r.m[0][0].real() - r.m[1][1].real()) *
                                    (r.m[0][0].real() - r.m[1][1].real()) +
                                std::norm(r.m[0][1]));
  r.lambda_min = half - disc;
  // fully condensed states give an exact zero up to rounding
  if (std::abs(r.lambda_min) < 1e-14) r.lambda_min = 0.0;
  r.lambda_max = trace - r.lambda_min;
  return r;
}

FidelityResult uhlmann_fidelity(const std::vector<cd>& rho_t,
                                const std::vector<cd>& rho, std::size_t n) {
  if (rho_t.size() != n * n || rho.size() != n * n)
    throw std::invalid_argument("uhlmann_fidelity: dimension mismatch");

  auto validate = [&](const std::vector<cd>& r, const char* name) {
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += r[i * n + i].real();
    if (std::abs(tr - 1.0) > 1e-8)
      throw std::invalid_argument(std::string(name) + ": trace != 1");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        if (std::abs(r[i * n + j] - std::conj(r[j * n + i])) > 1e-8)
          throw std::invalid_argument(std::string(name) + ": not Hermitian");
  };
  validate(rho_t, "rho_T");
  validate(rho, "rho");

  auto eig_t = linalg::hermitian_eigen(rho_t, n);
  for (double v : eig_t.values)
    if (v < -1e-8) throw std::invalid_argument("rho_T: not positive semidefinite");

  // sqrt(rho_T)
  std::vector<cd> sq(n * n, cd(0, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cd acc(0, 0);
      for (std::size_t k = 0; k < n; ++k) {
        const double lam = std::max(0.0, eig_t.values[k]);
        acc += eig_t.vectors[i * n + k] * std::sqrt(lam) *
               std::conj(eig_t.vectors[j * n + k]);
      }
      sq[i * n + j] = acc;
    }

  auto eig_r = linalg::hermitian_eigen(rho, n);
  for (double v : eig_r.values)
    if (v < -1e-8) throw std::invalid_argument("rho: not positive semidefinite");

  // B = sqrt(rho_T) rho sqrt(rho_T)
  std::vector<cd> tmp(n * n, cd(0, 0)), b(n * n, cd(0, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cd acc(0, 0);
      for (std::size_t k = 0; k < n; ++k) acc += sq[i * n + k] * rho[k * n + j];
      tmp[i * n + j] = acc;
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cd acc(0, 0);
      for (std::size_t k = 0; k < n; ++k) acc += tmp[i * n + k] * sq[k * n + j];
      b[i * n + j] = acc;
    }

  auto eig_b = linalg::hermitian_eigen(b, n);
  double lmax = 0.0;
  for (double v : eig_b.values) lmax = std::max(lmax, v);
  // drop numerically-zero eigenvalues: sqrt() would otherwise turn O(1e-15)
  // noise into O(1e-8) fidelity error
  double f = 0.0;
  for (double v : eig_b.values)
    if (v > 1e-13 * std::max(lmax, 1e-30)) f += std::sqrt(v);
  f = std::min(f, 1.0 + 1e-12);
  FidelityResult res;
  res.f = f;
  res.eps = 1.0 - f * f;
  return res;
}

double dimer_overlap_fidelity(const DimerState& a, const DimerState& b) {
  const cd ov = kernels::dotc(a.amplitudes.data(), b.amplitudes.data(),
                              std::min(a.amplitudes.size(), b.amplitudes.size()));
  return std::abs(ov);
}

double dimer_energy(const DimerState& s, const DimerParams& params, double d) {
  const TridiagOp h = build_dimer_hamiltonian(params, s.n_bosons, d);
  const std::size_t dim = s.amplitudes.size();
  std::vector<cd> hx(dim);
  kernels::tridiag_matvec(h.diag.data(), h.off.data(), s.amplitudes.data(),
                          hx.data(), dim);
  return kernels::dotc(s.amplitudes.data(), hx.data(), dim).real();
}

}  // namespace bjj
