#include "bjj/two_mode.hpp"

#include <cmath>

namespace bjj {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
using cd = std::complex<double>;

struct Deriv {
  cd dl, dr;
};

// i dc/dt = H c with H = [[w, -j], [-j, -w]], w = D + du + u_eff*z.
// z is normalized by the substage norm (RK4 stages leave the unit sphere by
// O(dt)), keeping the generator well defined and |z| <= 1.
inline Deriv rhs(const TwoModeParams& p, const Control& ctl, double t,
                 cd cl, cd cr) {
  const double nl = std::norm(cl), nr = std::norm(cr);
  const double z = (nl - nr) / (nl + nr);
  const double d = ctl.at(t, z);
  const double w = d + p.du + p.u_eff * z;
  const cd minus_i(0.0, -1.0);
  return {minus_i * (w * cl - p.j * cr), minus_i * (-w * cr - p.j * cl)};
}

// the step is renormalized to h = T/round(T/dt); reject when that moves it
// by more than 5% (dt does not divide T evenly within rounding)
std::size_t step_count(double T, double dt) {
  if (!(dt > 0)) throw SimError("propagate: dt must be positive");
  if (!(T >= 0)) throw SimError("propagate: negative duration");
  auto n = static_cast<std::size_t>(std::llround(T / dt));
  if (n == 0) n = 1;
  const double h = T / static_cast<double>(n);
  if (std::abs(h - dt) > 0.05 * dt)
    throw SimError("propagate: dt does not divide T evenly");
  return n;
}

}  // namespace

double TwoModeState::norm() const {
  return std::sqrt(std::norm(c_left) + std::norm(c_right));
}

double TwoModeState::imbalance() const {
  return std::norm(c_left) - std::norm(c_right);
}

Control Control::from_pulse(ControlPulse p) {
  p.validate();
  Control c;
  c.feedback_ = false;
  c.pulse_ = std::move(p);
  return c;
}

Control Control::feedback(double u_eff, double du) {
  Control c;
  c.feedback_ = true;
  c.fb_u_ = u_eff;
  c.fb_du_ = du;
  return c;
}

Control Control::zero() {
  Control c;
  c.feedback_ = true;
  c.fb_u_ = 0.0;
  c.fb_du_ = 0.0;
  return c;
}

double Control::at(double t, double z) const {
  if (feedback_) {
    TwoModeParams p;
    p.u_eff = fb_u_;
    p.du = fb_du_;
    return ccp_feedback(z, p);
  }
  return pulse_.sample(t);
}

PulseProvenance Control::provenance() const {
  return feedback_ ? PulseProvenance::ccp_feedback : pulse_.provenance;
}

TwoModeTrajectory propagate_two_mode(const TwoModeState& s0,
                                     const TwoModeParams& params,
                                     const Control& control, double T,
                                     double dt) {
  if (!(params.j > 0)) throw SimError("propagate_two_mode: J must be > 0");
  const std::size_t n = step_count(T, dt);
  const double h = T / static_cast<double>(n);

  TwoModeTrajectory traj;
  traj.times.resize(n + 1);
  traj.states.resize(n + 1);
  traj.detunings.resize(n + 1);

  cd cl = s0.c_left, cr = s0.c_right;
  traj.times[0] = 0.0;
  traj.states[0] = {cl, cr};
  traj.detunings[0] = control.at(0.0, std::norm(cl) - std::norm(cr));

  for (std::size_t i = 0; i < n; ++i) {
    const double t = h * static_cast<double>(i);
    const Deriv k1 = rhs(params, control, t, cl, cr);
    const Deriv k2 = rhs(params, control, t + 0.5 * h, cl + 0.5 * h * k1.dl,
                         cr + 0.5 * h * k1.dr);
    const Deriv k3 = rhs(params, control, t + 0.5 * h, cl + 0.5 * h * k2.dl,
                         cr + 0.5 * h * k2.dr);
    const Deriv k4 = rhs(params, control, t + h, cl + h * k3.dl, cr + h * k3.dr);
    cl += h / 6.0 * (k1.dl + 2.0 * k2.dl + 2.0 * k3.dl + k4.dl);
    cr += h / 6.0 * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr);

    const double nrm = std::sqrt(std::norm(cl) + std::norm(cr));
    if (std::abs(nrm - 1.0) > 1e-9)
      throw SimError("propagate_two_mode: norm drift beyond tolerance");

    traj.times[i + 1] = h * static_cast<double>(i + 1);
    traj.states[i + 1] = {cl, cr};
    traj.detunings[i + 1] = control.at(traj.times[i + 1], std::norm(cl) - std::norm(cr));
  }
  return traj;
}

std::pair<double, double> bloch_angles(const TwoModeState& s) {
  double z = std::norm(s.c_left) - std::norm(s.c_right);
  z = std::clamp(z, -1.0, 1.0);
  const double theta = std::acos(z);
  if (std::sin(theta) < 1e-12) return {theta, 0.0};
  const cd rel = s.c_right * std::conj(s.c_left);
  double phi = std::arg(rel);
  if (phi <= -kPi) phi = kPi;
  return {theta, phi};
}

double overlap_fidelity(const TwoModeState& a, const TwoModeState& b) {
  const cd ov = std::conj(a.c_left) * b.c_left + std::conj(a.c_right) * b.c_right;
  return std::abs(ov);
}

BlochPath path_length(const TwoModeTrajectory& traj) {
  if (traj.states.size() < 2)
    throw SimError("path_length: need at least 2 samples");
  BlochPath bp;
  const std::size_t n = traj.states.size();
  bp.times = traj.times;
  bp.thetas.resize(n);
  bp.phis.resize(n);
  bp.speeds.resize(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [th, ph] = bloch_angles(traj.states[i]);
    bp.thetas[i] = th;
    bp.phis[i] = ph;
  }
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double f = std::min(1.0, overlap_fidelity(traj.states[i], traj.states[i + 1]));
    const double ds = 2.0 * std::acos(f);
    s += ds;
    const double dt = traj.times[i + 1] - traj.times[i];
    bp.speeds[i] = dt > 0 ? ds / dt : 0.0;
  }
  bp.path_length = s;
  return bp;
}

AngleTrajectory bloch_ode_check(const TwoModeParams& params,
                                const Control& control, double theta0,
                                double phi0, double T, double dt) {
  const double s0 = std::sin(theta0);
  if (std::abs(s0) < 1e-6)
    throw SimError("bloch_ode_check: theta0 too close to a pole");
  const std::size_t n = step_count(T, dt);
  const double h = T / static_cast<double>(n);

  AngleTrajectory traj;
  traj.times.resize(n + 1);
  traj.thetas.resize(n + 1);
  traj.phis.resize(n + 1);
  traj.times[0] = 0.0;
  traj.thetas[0] = theta0;
  traj.phis[0] = phi0;

  auto deriv = [&](double t, double th, double ph, double& dth, double& dph) {
    const double sth = std::sin(th);
    if (std::abs(sth) < 1e-8)
      throw SimError("bloch_ode_check: trajectory reached a pole");
    const double z = std::cos(th);
    const double d = control.at(t, z);
    const double delta = d + params.du + params.u_eff * z;
    dth = 2.0 * params.j * std::sin(ph);
    dph = 2.0 * delta + 2.0 * params.j * (z / sth) * std::cos(ph);
  };

  double th = theta0, ph = phi0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = h * static_cast<double>(i);
    double k1t, k1p, k2t, k2p, k3t, k3p, k4t, k4p;
    deriv(t, th, ph, k1t, k1p);
    deriv(t + 0.5 * h, th + 0.5 * h * k1t, ph + 0.5 * h * k1p, k2t, k2p);
    deriv(t + 0.5 * h, th + 0.5 * h * k2t, ph + 0.5 * h * k2p, k3t, k3p);
    deriv(t + h, th + h * k3t, ph + h * k3p, k4t, k4p);
    th += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
    ph += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    traj.times[i + 1] = h * static_cast<double>(i + 1);
    traj.thetas[i + 1] = th;
    traj.phis[i + 1] = ph;
  }
  return traj;
}

double two_mode_energy(const TwoModeState& s, const TwoModeParams& params,
                       double d) {
  const double z = s.imbalance();
  const double w = d + params.du + params.u_eff * z;
  const cd cross = std::conj(s.c_left) * s.c_right;
  return w * z - 2.0 * params.j * cross.real();
}

}  // namespace bjj
