#pragma once
// Two-mode (linear and mean-field nonlinear) dynamics of the junction:
// i dc/dt = H(t,z) c with H = -J sigma_x + [D(t) + dU + U_eff z] sigma_z,
// z = |c_L|^2 - |c_R|^2, hbar = 1. Bloch-sphere geometry helpers and an
// independent angle-equation integrator used as a cross-check.

#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bjj/pulse.hpp"

namespace bjj {

struct TwoModeState {
  std::complex<double> c_left{1.0, 0.0};
  std::complex<double> c_right{0.0, 0.0};

  double norm() const;
  double imbalance() const;  // z = |c_L|^2 - |c_R|^2
};

struct TwoModeParams {
  double j = 1.0;      // tunnel coupling, > 0
  double u_eff = 0.0;  // mean-field nonlinearity UN
  double du = 0.0;     // interaction detuning
  double lambda() const { return u_eff / (2.0 * j); }

  static TwoModeParams from_lambda(double j, double lambda, double du = 0.0) {
    return {j, 2.0 * j * lambda, du};
  }
};

// Control source for propagators: a sampled pulse or the in-loop feedback law.
class Control {
 public:
  static Control from_pulse(ControlPulse p);
  static Control feedback(double u_eff, double du);
  static Control zero();

  // detuning at time t given the current imbalance z
  double at(double t, double z) const;
  bool is_feedback() const { return feedback_; }
  PulseProvenance provenance() const;

 private:
  bool feedback_ = false;
  double fb_u_ = 0.0, fb_du_ = 0.0;
  ControlPulse pulse_;
};

struct TwoModeTrajectory {
  std::vector<double> times;
  std::vector<TwoModeState> states;
  std::vector<double> detunings;  // realized D at sample times
};

// Bloch angles (theta, phi): cos(theta) = z, phi = arg(c_R) - arg(c_L) in
// (-pi, pi]; phi = 0 by convention within 1e-12 of a pole.
std::pair<double, double> bloch_angles(const TwoModeState& s);

struct BlochPath {
  std::vector<double> times;
  std::vector<double> thetas;
  std::vector<double> phis;
  std::vector<double> speeds;  // per-step Fubini-Study speed estimates
  double path_length = 0.0;    // S = sum of 2 acos|<psi_k|psi_{k+1}>|
};

// RK4 with the state-dependent z evaluated inside each substage. Returns the
// state at every grid time; throws SimError on norm drift or bad inputs.
TwoModeTrajectory propagate_two_mode(const TwoModeState& s0,
                                     const TwoModeParams& params,
                                     const Control& control, double T,
                                     double dt);

BlochPath path_length(const TwoModeTrajectory& traj);

// Fubini-Study overlap fidelity F = |<a|b>| and infidelity 1 - F^2
double overlap_fidelity(const TwoModeState& a, const TwoModeState& b);

struct FidelityResult {
  double f = 0.0;
  double eps = 0.0;  // 1 - f^2
};

// Independent integrator of the angle equations of motion
//   theta' = 2 J sin(phi)
//   phi'   = 2 [D(t) + dU + U_eff cos(theta)] + 2 J cot(theta) cos(phi)
// (coupling-rate convention matched to the Hamiltonian propagator).
// Throws SimError when the trajectory comes within 1e-8 of a pole.
struct AngleTrajectory {
  std::vector<double> times;
  std::vector<double> thetas;
  std::vector<double> phis;
};
AngleTrajectory bloch_ode_check(const TwoModeParams& params,
                                const Control& control, double theta0,
                                double phi0, double T, double dt);

// <H(t,z)> for the instantaneous generator
double two_mode_energy(const TwoModeState& s, const TwoModeParams& params,
                       double d);

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bjj
