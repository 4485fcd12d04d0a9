#pragma once
// 1D Gross-Pitaevskii dynamics in a tiltable double well:
//   i dpsi/dt = [-1/2 d^2/dx^2 + V(x; D) + Ng |psi|^2] psi,  hbar = m = w = 1,
//   V(x; D) = 1/2 (|x| - a)^2 - D x/(2a)
// so the energy difference between the two well minima equals D. Imaginary
// time for ground states, Strang-split spectral stepping for real time.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "bjj/two_mode.hpp"

namespace bjj {

struct Grid1D {
  double x_min = -10.0;
  double x_max = 10.0;
  std::size_t n_points = 1024;

  Grid1D() = default;
  Grid1D(double xmin, double xmax, std::size_t n);

  double dx() const { return (x_max - x_min) / static_cast<double>(n_points); }
  double x(std::size_t i) const { return x_min + dx() * static_cast<double>(i); }
  bool operator==(const Grid1D& o) const = default;
};

struct DoubleWellSpec {
  double a = 2.5;   // half separation of the well centers
  double ng = 0.0;  // nonlinearity Ng
};

double potential(const DoubleWellSpec& spec, double d, double x);

struct GpeField {
  Grid1D grid;
  std::vector<std::complex<double>> psi;

  double norm_sq() const;  // sum |psi|^2 dx
  GpeField mirrored() const;
  double mean_x() const;
  double var_x() const;
};

struct ImagTimeOptions {
  double dtau = 1e-3;
  double tol = 1e-12;       // energy change per step
  std::size_t max_iters = 2000000;
};

// Ground state at static tilt d; deterministic Gaussian seed centered in the
// lower well (left on ties). Throws SimError on non-convergence.
GpeField imaginary_time_ground_state(const DoubleWellSpec& spec, double d,
                                     const Grid1D& grid,
                                     const ImagTimeOptions& opts = {});

struct WellPopulations {
  double n_left = 0.0;
  double n_right = 0.0;
  double z = 0.0;
};
WellPopulations well_populations(const GpeField& field);

FidelityResult gpe_fidelity(const GpeField& field, const GpeField& target);

// GPE energy functional (kinetic + potential + Ng/2 |psi|^4)
double gpe_energy(const GpeField& field, const DoubleWellSpec& spec, double d);

struct GpeRunOptions {
  std::size_t snapshot_stride = 100;
  const GpeField* fidelity_target = nullptr;
  // called at snapshot times when set (snapshot export)
  std::function<void(double, const GpeField&)> snapshot_sink;
  // override the double-well potential (tests); same length as the grid
  const std::vector<double>* potential_override = nullptr;
};

struct GpeTrajectory {
  double dt_used = 0.0;
  std::size_t n_steps = 0;
  std::vector<double> z;    // imbalance per step (n_steps + 1)
  std::vector<double> d;    // realized detuning per step
  std::vector<double> eps;  // 1 - F^2 vs target per step (optional)
  std::vector<double> snap_times;
  std::vector<double> path_cum;  // cumulative Fubini-Study length at snap_times
  GpeField final_field;
  double max_boundary_amp = 0.0;
  double max_norm_drift = 0.0;
};

// Strang splitting: half potential+nonlinearity step, full spectral kinetic
// step, half potential step. Tabulated pulses are sampled at the step
// midpoint; the feedback law uses the imbalance at the step start. Throws
// SimError when |psi| at the box edge exceeds 1e-4 or on norm drift.
GpeTrajectory split_step_propagate(const GpeField& f0, const DoubleWellSpec& spec,
                                   const Control& control, double T, double dt,
                                   const GpeRunOptions& opts = {});

struct CalibrationResult {
  double j_eff = 0.0;      // effective tunnel coupling at this Ng
  double u_eff_gpe = 0.0;  // feedback-CCP coefficient minimizing infidelity
  double j_lin = 0.0;      // Ng = 0 splitting / 2 on the same grid
  double residual = 0.0;   // rms of z(t) - cos(2 J_eff t) over the fit window
  double eps_at_tqsl = 0.0;
  std::size_t runs = 0;
  double d_prep = 0.0;
};

struct CalibrationError : SimError {
  explicit CalibrationError(const std::string& msg, double residual_)
      : SimError(msg), residual(residual_) {}
  double residual;
};

struct CalibrationOptions {
  double d_prep = -0.5;
  double dt = 1e-3;
  double golden_tol = 1e-4;
  double residual_threshold = 0.05;
};

// Effective two-mode parameters of the double well. Ng = 0: J from the
// single-particle splitting. Ng > 0: U_eff_gpe by golden-section on the
// feedback-CCP infidelity, J_eff by fitting z(t) = cos(2 J_eff t) on the
// compensated trajectory. Throws CalibrationError when the fit residual
// exceeds the threshold.
CalibrationResult extract_effective_params(const DoubleWellSpec& spec,
                                           const Grid1D& grid, double ng,
                                           const CalibrationOptions& opts = {});

// two lowest single-particle eigenvalues of -1/2 d^2/dx^2 + V(x; d) on the grid
std::pair<double, double> single_particle_levels(const DoubleWellSpec& spec,
                                                 const Grid1D& grid, double d);

}  // namespace bjj
