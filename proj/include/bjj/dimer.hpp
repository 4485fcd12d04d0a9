#pragma once
// Exact dynamics of N bosons on two sites (Bose-Hubbard dimer), the
// many-body tier of the study. Fock basis |n, N-n> with n = bosons in the
// left mode; the Hamiltonian is real symmetric tridiagonal:
//   H = -J (bL^+ bR + bR^+ bL) + (u/2)[nL(nL-1) + nR(nR-1)] + D (nL - nR).

#include <complex>
#include <cstddef>
#include <vector>

#include "bjj/two_mode.hpp"

namespace bjj {

struct DimerParams {
  double j = 1.0;  // hopping, > 0
  double u = 0.0;  // per-pair interaction; mean-field sigma_z coefficient
                   // is u(N-1)/2
  double du = 0.0; // static interaction-detuning bias, adds to D(t)
};

struct DimerState {
  std::vector<std::complex<double>> amplitudes;  // length N+1, index n = n_left
  std::size_t n_bosons = 0;

  double norm_sq() const;
  double imbalance() const;  // z = <nL - nR>/N
  DimerState mirrored() const;  // parity reflection n -> N-n
};

struct TridiagOp {
  std::vector<double> diag;
  std::vector<double> off;  // off[n] couples n and n+1, value -J sqrt((n+1)(N-n))
};

TridiagOp build_dimer_hamiltonian(const DimerParams& params, std::size_t n_bosons,
                                  double d);

// Ground state at a static preparation bias d_prep (plus params.du).
// Phase fixed so the largest-magnitude amplitude is real positive.
// Throws SimError on a degenerate ground state.
DimerState dimer_ground_state(const DimerParams& params, std::size_t n_bosons,
                              double d_prep);

enum class DimerStepper { automatic, rk4, lanczos };

struct DimerRunOptions {
  std::size_t snapshot_stride = 100;
  const DimerState* fidelity_target = nullptr;  // enables eps series
  DimerStepper stepper = DimerStepper::automatic;
};

struct DimerTrajectory {
  std::vector<double> snap_times;
  std::vector<DimerState> snapshots;   // includes initial and final states
  std::vector<double> step_times;      // every integrator step
  std::vector<double> z;               // imbalance per step
  std::vector<double> d;               // realized detuning per step
  std::vector<double> eps;             // 1 - F^2 vs target per step (optional)
  double dt_used = 0.0;
};

// RK4 with the diagonal energy expectation subtracted (global phase) and the
// step capped so the integrator's norm error stays below 1e-10 over the run.
DimerTrajectory propagate_dimer(const DimerState& s0, const DimerParams& params,
                                const Control& control, double T, double dt,
                                const DimerRunOptions& opts = {});

struct OneBodyRdm {
  // rho = [[<nL>, <bL^+ bR>], [conj, <nR>]] / N
  std::complex<double> m[2][2];
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double depletion() const { return lambda_min; }
};

OneBodyRdm one_body_rdm(const DimerState& s);

// Uhlmann fidelity F = Tr sqrt(sqrt(rho_T) rho sqrt(rho_T)) for Hermitian PSD
// unit-trace matrices (row-major, dimension n). Reduces to |<psi_T|psi>| for
// pure inputs. Throws on non-PSD input beyond 1e-8 or dimension mismatch.
FidelityResult uhlmann_fidelity(const std::vector<std::complex<double>>& rho_t,
                                const std::vector<std::complex<double>>& rho,
                                std::size_t n);

double dimer_overlap_fidelity(const DimerState& a, const DimerState& b);

// <H> for conservation checks
double dimer_energy(const DimerState& s, const DimerParams& params, double d);

}  // namespace bjj
