#pragma once
// Control pulses for the detuning D(t): constants/ramps, the analytic
// compensating pulse in scheduled and feedback form, and the randomized
// truncated-Fourier (CRAB) parametrization with boundary-preserving envelope.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bjj {

enum class PulseProvenance { constant, ccp_scheduled, ccp_feedback, crab, custom };

std::string to_string(PulseProvenance p);

struct ControlPulse {
  std::vector<double> times;   // uniform, strictly increasing, covers [0, T]
  std::vector<double> values;  // detuning samples, finite
  PulseProvenance provenance = PulseProvenance::custom;

  double duration() const { return times.empty() ? 0.0 : times.back(); }
  // clamped linear interpolation
  double sample(double t) const;
  void validate() const;  // throws on non-finite or non-uniform grids
};

ControlPulse constant_pulse(double value, double T, std::size_t n_samples);

// linear ramp D0 -> DT over [0, T]; the CRAB guess when boundary
// constraints apply
ControlPulse constrained_guess(double d0, double dT, double T,
                               std::size_t n_samples = 257);

struct TwoModeParams;  // two_mode.hpp

enum class CcpForm { paper_cos2, hamiltonian_cos };

// scheduled compensating pulse:
//   paper_cos2:      D(t) = -dU - U_eff cos^2(J t)
//   hamiltonian_cos: D(t) = -dU - U_eff cos(2 J t)
ControlPulse ccp_scheduled(const TwoModeParams& params, double T, double dt,
                           CcpForm form);

// feedback compensating pulse value, D = -dU - U_eff * z.
// Throws if |z| > 1 + 1e-6.
double ccp_feedback(double z, const TwoModeParams& params);

struct CrabAnsatz {
  ControlPulse guess;
  std::size_t n_modes = 5;             // K
  std::uint64_t seed = 0;
  double d_max = 0.0;                  // clamp |D| <= d_max; 0 disables
  std::vector<double> frequencies;     // drawn at construction

  CrabAnsatz(ControlPulse guess_, std::size_t k, std::uint64_t seed_,
             double d_max_);

  // largest coefficient 2-norm guaranteed not to engage the clamp
  double coefficient_clamp_bound() const;
};

// D(t) = guess(t) + sin^2(pi t/T) * sum_k [A_k sin(w_k t) + B_k cos(w_k t)],
// clamped to +-d_max. coeffs interleaved [A_1, B_1, A_2, B_2, ...], length 2K.
// Boundary values of the guess are preserved exactly (envelope vanishes).
// clamp_excess, when given, receives the mean squared clamp overshoot.
ControlPulse crab_evaluate(const CrabAnsatz& ansatz,
                           const std::vector<double>& coeffs,
                           std::size_t n_samples,
                           double* clamp_excess = nullptr);

// two-column (t, D) plain text
void write_pulse(std::ostream& os, const ControlPulse& p);
ControlPulse read_pulse(std::istream& is);

// time-reversed copy, D'(t) = D(T - t)
ControlPulse reversed(const ControlPulse& p);

// portable uniform double in [0,1) from a 64-bit generator state
double uniform01(std::uint64_t bits);

}  // namespace bjj
