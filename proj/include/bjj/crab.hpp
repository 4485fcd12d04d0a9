#pragma once
// CRAB pulse optimization: randomized truncated-Fourier corrections on top of
// a guess pulse, minimized by Nelder-Mead restarts over re-drawn frequency
// sets. The simulation backend is injected as an evaluator so the same
// driver serves every model tier.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bjj/nelder_mead.hpp"
#include "bjj/pulse.hpp"

namespace bjj {

struct CrabProblem {
  std::string tier;         // report metadata
  std::string params_desc;  // report metadata
  double T = 0.0;
  ControlPulse guess;
  std::size_t n_modes = 5;          // K
  double d_max = 0.0;               // clamp; 0 disables
  std::size_t n_samples = 0;        // pulse samples per evaluation; 0 = guess size
  // returns the infidelity of simulating this pulse
  std::function<double(const ControlPulse&)> evaluate;
};

struct RestartReport {
  std::uint64_t seed = 0;
  double cost_best = 0.0;
  std::size_t n_evals = 0;
  std::vector<double> coefficients;
  std::vector<double> frequencies;
  std::vector<double> trace;  // monotone best-cost trace
};

struct OptimizationReport {
  std::string tier;
  std::string params_desc;
  double T = 0.0;
  std::uint64_t seed = 0;
  double guess_cost = 0.0;
  double best_cost = 0.0;
  bool improved = false;  // best_cost < guess_cost
  std::size_t best_restart = 0;
  std::vector<double> best_coefficients;
  std::vector<double> best_frequencies;
  ControlPulse best_pulse;
  std::size_t total_evals = 0;
  std::vector<RestartReport> restarts;
};

// Runs config.n_restarts independent optimizations (frequencies re-drawn with
// seed config.seed + restart index, Nelder-Mead from the zero-coefficient
// point) and reports the global best. Restarts execute concurrently; the
// result is deterministic for a fixed config. Reports improved = false when
// no restart beats the guess (not an error).
OptimizationReport crab_optimize(const CrabProblem& problem,
                                 const OptimizerConfig& config);

}  // namespace bjj
