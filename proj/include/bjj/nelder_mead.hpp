#pragma once
// Derivative-free simplex minimizer, the direct-search stage of the CRAB
// recipe. Standard reflection/expansion/contraction/shrink coefficients
// (1, 2, 0.5, 0.5); deterministic given its inputs.

#include <cstdint>
#include <functional>
#include <vector>

namespace bjj {

struct OptimizerConfig {
  std::size_t max_evals = 2000;   // per restart
  std::size_t n_restarts = 8;
  double simplex_scale = 0.5;
  double spread_tol = 1e-8;       // simplex cost spread convergence
  double target_cost = 1e-6;      // stop when reached
  std::uint64_t seed = 12345;
  double penalty_weight = 0.0;    // quadratic clamp-activation penalty
  std::size_t jobs = 0;           // 0 = hardware concurrency
};

struct NelderMeadResult {
  std::vector<double> x_best;
  double cost_best = 0.0;
  std::size_t n_evals = 0;
  std::vector<double> trace;  // best cost after each evaluation (non-increasing)
};

// Minimizes f starting from x0. Throws SimError if f returns a non-finite
// value.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0,
                             const OptimizerConfig& config);

}  // namespace bjj
