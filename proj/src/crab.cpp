#include "bjj/crab.hpp"

#include <algorithm>
#include <cmath>

#include "bjj/parallel.hpp"
#include "bjj/two_mode.hpp"

namespace bjj {

OptimizationReport crab_optimize(const CrabProblem& problem,
                                 const OptimizerConfig& config) {
  if (!problem.evaluate) throw SimError("crab_optimize: missing evaluator");
  const std::size_t n_samples =
      problem.n_samples > 0 ? problem.n_samples : problem.guess.times.size();
  const std::size_t k = problem.n_modes;

  OptimizationReport rep;
  rep.tier = problem.tier;
  rep.params_desc = problem.params_desc;
  rep.T = problem.T;
  rep.seed = config.seed;

  const std::vector<double> zero(2 * k, 0.0);
  {
    CrabAnsatz a0(problem.guess, k, config.seed, problem.d_max);
    rep.guess_cost = problem.evaluate(crab_evaluate(a0, zero, n_samples));
    rep.total_evals = 1;
  }

  if (config.max_evals == 0 || config.n_restarts == 0) {
    CrabAnsatz a0(problem.guess, k, config.seed, problem.d_max);
    rep.best_cost = rep.guess_cost;
    rep.best_coefficients = zero;
    rep.best_frequencies = a0.frequencies;
    rep.best_pulse = crab_evaluate(a0, zero, n_samples);
    rep.improved = false;
    return rep;
  }

  std::vector<RestartReport> restarts(config.n_restarts);
  run_parallel(config.jobs, config.n_restarts, [&](std::size_t r) {
    const std::uint64_t seed_r = config.seed + r;
    CrabAnsatz ansatz(problem.guess, k, seed_r, problem.d_max);
    auto objective = [&](const std::vector<double>& coeffs) {
      double clamp_excess = 0.0;
      const ControlPulse pulse =
          crab_evaluate(ansatz, coeffs, n_samples, &clamp_excess);
      double cost = problem.evaluate(pulse);
      if (config.penalty_weight > 0.0)
        cost += config.penalty_weight * clamp_excess;
      return cost;
    };
    NelderMeadResult nm = nelder_mead(objective, std::vector<double>(2 * k, 0.0),
                                      config);
    RestartReport rr;
    rr.seed = seed_r;
    rr.cost_best = nm.cost_best;
    rr.n_evals = nm.n_evals;
    rr.coefficients = nm.x_best;
    rr.frequencies = ansatz.frequencies;
    rr.trace = std::move(nm.trace);
    restarts[r] = std::move(rr);
  });

  std::size_t ibest = 0;
  for (std::size_t r = 1; r < restarts.size(); ++r)
    if (restarts[r].cost_best < restarts[ibest].cost_best) ibest = r;

  for (const auto& rr : restarts) rep.total_evals += rr.n_evals;
  rep.best_restart = ibest;
  rep.best_coefficients = restarts[ibest].coefficients;
  rep.best_frequencies = restarts[ibest].frequencies;
  {
    CrabAnsatz ansatz(problem.guess, k, restarts[ibest].seed, problem.d_max);
    rep.best_pulse = crab_evaluate(ansatz, rep.best_coefficients, n_samples);
    // reported cost is the re-simulated cost of the reported pulse
    rep.best_cost = problem.evaluate(rep.best_pulse);
  }
  rep.restarts = std::move(restarts);
  if (rep.best_cost >= rep.guess_cost) {
    // no restart beat the guess; report the guess itself
    CrabAnsatz a0(problem.guess, k, config.seed, problem.d_max);
    rep.best_cost = rep.guess_cost;
    rep.best_coefficients = zero;
    rep.best_frequencies = a0.frequencies;
    rep.best_pulse = crab_evaluate(a0, zero, n_samples);
    rep.improved = false;
  } else {
    rep.improved = true;
  }
  return rep;
}

}  // namespace bjj
