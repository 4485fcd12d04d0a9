#pragma once
// Sweep orchestration over transfer time, interaction strength, model tier
// and control strategy; cos^2(JT) fitting; threshold-crossing extraction of
// the minimal transfer time.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bjj/crab.hpp"
#include "bjj/dimer.hpp"
#include "bjj/gpe.hpp"
#include "bjj/nelder_mead.hpp"
#include "bjj/two_mode.hpp"

namespace bjj {

enum class Tier { two_mode, gpe, dimer };
enum class Strategy { uncontrolled, ccp_scheduled, ccp_feedback, crab, crab_constrained };

std::string to_string(Tier t);
std::string to_string(Strategy s);
Tier tier_from_string(const std::string& s);
Strategy strategy_from_string(const std::string& s);

struct NumericalSettings {
  double j = 1.0;                  // two-mode / dimer coupling
  double du = 0.0;
  std::size_t n_bosons = 100;      // dimer
  double dt = 0.0;                 // 0 -> tier default (1e-3/J, 1e-3)
  DoubleWellSpec well{};           // gpe geometry (Ng comes from `interaction`)
  Grid1D grid{};
  double gpe_d_prep = -0.5;
  double dimer_d_prep_j = 20.0;    // |bias| in units of J, interaction-compensated
  CcpForm ccp_form = CcpForm::hamiltonian_cos;
  std::size_t snapshot_stride = 100;
};

struct CrabSettings {
  std::size_t n_modes = 5;
  double d_max_j = 20.0;  // clamp in units of J (J_eff for gpe); 0 disables
  double d0_j = 2.0;      // constrained-guess boundary values, units of J
  double dT_j = -2.0;
};

struct SweepSpec {
  Tier tier = Tier::two_mode;
  std::vector<Strategy> strategies{Strategy::uncontrolled};
  std::vector<double> interactions{0.0};   // Lambda (two-mode, dimer) or Ng (gpe)
  std::vector<double> t_values{1.0};       // units of T_qsl_L
  std::vector<std::uint64_t> seeds{1};
  double tqsl_threshold = 0.01;
  bool do_fit = false;
  bool do_tqsl = false;
  double fit_t_min = 0.2, fit_t_max = 1.2;  // fit window, units of T_qsl_L
  NumericalSettings num;
  OptimizerConfig opt;
  CrabSettings crab;
  std::size_t jobs = 0;

  void validate() const;  // throws ConfigError on empty lists etc.
};

struct SweepRow {
  std::string tier;
  std::string strategy;
  double interaction = 0.0;
  double t_over_tqsl_l = 0.0;
  double epsilon = 0.0;
  double path_length = 0.0;
  double depletion_max = 0.0;
  bool has_depletion = false;
  double j_eff = 0.0;
  std::uint64_t seed = 0;
  std::string flag;  // "ok", "self-trapped", "no-improvement", "error:..."
};

struct RabiFit {
  double j_fit = 0.0;
  double r2 = 0.0;
  bool poor_fit = false;
  std::size_t n_points = 0;
};

struct FitEntry {
  std::string strategy;
  double interaction = 0.0;
  RabiFit fit;
};

struct TqslEstimate {
  bool crossed = false;
  double t_grid = 0.0;     // smallest grid T with eps <= threshold (units T_qsl_L)
  double t_refined = 0.0;  // bisection-refined (<= 10 steps)
  double min_eps = 1.0;    // smallest observed eps (for the no-crossing flag)
  double threshold = 0.01;
};

struct TqslEntry {
  std::string strategy;
  double interaction = 0.0;
  TqslEstimate est;
};

struct CalibrationEntry {
  double interaction = 0.0;
  CalibrationResult calib;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<FitEntry> fits;
  std::vector<TqslEntry> tqsl;
  std::vector<CalibrationEntry> calibrations;  // gpe tier only
  double t_qsl_l_abs = 0.0;                    // absolute linear QSL time
};

// Least-squares fit of eps(T) = cos^2(J T): golden-section on J over a
// bracketed range with parabolic refinement. Throws on fewer than 5 points;
// returns poor_fit instead of throwing when R^2 < 0.9 or the data spans less
// than half a Rabi period.
RabiFit fit_rabi(const std::vector<double>& eps, const std::vector<double>& ts);

struct CellSeries {
  std::vector<double> t;    // decimated sample times
  std::vector<double> z;
  std::vector<double> eps;
  std::vector<double> d;
  SweepRow row;
  std::optional<OptimizationReport> report;  // crab strategies only
};

class Harness {
 public:
  explicit Harness(const SweepSpec& spec);
  ~Harness();

  SweepResult run();

  // continuous-in-T infidelity for one cell; used by the bisection refinement
  // and the acceptance suite
  double eps_at(Strategy strategy, double interaction, double t_over,
                std::uint64_t seed);

  // one cell with its decimated observable time series (t, z, eps, D)
  CellSeries run_cell_series(Strategy strategy, double interaction,
                             double t_over, std::uint64_t seed);

  TqslEstimate extract_tqsl(const SweepResult& result, Strategy strategy,
                            double interaction, double threshold);

  double t_qsl_l_abs(double interaction);
  const CalibrationResult& gpe_calibration(double interaction);

  // gpe snapshot export hook used by the CLI (--snapshots)
  void set_gpe_snapshot_sink(std::function<void(double, const GpeField&)> sink);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Convenience wrapper: build a harness, run the sweep (with fits and T_QSL
// extraction when requested).
SweepResult run_sweep(const SweepSpec& spec);

// CSV with the fixed header
//   tier,strategy,interaction,T_over_TqslL,epsilon,path_length,
//   depletion_max,J_eff,seed,flag
// 12 significant digits, empty depletion for tiers without it.
std::string sweep_csv(const SweepResult& result);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bjj
