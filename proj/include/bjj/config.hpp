#pragma once
// TOML-shaped run configuration: sections [model], [control], [optimize],
// [sweep], [output]; every key optional with documented defaults; unknown
// keys rejected with the offending key path. BJJ_QSL_SEED in the environment
// overrides the configured optimizer seed.

#include <cstdint>
#include <string>
#include <vector>

#include "bjj/harness.hpp"

namespace bjj {

struct RunConfig {
  // [model]
  Tier tier = Tier::two_mode;
  double j = 1.0;
  double du = 0.0;
  std::size_t n_bosons = 100;
  double dt = 0.0;  // 0 -> tier default
  double a = 2.5;
  double x_min = -10.0, x_max = 10.0;
  std::size_t n_points = 1024;
  std::size_t snapshot_stride = 100;
  double gpe_d_prep = -0.5;
  double dimer_d_prep_j = 20.0;

  // [control]
  Strategy strategy = Strategy::ccp_feedback;
  CcpForm ccp_form = CcpForm::hamiltonian_cos;
  std::size_t crab_modes = 5;
  double d_max_j = 20.0;
  double d0_j = 2.0;
  double dT_j = -2.0;

  // [optimize]
  std::size_t max_evals = 2000;
  std::size_t n_restarts = 8;
  double simplex_scale = 0.5;
  double target_cost = 1e-6;
  double spread_tol = 1e-8;
  std::uint64_t seed = 12345;
  double penalty_weight = 0.0;

  // [sweep]
  std::vector<std::string> strategies{"ccp-feedback"};
  std::vector<double> interactions{0.0};
  std::vector<double> t_values{1.0};
  std::vector<std::uint64_t> seeds{1};
  double threshold = 0.01;
  bool fit = false;
  bool tqsl = false;
  double fit_t_min = 0.2, fit_t_max = 1.2;
  std::size_t jobs = 0;

  // [output]
  std::string out_dir = "out";
  std::string csv_name = "sweep.csv";
  std::string summary_name = "summary.json";
  bool series = false;
  bool snapshots = false;
};

// Parses the TOML-shaped text; throws ConfigError naming the offending key
// path on unknown keys or malformed values.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);  // throws ConfigError

// Canonical re-serialization (fixed key order, round-trip exact floats);
// parse(serialize(c)) == c and serialize is idempotent after the first
// normalization.
std::string serialize_config(const RunConfig& c);

// FNV-1a hash of the canonical serialization, for provenance records
std::uint64_t config_hash(const RunConfig& c);

// applies the BJJ_QSL_SEED environment override, if present
void apply_env_seed(RunConfig& c);

SweepSpec to_sweep_spec(const RunConfig& c);

}  // namespace bjj
