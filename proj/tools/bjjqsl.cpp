// Command-line entry point: simulate | optimize | sweep | calibrate.
// Exit codes: 0 ok, 1 config error, 2 runtime error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "bjj/config.hpp"
#include "bjj/harness.hpp"
#include "bjj/kernels.hpp"
#include "bjj/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw bjj::SimError("cannot write " + path.string());
  f << content;
}

json provenance(const bjj::RunConfig& cfg) {
  json j;
  j["code_version"] = bjj::kVersion;
  j["kernel_backend"] = bjj::kernels::backend_name();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(bjj::config_hash(cfg)));
  j["config_hash"] = buf;
  j["seed"] = cfg.seed;
  return j;
}

json row_json(const bjj::SweepRow& r) {
  json j;
  j["tier"] = r.tier;
  j["strategy"] = r.strategy;
  j["interaction"] = r.interaction;
  j["T_over_TqslL"] = r.t_over_tqsl_l;
  j["epsilon"] = r.epsilon;
  j["path_length"] = r.path_length;
  if (r.has_depletion) j["depletion_max"] = r.depletion_max;
  j["J_eff"] = r.j_eff;
  j["seed"] = r.seed;
  j["flag"] = r.flag;
  return j;
}

json report_json(const bjj::OptimizationReport& rep) {
  json j;
  j["tier"] = rep.tier;
  j["params"] = rep.params_desc;
  j["T"] = rep.T;
  j["seed"] = rep.seed;
  j["guess_cost"] = rep.guess_cost;
  j["best_cost"] = rep.best_cost;
  j["improved"] = rep.improved;
  j["best_restart"] = rep.best_restart;
  j["coefficients"] = rep.best_coefficients;
  j["frequencies"] = rep.best_frequencies;
  j["n_evals"] = rep.total_evals;
  json traces = json::array();
  for (const auto& rr : rep.restarts) {
    json t;
    t["seed"] = rr.seed;
    t["cost_best"] = rr.cost_best;
    t["n_evals"] = rr.n_evals;
    // decimated monotone trace
    json tr = json::array();
    const std::size_t stride = std::max<std::size_t>(1, rr.trace.size() / 100);
    for (std::size_t i = 0; i < rr.trace.size(); i += stride) tr.push_back(rr.trace[i]);
    if (!rr.trace.empty()) tr.push_back(rr.trace.back());
    t["trace"] = tr;
    traces.push_back(t);
  }
  j["restart_traces"] = traces;
  return j;
}

std::string series_csv(const bjj::CellSeries& cs) {
  std::string out = "t,z,epsilon,D\n";
  for (std::size_t i = 0; i < cs.t.size(); ++i) {
    out += fmt12(cs.t[i]);
    out += ',';
    out += fmt12(cs.z[i]);
    out += ',';
    out += fmt12(cs.eps[i]);
    out += ',';
    out += fmt12(cs.d[i]);
    out += '\n';
  }
  return out;
}

json fits_json(const bjj::SweepResult& res) {
  json arr = json::array();
  for (const auto& fe : res.fits) {
    json j;
    j["strategy"] = fe.strategy;
    j["interaction"] = fe.interaction;
    j["J_fit"] = fe.fit.j_fit;
    j["R2"] = fe.fit.r2;
    j["poor_fit"] = fe.fit.poor_fit;
    j["n_points"] = fe.fit.n_points;
    arr.push_back(j);
  }
  return arr;
}

json tqsl_json(const bjj::SweepResult& res) {
  json arr = json::array();
  for (const auto& te : res.tqsl) {
    json j;
    j["strategy"] = te.strategy;
    j["interaction"] = te.interaction;
    j["crossed"] = te.est.crossed;
    j["threshold"] = te.est.threshold;
    j["T_grid_over_TqslL"] = te.est.t_grid;
    j["T_refined_over_TqslL"] = te.est.t_refined;
    j["min_eps"] = te.est.min_eps;
    arr.push_back(j);
  }
  return arr;
}

json calib_json(const bjj::SweepResult& res) {
  json arr = json::array();
  for (const auto& ce : res.calibrations) {
    json j;
    j["interaction"] = ce.interaction;
    j["J_eff"] = ce.calib.j_eff;
    j["U_eff_gpe"] = ce.calib.u_eff_gpe;
    j["J_lin"] = ce.calib.j_lin;
    j["residual"] = ce.calib.residual;
    j["eps_at_tqsl"] = ce.calib.eps_at_tqsl;
    j["runs"] = ce.calib.runs;
    j["D_prep"] = ce.calib.d_prep;
    arr.push_back(j);
  }
  return arr;
}

struct CliFlags {
  std::string config_path;
  std::string tier, strategy;
  double t_over = -1.0;
  double interaction = std::nan("");
  std::string out_dir;
  std::size_t jobs = 0;
  bool jobs_set = false;
};

bjj::RunConfig effective_config(const CliFlags& fl) {
  bjj::RunConfig cfg;
  if (!fl.config_path.empty()) cfg = bjj::load_config(fl.config_path);
  bjj::apply_env_seed(cfg);
  if (!fl.tier.empty()) cfg.tier = bjj::tier_from_string(fl.tier);
  if (!fl.strategy.empty()) cfg.strategy = bjj::strategy_from_string(fl.strategy);
  if (fl.t_over > 0) cfg.t_values = {fl.t_over};
  if (!std::isnan(fl.interaction)) cfg.interactions = {fl.interaction};
  if (!fl.out_dir.empty()) cfg.out_dir = fl.out_dir;
  if (fl.jobs_set) cfg.jobs = fl.jobs;
  return cfg;
}

void attach_snapshot_sink(bjj::Harness& h, const bjj::RunConfig& cfg) {
  if (!cfg.snapshots || cfg.tier != bjj::Tier::gpe) return;
  const fs::path dir = fs::path(cfg.out_dir) / "snapshots";
  fs::create_directories(dir);
  auto counter = std::make_shared<std::size_t>(0);
  h.set_gpe_snapshot_sink([dir, counter](double t, const bjj::GpeField& f) {
    char name[64];
    std::snprintf(name, sizeof name, "snap_%06zu.txt", (*counter)++);
    std::ofstream os(dir / name);
    os << "# t = " << fmt12(t) << "\n";
    for (std::size_t i = 0; i < f.psi.size(); ++i)
      os << fmt12(f.grid.x(i)) << " " << fmt12(f.psi[i].real()) << " "
         << fmt12(f.psi[i].imag()) << "\n";
  });
}

int cmd_simulate(const CliFlags& fl) {
  const bjj::RunConfig cfg = effective_config(fl);
  const bjj::SweepSpec spec = bjj::to_sweep_spec(cfg);
  spec.validate();
  bjj::Harness h(spec);
  attach_snapshot_sink(h, cfg);
  const double t_over = cfg.t_values.front();
  const double inter = cfg.interactions.front();
  const auto cs = h.run_cell_series(cfg.strategy, inter, t_over,
                                    spec.seeds.front());

  const fs::path dir(cfg.out_dir);
  write_file(dir / "series.csv", series_csv(cs));
  json summary = provenance(cfg);
  summary["cell"] = row_json(cs.row);
  summary["T_qsl_L"] = h.t_qsl_l_abs(inter);
  summary["epsilon_final"] = cs.row.epsilon;
  summary["min_z"] = *std::min_element(cs.z.begin(), cs.z.end());
  summary["min_left_population"] =
      0.5 * (1.0 + *std::min_element(cs.z.begin(), cs.z.end()));
  summary["self_trapped"] = cs.row.flag == "self-trapped";
  if (cs.report) summary["optimization"] = report_json(*cs.report);
  if (cfg.tier == bjj::Tier::gpe) {
    const auto& c = h.gpe_calibration(inter);
    summary["calibration"] = {{"J_eff", c.j_eff},
                              {"U_eff_gpe", c.u_eff_gpe},
                              {"J_lin", c.j_lin},
                              {"residual", c.residual}};
  }
  write_file(dir / cfg.summary_name, summary.dump(2) + "\n");
  std::cout << "epsilon_final = " << fmt12(cs.row.epsilon) << "\n";
  return 0;
}

int cmd_optimize(const CliFlags& fl) {
  bjj::RunConfig cfg = effective_config(fl);
  if (cfg.strategy != bjj::Strategy::crab &&
      cfg.strategy != bjj::Strategy::crab_constrained)
    cfg.strategy = bjj::Strategy::crab;
  const bjj::SweepSpec spec = bjj::to_sweep_spec(cfg);
  spec.validate();
  bjj::Harness h(spec);
  const double t_over = cfg.t_values.front();
  const double inter = cfg.interactions.front();
  const auto cs = h.run_cell_series(cfg.strategy, inter, t_over,
                                    spec.seeds.front());

  const fs::path dir(cfg.out_dir);
  std::ostringstream pulse_text;
  bjj::write_pulse(pulse_text, cs.report->best_pulse);
  write_file(dir / "optimal_pulse.txt", pulse_text.str());
  json summary = provenance(cfg);
  summary["cell"] = row_json(cs.row);
  summary["optimization"] = report_json(*cs.report);
  write_file(dir / "report.json", report_json(*cs.report).dump(2) + "\n");
  write_file(dir / cfg.summary_name, summary.dump(2) + "\n");
  write_file(dir / "series.csv", series_csv(cs));
  std::cout << "best_cost = " << fmt12(cs.report->best_cost)
            << " (guess " << fmt12(cs.report->guess_cost) << ")\n";
  return 0;
}

int cmd_sweep(const CliFlags& fl) {
  const bjj::RunConfig cfg = effective_config(fl);
  const bjj::SweepSpec spec = bjj::to_sweep_spec(cfg);
  spec.validate();
  bjj::Harness h(spec);
  const bjj::SweepResult res = h.run();
  bool any_ok = false;
  for (const auto& r : res.rows)
    if (std::isfinite(r.epsilon)) any_ok = true;

  const fs::path dir(cfg.out_dir);
  write_file(dir / cfg.csv_name, bjj::sweep_csv(res));
  json summary = provenance(cfg);
  summary["T_qsl_L"] = res.t_qsl_l_abs;
  summary["n_rows"] = res.rows.size();
  summary["fits"] = fits_json(res);
  summary["tqsl"] = tqsl_json(res);
  summary["calibrations"] = calib_json(res);
  write_file(dir / cfg.summary_name, summary.dump(2) + "\n");

  if (cfg.series) {
    for (const auto& strategy : cfg.strategies)
      for (double inter : cfg.interactions)
        for (double t : cfg.t_values) {
          const auto cs = h.run_cell_series(bjj::strategy_from_string(strategy),
                                            inter, t, spec.seeds.front());
          char name[128];
          std::snprintf(name, sizeof name, "series_%s_%g_%g.csv",
                        strategy.c_str(), inter, t);
          write_file(dir / name, series_csv(cs));
        }
  }
  std::cout << "rows = " << res.rows.size() << "\n";
  if (!any_ok) {
    std::cerr << "runtime error: every sweep cell failed\n";
    return 2;
  }
  return 0;
}

int cmd_calibrate(const CliFlags& fl) {
  const bjj::RunConfig cfg = effective_config(fl);
  if (cfg.tier != bjj::Tier::gpe)
    throw bjj::ConfigError("calibrate: tier must be gpe");
  const bjj::SweepSpec spec = bjj::to_sweep_spec(cfg);
  bjj::Harness h(spec);
  json arr = json::array();
  for (double inter : cfg.interactions) {
    const auto& c = h.gpe_calibration(inter);
    json j;
    j["Ng"] = inter;
    j["J_eff"] = c.j_eff;
    j["U_eff_gpe"] = c.u_eff_gpe;
    j["J_lin"] = c.j_lin;
    j["residual"] = c.residual;
    j["eps_at_tqsl"] = c.eps_at_tqsl;
    j["runs"] = c.runs;
    arr.push_back(j);
    std::cout << "Ng = " << inter << ": J_eff = " << fmt12(c.j_eff)
              << ", U_eff_gpe = " << fmt12(c.u_eff_gpe) << "\n";
  }
  json summary = provenance(cfg);
  summary["calibrations"] = arr;
  write_file(fs::path(cfg.out_dir) / "calibration.json", summary.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bosonic Josephson junction QSL simulator and pulse optimizer"};
  app.require_subcommand(1);

  CliFlags fl;
  auto add_common = [&](CLI::App* sub, bool with_cell_flags) {
    sub->add_option("-c,--config", fl.config_path, "TOML config file");
    sub->add_option("--out", fl.out_dir, "output directory");
    sub->add_option("--jobs", fl.jobs, "worker pool size (0 = cores)")
        ->each([&](const std::string&) { fl.jobs_set = true; });
    if (with_cell_flags) {
      sub->add_option("--tier", fl.tier, "two-mode | gpe | dimer");
      sub->add_option("--strategy", fl.strategy,
                      "uncontrolled | ccp-scheduled | ccp-feedback | crab | "
                      "crab-constrained");
      sub->add_option("--T", fl.t_over, "transfer time in units of T_qsl_L");
      sub->add_option("--interaction", fl.interaction,
                      "Lambda (two-mode, dimer) or Ng (gpe)");
    }
  };

  auto* sim = app.add_subcommand("simulate", "run one cell, write time series");
  add_common(sim, true);
  auto* opt = app.add_subcommand("optimize", "CRAB-optimize one cell");
  add_common(opt, true);
  auto* swp = app.add_subcommand("sweep", "run a sweep from the config");
  add_common(swp, false);
  auto* cal = app.add_subcommand("calibrate", "extract effective GPE parameters");
  add_common(cal, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(fl);
    if (opt->parsed()) return cmd_optimize(fl);
    if (swp->parsed()) return cmd_sweep(fl);
    if (cal->parsed()) return cmd_calibrate(fl);
  } catch (const bjj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const CLI::Error& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
