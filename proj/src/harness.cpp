#include "bjj/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>

#include "bjj/parallel.hpp"

namespace bjj {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

std::string to_string(Tier t) {
  switch (t) {
    case Tier::two_mode: return "two-mode";
    case Tier::gpe: return "gpe";
    case Tier::dimer: return "dimer";
  }
  return "two-mode";
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::uncontrolled: return "uncontrolled";
    case Strategy::ccp_scheduled: return "ccp-scheduled";
    case Strategy::ccp_feedback: return "ccp-feedback";
    case Strategy::crab: return "crab";
    case Strategy::crab_constrained: return "crab-constrained";
  }
  return "uncontrolled";
}

Tier tier_from_string(const std::string& s) {
  if (s == "two-mode") return Tier::two_mode;
  if (s == "gpe") return Tier::gpe;
  if (s == "dimer") return Tier::dimer;
  throw ConfigError("unknown tier: " + s);
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "uncontrolled") return Strategy::uncontrolled;
  if (s == "ccp-scheduled") return Strategy::ccp_scheduled;
  if (s == "ccp-feedback") return Strategy::ccp_feedback;
  if (s == "crab") return Strategy::crab;
  if (s == "crab-constrained") return Strategy::crab_constrained;
  throw ConfigError("unknown strategy: " + s);
}

void SweepSpec::validate() const {
  if (strategies.empty()) throw ConfigError("sweep: empty strategy list");
  if (interactions.empty()) throw ConfigError("sweep: empty interaction list");
  if (t_values.empty()) throw ConfigError("sweep: empty T list");
  if (seeds.empty()) throw ConfigError("sweep: empty seed list");
  for (double t : t_values)
    if (!(t > 0)) throw ConfigError("sweep: T values must be positive");
  if (!(num.j > 0)) throw ConfigError("sweep: J must be positive");
  if (tier == Tier::dimer && num.n_bosons < 1)
    throw ConfigError("sweep: dimer needs N >= 1");
}

// ---------------------------------------------------------------------------
// cos^2(J T) fit

RabiFit fit_rabi(const std::vector<double>& eps, const std::vector<double>& ts) {
  if (eps.size() != ts.size())
    throw std::invalid_argument("fit_rabi: size mismatch");
  if (eps.size() < 5)
    throw std::invalid_argument("fit_rabi: need at least 5 points");

  double t_min = ts[0], t_max = ts[0];
  for (double t : ts) {
    t_min = std::min(t_min, t);
    t_max = std::max(t_max, t);
  }
  if (!(t_max > 0)) throw std::invalid_argument("fit_rabi: bad times");

  auto sse = [&](double j) {
    double s = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double c = std::cos(j * ts[i]);
      const double r = eps[i] - c * c;
      s += r * r;
    }
    return s;
  };

  const double t_lo = t_min > 0 ? t_min : t_max / static_cast<double>(ts.size());
  double j_lo = 0.05 * kPi / (2.0 * t_max);
  double j_hi = 4.0 * kPi / (2.0 * t_lo);

  double best_j = j_lo, best = sse(j_lo);
  const int grid_n = 2000;
  for (int g = 1; g <= grid_n; ++g) {
    const double j = j_lo + (j_hi - j_lo) * static_cast<double>(g) / grid_n;
    const double v = sse(j);
    if (v < best) {
      best = v;
      best_j = j;
    }
  }
  double a = std::max(j_lo, best_j - (j_hi - j_lo) / grid_n);
  double b = std::min(j_hi, best_j + (j_hi - j_lo) / grid_n);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = sse(x1), f2 = sse(x2);
  while (b - a > 1e-9 * std::max(1.0, b)) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a); f1 = sse(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a); f2 = sse(x2);
    }
  }
  double j_fit = 0.5 * (a + b);
  // parabolic refinement on the final bracket
  for (int it = 0; it < 3; ++it) {
    const double h = std::max(1e-9 * j_fit, 1e-12);
    const double fm = sse(j_fit - h), f0 = sse(j_fit), fp = sse(j_fit + h);
    const double denom = fm - 2.0 * f0 + fp;
    if (denom <= 0) break;
    const double step = 0.5 * h * (fm - fp) / denom;
    if (!std::isfinite(step) || std::abs(step) > h * 10) break;
    j_fit += step;
  }

  double mean = 0.0;
  for (double e : eps) mean += e;
  mean /= static_cast<double>(eps.size());
  double ss_tot = 0.0;
  for (double e : eps) ss_tot += (e - mean) * (e - mean);
  const double ss_res = sse(j_fit);

  RabiFit fit;
  fit.j_fit = j_fit;
  fit.n_points = eps.size();
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
  const bool spans_half = (t_max - t_min) >= 0.5 * kPi / (2.0 * j_fit);
  fit.poor_fit = fit.r2 < 0.9 || !spans_half;
  return fit;
}

// ---------------------------------------------------------------------------

namespace {

struct MarkData {
  double eps = 1.0;
  double path = 0.0;
  double dep_max = 0.0;
  double min_z = 1.0;
};

// results of one trajectory evaluated at all requested times
struct GroupTraj {
  double dt = 0.0;
  std::vector<double> eps;       // per step
  std::vector<double> z;         // per step
  std::vector<double> d;         // realized detuning per step
  std::vector<double> snap_t;    // snapshot times
  std::vector<double> path_cum;  // at snapshots
  std::vector<double> dep_cum;   // running max depletion at snapshots (dimer)
  double t_max = 0.0;

  MarkData at(double t_abs) const {
    MarkData m;
    const auto k = static_cast<std::size_t>(std::llround(t_abs / dt));
    const std::size_t idx = std::min(k, eps.size() - 1);
    m.eps = eps[idx];
    m.min_z = *std::min_element(z.begin(), z.begin() + idx + 1);
    // last snapshot at or before t (snapshots include all marks)
    std::size_t s = 0;
    for (std::size_t i = 0; i < snap_t.size(); ++i)
      if (snap_t[i] <= t_abs + 0.5 * dt) s = i;
    m.path = path_cum[s];
    if (!dep_cum.empty()) m.dep_max = dep_cum[s];
    return m;
  }
};

}  // namespace

struct Harness::Impl {
  SweepSpec spec;

  struct DimerPrep {
    DimerParams params;
    double u_mf = 0.0;
    double d_prep = 0.0;
    DimerState init, target;
  };
  struct GpePrep {
    DoubleWellSpec sp;
    CalibrationResult calib;
    GpeField init, target;
  };

  std::map<double, DimerPrep> dimer_preps;
  std::map<double, GpePrep> gpe_preps;
  // (strategy, interaction) -> shared T-independent trajectory
  std::map<std::pair<int, double>, std::shared_ptr<const GroupTraj>> shared;
  std::mutex mtx;
  double t_l_abs = 0.0;

  explicit Impl(const SweepSpec& s) : spec(s) { spec.validate(); }

  double dt_default() const {
    if (spec.num.dt > 0) return spec.num.dt;
    return spec.tier == Tier::gpe ? 1e-3 : 1e-3 / spec.num.j;
  }

  double t_qsl_l() {
    if (t_l_abs > 0) return t_l_abs;
    if (spec.tier == Tier::gpe) {
      DoubleWellSpec lin = spec.num.well;
      lin.ng = 0.0;
      const auto [e0, e1] = single_particle_levels(lin, spec.num.grid, 0.0);
      t_l_abs = kPi / (e1 - e0);  // pi / (2 J_lin)
    } else {
      t_l_abs = kPi / (2.0 * spec.num.j);
    }
    return t_l_abs;
  }

  const DimerPrep& dimer_prep(double lambda) {
    auto it = dimer_preps.find(lambda);
    if (it != dimer_preps.end()) return it->second;
    DimerPrep p;
    const double j = spec.num.j;
    const std::size_t nb = spec.num.n_bosons;
    p.params.j = j;
    p.params.u = nb > 1 ? 2.0 * j * lambda / static_cast<double>(nb - 1) : 0.0;
    p.params.du = spec.num.du;
    p.u_mf = 0.5 * p.params.u * static_cast<double>(nb - 1);
    p.d_prep = -(spec.num.dimer_d_prep_j * j + p.u_mf);
    p.init = dimer_ground_state(p.params, nb, p.d_prep);
    p.target = p.init.mirrored();
    return dimer_preps.emplace(lambda, std::move(p)).first->second;
  }

  const GpePrep& gpe_prep(double ng) {
    auto it = gpe_preps.find(ng);
    if (it != gpe_preps.end()) return it->second;
    GpePrep p;
    p.sp = spec.num.well;
    p.sp.ng = ng;
    CalibrationOptions copts;
    copts.d_prep = spec.num.gpe_d_prep;
    copts.dt = dt_default();
    p.calib = extract_effective_params(p.sp, spec.num.grid, ng, copts);
    p.init = imaginary_time_ground_state(p.sp, copts.d_prep, spec.num.grid);
    p.target = p.init.mirrored();
    return gpe_preps.emplace(ng, std::move(p)).first->second;
  }

  double tier_j(double interaction) {
    switch (spec.tier) {
      case Tier::gpe: return gpe_prep(interaction).calib.j_eff;
      default: return spec.num.j;
    }
  }

  // effective two-mode CCP parameters of this tier/interaction
  TwoModeParams ccp_params(double interaction) {
    switch (spec.tier) {
      case Tier::two_mode:
        return TwoModeParams::from_lambda(spec.num.j, interaction, spec.num.du);
      case Tier::dimer: {
        const auto& p = dimer_prep(interaction);
        return {p.params.j, p.u_mf, p.params.du};
      }
      case Tier::gpe: {
        const auto& p = gpe_prep(interaction);
        return {p.calib.j_eff, p.calib.u_eff_gpe, 0.0};
      }
    }
    throw SimError("unreachable");
  }

  Control strategy_control(Strategy s, double interaction, double t_max) {
    const TwoModeParams cp = ccp_params(interaction);
    switch (s) {
      case Strategy::uncontrolled:
        return Control::zero();
      case Strategy::ccp_feedback:
        return Control::feedback(cp.u_eff, cp.du);
      case Strategy::ccp_scheduled: {
        const double step = spec.tier == Tier::gpe ? dt_default() : 0.5 * dt_default();
        return Control::from_pulse(
            ccp_scheduled(cp, t_max, step, spec.num.ccp_form));
      }
      default:
        throw SimError("strategy_control: not a pulse strategy");
    }
  }

  // ---- trajectory execution -------------------------------------------

  GroupTraj run_two_mode(const Control& ctl, double interaction, double t_max) {
    const TwoModeParams params =
        TwoModeParams::from_lambda(spec.num.j, interaction, spec.num.du);
    const double dt = dt_default();
    auto traj = propagate_two_mode({{1.0, 0.0}, {0.0, 0.0}}, params, ctl,
                                   t_max, dt);
    const TwoModeState target{{0.0, 0.0}, {1.0, 0.0}};
    GroupTraj g;
    g.dt = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : dt;
    g.t_max = t_max;
    const std::size_t n = traj.states.size();
    g.eps.resize(n);
    g.z.resize(n);
    g.d = traj.detunings;
    g.snap_t.resize(n);
    g.path_cum.resize(n);
    double path = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = overlap_fidelity(target, traj.states[i]);
      g.eps[i] = 1.0 - f * f;
      g.z[i] = traj.states[i].imbalance();
      g.snap_t[i] = traj.times[i];
      if (i > 0) {
        const double ov = std::min(
            1.0, overlap_fidelity(traj.states[i - 1], traj.states[i]));
        path += 2.0 * std::acos(ov);
      }
      g.path_cum[i] = path;
    }
    return g;
  }

  GroupTraj run_dimer(const Control& ctl, double interaction, double t_max,
                      const std::vector<double>& marks) {
    const auto& prep = dimer_prep(interaction);
    const double dt = dt_default();
    DimerRunOptions opts;
    opts.snapshot_stride = spec.num.snapshot_stride;
    opts.fidelity_target = &prep.target;
    (void)marks;
    auto traj = propagate_dimer(prep.init, prep.params, ctl, t_max, dt, opts);
    GroupTraj g;
    g.dt = traj.dt_used;
    g.t_max = t_max;
    g.eps = std::move(traj.eps);
    g.z = std::move(traj.z);
    g.d = std::move(traj.d);
    g.snap_t = traj.snap_times;
    g.path_cum.resize(traj.snapshots.size());
    g.dep_cum.resize(traj.snapshots.size());
    double path = 0.0, depmax = 0.0;
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
      if (i > 0) {
        const double ov = std::min(
            1.0, dimer_overlap_fidelity(traj.snapshots[i - 1], traj.snapshots[i]));
        path += 2.0 * std::acos(ov);
      }
      depmax = std::max(depmax, one_body_rdm(traj.snapshots[i]).depletion());
      g.path_cum[i] = path;
      g.dep_cum[i] = depmax;
    }
    return g;
  }

  GroupTraj run_gpe(const Control& ctl, double interaction, double t_max) {
    const auto& prep = gpe_prep(interaction);
    const double dt = dt_default();
    GpeRunOptions opts;
    opts.snapshot_stride = spec.num.snapshot_stride;
    opts.fidelity_target = &prep.target;
    opts.snapshot_sink = gpe_sink;
    auto traj = split_step_propagate(prep.init, prep.sp, ctl, t_max, dt, opts);
    GroupTraj g;
    g.dt = traj.dt_used;
    g.t_max = t_max;
    g.eps = std::move(traj.eps);
    g.z = std::move(traj.z);
    g.d = std::move(traj.d);
    g.snap_t = std::move(traj.snap_times);
    g.path_cum = std::move(traj.path_cum);
    return g;
  }

  GroupTraj run_group(Strategy s, double interaction, double t_max,
                      const std::vector<double>& marks) {
    const Control ctl = strategy_control(s, interaction, t_max);
    switch (spec.tier) {
      case Tier::two_mode: return run_two_mode(ctl, interaction, t_max);
      case Tier::dimer: return run_dimer(ctl, interaction, t_max, marks);
      case Tier::gpe: return run_gpe(ctl, interaction, t_max);
    }
    throw SimError("unreachable");
  }

  std::shared_ptr<const GroupTraj> shared_traj(Strategy s, double interaction,
                                               double t_need) {
    const auto key = std::make_pair(static_cast<int>(s), interaction);
    {
      std::lock_guard<std::mutex> lk(mtx);
      auto it = shared.find(key);
      if (it != shared.end() && it->second->t_max >= t_need - 1e-12)
        return it->second;
    }
    std::vector<double> marks;
    for (double tv : spec.t_values) marks.push_back(tv * t_qsl_l());
    auto g = std::make_shared<const GroupTraj>(
        run_group(s, interaction, t_need, marks));
    std::lock_guard<std::mutex> lk(mtx);
    shared.insert_or_assign(key, g);
    return g;
  }

  // ---- CRAB cells -------------------------------------------------------

  ControlPulse crab_guess(Strategy s, double interaction, double t_abs) {
    const double jt = tier_j(interaction);
    if (s == Strategy::crab_constrained) {
      const std::size_t n = static_cast<std::size_t>(
          std::llround(t_abs / dt_default())) + 1;
      return constrained_guess(spec.crab.d0_j * jt, spec.crab.dT_j * jt, t_abs,
                               std::max<std::size_t>(n, 257));
    }
    if (spec.tier == Tier::two_mode)
      return constant_pulse(0.0, t_abs, 2049);
    // dimer/gpe: the recorded feedback compensating pulse
    const Control fb = strategy_control(Strategy::ccp_feedback, interaction, t_abs);
    if (spec.tier == Tier::dimer) {
      const auto& prep = dimer_prep(interaction);
      DimerRunOptions opts;
      opts.snapshot_stride = 1u << 30;
      auto traj = propagate_dimer(prep.init, prep.params, fb, t_abs,
                                  dt_default(), opts);
      ControlPulse p;
      p.times = std::move(traj.step_times);
      p.values = std::move(traj.d);
      p.provenance = PulseProvenance::ccp_feedback;
      return p;
    }
    const auto& prep = gpe_prep(interaction);
    GpeRunOptions opts;
    opts.snapshot_stride = 1u << 30;
    auto traj = split_step_propagate(prep.init, prep.sp, fb, t_abs,
                                     dt_default(), opts);
    ControlPulse p;
    p.times.resize(traj.d.size());
    for (std::size_t i = 0; i < p.times.size(); ++i)
      p.times[i] = traj.dt_used * static_cast<double>(i);
    p.values = std::move(traj.d);
    p.provenance = PulseProvenance::ccp_feedback;
    return p;
  }

  double evaluate_pulse_eps(const ControlPulse& pulse, double interaction,
                            double t_abs) {
    const Control ctl = Control::from_pulse(pulse);
    switch (spec.tier) {
      case Tier::two_mode: {
        const GroupTraj g = run_two_mode(ctl, interaction, t_abs);
        return g.eps.back();
      }
      case Tier::dimer: {
        const auto& prep = dimer_prep(interaction);
        DimerRunOptions opts;
        opts.snapshot_stride = 1u << 30;
        opts.fidelity_target = &prep.target;
        auto traj = propagate_dimer(prep.init, prep.params, ctl, t_abs,
                                    dt_default(), opts);
        return traj.eps.back();
      }
      case Tier::gpe: {
        const auto& prep = gpe_prep(interaction);
        GpeRunOptions opts;
        opts.snapshot_stride = 1u << 30;
        opts.fidelity_target = &prep.target;
        auto traj = split_step_propagate(prep.init, prep.sp, ctl, t_abs,
                                         dt_default(), opts);
        return traj.eps.back();
      }
    }
    throw SimError("unreachable");
  }

  struct CrabCellResult {
    OptimizationReport report;
    MarkData mark;
    GroupTraj traj;  // trajectory of the winning pulse
  };

  CrabCellResult run_crab_cell(Strategy s, double interaction, double t_abs,
                               std::uint64_t row_seed) {
    CrabProblem prob;
    prob.tier = to_string(spec.tier);
    prob.params_desc = "interaction=" + std::to_string(interaction);
    prob.T = t_abs;
    prob.guess = crab_guess(s, interaction, t_abs);
    prob.n_modes = spec.crab.n_modes;
    prob.d_max = spec.crab.d_max_j > 0 ? spec.crab.d_max_j * tier_j(interaction) : 0.0;
    const double dt = dt_default();
    if (spec.tier == Tier::gpe)
      prob.n_samples = static_cast<std::size_t>(std::llround(t_abs / dt)) + 1;
    else
      prob.n_samples = 2 * static_cast<std::size_t>(std::llround(t_abs / dt)) + 1;
    prob.evaluate = [&](const ControlPulse& p) {
      return evaluate_pulse_eps(p, interaction, t_abs);
    };
    OptimizerConfig oc = spec.opt;
    oc.seed = spec.opt.seed + row_seed;
    // restarts parallelize only when the sweep itself is a single job
    const std::size_t n_cells = spec.strategies.size() *
                                spec.interactions.size() *
                                spec.t_values.size() * spec.seeds.size();
    oc.jobs = n_cells > 1 ? 1 : spec.jobs;
    CrabCellResult res;
    res.report = crab_optimize(prob, oc);

    // trajectory diagnostics of the winning pulse
    const Control ctl = Control::from_pulse(res.report.best_pulse);
    switch (spec.tier) {
      case Tier::two_mode: res.traj = run_two_mode(ctl, interaction, t_abs); break;
      case Tier::dimer: res.traj = run_dimer(ctl, interaction, t_abs, {t_abs}); break;
      case Tier::gpe: res.traj = run_gpe(ctl, interaction, t_abs); break;
    }
    res.mark = res.traj.at(t_abs);
    res.mark.eps = res.report.best_cost;
    return res;
  }

  SweepRow make_row(Strategy s, double interaction, double t_over,
                    std::uint64_t seed, const MarkData& m, const char* flag) {
    SweepRow r;
    r.tier = to_string(spec.tier);
    r.strategy = to_string(s);
    r.interaction = interaction;
    r.t_over_tqsl_l = t_over;
    r.epsilon = m.eps;
    r.path_length = m.path;
    r.depletion_max = m.dep_max;
    r.has_depletion = spec.tier == Tier::dimer;
    r.j_eff = tier_j(interaction);
    r.seed = seed;
    r.flag = flag;
    return r;
  }

  CellSeries run_cell_series(Strategy s, double interaction, double t_over,
                             std::uint64_t seed) {
    const double t_abs = t_over * t_qsl_l();
    CellSeries cs;
    GroupTraj g;
    if (s == Strategy::crab || s == Strategy::crab_constrained) {
      auto cell = run_crab_cell(s, interaction, t_abs, seed);
      cs.report = cell.report;
      g = std::move(cell.traj);
      cs.row = make_row(s, interaction, t_over, seed, cell.mark,
                        cell.report.improved ? "ok" : "no-improvement");
    } else {
      g = run_group(s, interaction, t_abs, {t_abs});
      const MarkData m = g.at(t_abs);
      const char* flag = s == Strategy::uncontrolled && interaction > 0 &&
                                 m.min_z > 0
                             ? "self-trapped"
                             : "ok";
      cs.row = make_row(s, interaction, t_over, seed, m, flag);
    }
    const std::size_t stride = std::max<std::size_t>(1, spec.num.snapshot_stride);
    for (std::size_t i = 0; i < g.eps.size(); i += stride) {
      cs.t.push_back(g.dt * static_cast<double>(i));
      cs.z.push_back(g.z[i]);
      cs.eps.push_back(g.eps[i]);
      cs.d.push_back(g.d[i]);
    }
    if ((g.eps.size() - 1) % stride != 0) {
      const std::size_t i = g.eps.size() - 1;
      cs.t.push_back(g.dt * static_cast<double>(i));
      cs.z.push_back(g.z[i]);
      cs.eps.push_back(g.eps[i]);
      cs.d.push_back(g.d[i]);
    }
    return cs;
  }

  std::function<void(double, const GpeField&)> gpe_sink;

  // ---- public pieces ----------------------------------------------------

  double eps_at(Strategy s, double interaction, double t_over,
                std::uint64_t seed) {
    const double t_abs = t_over * t_qsl_l();
    if (s == Strategy::crab || s == Strategy::crab_constrained)
      return run_crab_cell(s, interaction, t_abs, seed).report.best_cost;
    if (spec.tier == Tier::two_mode) {
      // cheap tier: simulate the exact endpoint
      return run_group(s, interaction, t_abs, {t_abs}).eps.back();
    }
    const double t_need =
        std::max(t_abs, *std::max_element(spec.t_values.begin(),
                                          spec.t_values.end()) * t_qsl_l());
    return shared_traj(s, interaction, t_need)->at(t_abs).eps;
  }

  TqslEstimate extract_tqsl(const SweepResult& result, Strategy s,
                            double interaction, double threshold) {
    TqslEstimate est;
    est.threshold = threshold;
    std::vector<std::pair<double, double>> pts;  // (t_over, eps)
    const std::string sname = to_string(s);
    for (const auto& r : result.rows) {
      if (r.strategy != sname || r.interaction != interaction) continue;
      if (!std::isfinite(r.epsilon)) continue;
      pts.emplace_back(r.t_over_tqsl_l, r.epsilon);
    }
    std::sort(pts.begin(), pts.end());
    double lo = 0.0;
    bool found = false;
    for (const auto& [t, e] : pts) {
      est.min_eps = std::min(est.min_eps, e);
      if (!found && e <= threshold) {
        est.t_grid = t;
        found = true;
        break;
      }
      lo = t;
    }
    est.crossed = found;
    if (!found) return est;

    double hi = est.t_grid;
    const std::uint64_t seed = spec.seeds.front();
    for (int it = 0; it < 10; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (eps_at(s, interaction, mid, seed) <= threshold)
        hi = mid;
      else
        lo = mid;
    }
    est.t_refined = hi;
    return est;
  }

  SweepResult run() {
    SweepResult result;
    result.t_qsl_l_abs = t_qsl_l();

    // preparations are sequential (gpe calibration dominates, cached)
    for (double inter : spec.interactions) {
      if (spec.tier == Tier::dimer) dimer_prep(inter);
      if (spec.tier == Tier::gpe) {
        gpe_prep(inter);
        CalibrationEntry ce;
        ce.interaction = inter;
        ce.calib = gpe_preps.at(inter).calib;
        result.calibrations.push_back(ce);
      }
    }

    struct Job {
      Strategy strategy;
      double interaction;
      std::uint64_t seed;
      std::vector<double> t_overs;  // all T's for grouped jobs, one for crab
    };
    std::vector<Job> jobs;
    std::vector<double> sorted_t(spec.t_values);
    std::sort(sorted_t.begin(), sorted_t.end());
    for (Strategy s : spec.strategies)
      for (double inter : spec.interactions)
        for (std::uint64_t seed : spec.seeds) {
          if (s == Strategy::crab || s == Strategy::crab_constrained) {
            for (double t : sorted_t) jobs.push_back({s, inter, seed, {t}});
          } else {
            jobs.push_back({s, inter, seed, sorted_t});
          }
        }

    std::vector<std::vector<SweepRow>> job_rows(jobs.size());
    run_parallel(spec.jobs, jobs.size(), [&](std::size_t ji) {
      const Job& job = jobs[ji];
      auto& rows = job_rows[ji];
      const double t_l = t_qsl_l();
      const bool is_crab = job.strategy == Strategy::crab ||
                           job.strategy == Strategy::crab_constrained;
      try {
        if (is_crab) {
          const double t_over = job.t_overs.front();
          auto cell = run_crab_cell(job.strategy, job.interaction,
                                    t_over * t_l, job.seed);
          SweepRow r;
          r.tier = to_string(spec.tier);
          r.strategy = to_string(job.strategy);
          r.interaction = job.interaction;
          r.t_over_tqsl_l = t_over;
          r.epsilon = cell.report.best_cost;
          r.path_length = cell.mark.path;
          r.depletion_max = cell.mark.dep_max;
          r.has_depletion = spec.tier == Tier::dimer;
          r.j_eff = tier_j(job.interaction);
          r.seed = job.seed;
          r.flag = cell.report.improved ? "ok" : "no-improvement";
          rows.push_back(std::move(r));
        } else if (spec.tier == Tier::two_mode) {
          // exact endpoint per T; the tier is cheap enough that trajectory
          // sharing would only buy mark quantization error
          for (double t_over : job.t_overs) {
            const GroupTraj g = run_group(job.strategy, job.interaction,
                                          t_over * t_l, {t_over * t_l});
            const MarkData m = g.at(t_over * t_l);
            SweepRow r;
            r.tier = to_string(spec.tier);
            r.strategy = to_string(job.strategy);
            r.interaction = job.interaction;
            r.t_over_tqsl_l = t_over;
            r.epsilon = m.eps;
            r.path_length = m.path;
            r.depletion_max = m.dep_max;
            r.has_depletion = false;
            r.j_eff = tier_j(job.interaction);
            r.seed = job.seed;
            r.flag = job.strategy == Strategy::uncontrolled &&
                             job.interaction > 0 && m.min_z > 0
                         ? "self-trapped"
                         : "ok";
            rows.push_back(std::move(r));
          }
        } else {
          const double t_need = job.t_overs.back() * t_l;
          const auto g = shared_traj(job.strategy, job.interaction, t_need);
          for (double t_over : job.t_overs) {
            const MarkData m = g->at(t_over * t_l);
            SweepRow r;
            r.tier = to_string(spec.tier);
            r.strategy = to_string(job.strategy);
            r.interaction = job.interaction;
            r.t_over_tqsl_l = t_over;
            r.epsilon = m.eps;
            r.path_length = m.path;
            r.depletion_max = m.dep_max;
            r.has_depletion = spec.tier == Tier::dimer;
            r.j_eff = tier_j(job.interaction);
            r.seed = job.seed;
            r.flag = job.strategy == Strategy::uncontrolled &&
                             job.interaction > 0 && m.min_z > 0
                         ? "self-trapped"
                         : "ok";
            rows.push_back(std::move(r));
          }
        }
      } catch (const std::exception& e) {
        rows.clear();
        for (double t_over : job.t_overs) {
          SweepRow r;
          r.tier = to_string(spec.tier);
          r.strategy = to_string(job.strategy);
          r.interaction = job.interaction;
          r.t_over_tqsl_l = t_over;
          r.epsilon = std::nan("");
          r.j_eff = 0.0;
          r.seed = job.seed;
          r.flag = std::string("error:") + e.what();
          rows.push_back(std::move(r));
        }
      }
    });

    for (auto& jr : job_rows)
      for (auto& r : jr) result.rows.push_back(std::move(r));
    std::sort(result.rows.begin(), result.rows.end(),
              [](const SweepRow& a, const SweepRow& b) {
                return std::tie(a.tier, a.strategy, a.interaction,
                                a.t_over_tqsl_l, a.seed) <
                       std::tie(b.tier, b.strategy, b.interaction,
                                b.t_over_tqsl_l, b.seed);
              });

    if (spec.do_fit) {
      for (Strategy s : spec.strategies)
        for (double inter : spec.interactions) {
          std::vector<double> eps, ts;
          const std::string sname = to_string(s);
          for (const auto& r : result.rows) {
            if (r.strategy != sname || r.interaction != inter) continue;
            if (!std::isfinite(r.epsilon)) continue;
            if (r.t_over_tqsl_l < spec.fit_t_min - 1e-12 ||
                r.t_over_tqsl_l > spec.fit_t_max + 1e-12)
              continue;
            eps.push_back(r.epsilon);
            ts.push_back(r.t_over_tqsl_l * result.t_qsl_l_abs);
          }
          if (eps.size() < 5) continue;
          FitEntry fe;
          fe.strategy = sname;
          fe.interaction = inter;
          fe.fit = fit_rabi(eps, ts);
          result.fits.push_back(std::move(fe));
        }
    }

    if (spec.do_tqsl) {
      for (Strategy s : spec.strategies)
        for (double inter : spec.interactions) {
          TqslEntry te;
          te.strategy = to_string(s);
          te.interaction = inter;
          te.est = extract_tqsl(result, s, inter, spec.tqsl_threshold);
          result.tqsl.push_back(std::move(te));
        }
    }
    return result;
  }
};

Harness::Harness(const SweepSpec& spec) : impl_(std::make_unique<Impl>(spec)) {}
Harness::~Harness() = default;

SweepResult Harness::run() { return impl_->run(); }

double Harness::eps_at(Strategy strategy, double interaction, double t_over,
                       std::uint64_t seed) {
  return impl_->eps_at(strategy, interaction, t_over, seed);
}

CellSeries Harness::run_cell_series(Strategy strategy, double interaction,
                                    double t_over, std::uint64_t seed) {
  return impl_->run_cell_series(strategy, interaction, t_over, seed);
}

void Harness::set_gpe_snapshot_sink(
    std::function<void(double, const GpeField&)> sink) {
  impl_->gpe_sink = std::move(sink);
}

TqslEstimate Harness::extract_tqsl(const SweepResult& result, Strategy strategy,
                                   double interaction, double threshold) {
  return impl_->extract_tqsl(result, strategy, interaction, threshold);
}

double Harness::t_qsl_l_abs(double) { return impl_->t_qsl_l(); }

const CalibrationResult& Harness::gpe_calibration(double interaction) {
  return impl_->gpe_prep(interaction).calib;
}

SweepResult run_sweep(const SweepSpec& spec) {
  Harness h(spec);
  return h.run();
}

namespace {
std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}
}  // namespace

std::string sweep_csv(const SweepResult& result) {
  std::string out =
      "tier,strategy,interaction,T_over_TqslL,epsilon,path_length,"
      "depletion_max,J_eff,seed,flag\n";
  for (const auto& r : result.rows) {
    out += r.tier;
    out += ',';
    out += r.strategy;
    out += ',';
    out += fmt12(r.interaction);
    out += ',';
    out += fmt12(r.t_over_tqsl_l);
    out += ',';
    out += fmt12(r.epsilon);
    out += ',';
    out += fmt12(r.path_length);
    out += ',';
    if (r.has_depletion) out += fmt12(r.depletion_max);
    out += ',';
    out += fmt12(r.j_eff);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += r.flag;
    out += '\n';
  }
  return out;
}

}  // namespace bjj
