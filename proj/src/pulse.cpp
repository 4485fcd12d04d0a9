#include "bjj/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include "bjj/two_mode.hpp"

namespace bjj {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

std::string to_string(PulseProvenance p) {
  switch (p) {
    case PulseProvenance::constant: return "constant";
    case PulseProvenance::ccp_scheduled: return "ccp-scheduled";
    case PulseProvenance::ccp_feedback: return "ccp-feedback";
    case PulseProvenance::crab: return "crab";
    case PulseProvenance::custom: return "custom";
  }
  return "custom";
}

double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double ControlPulse::sample(double t) const {
  if (times.empty()) return 0.0;
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const double t0 = times.front();
  const double step = times[1] - times[0];
  const double x = (t - t0) / step;
  std::size_t i = static_cast<std::size_t>(x);
  if (i >= times.size() - 1) i = times.size() - 2;
  const double w = (t - times[i]) / step;
  return values[i] * (1.0 - w) + values[i + 1] * w;
}

void ControlPulse::validate() const {
  if (times.size() != values.size())
    throw std::invalid_argument("ControlPulse: times/values size mismatch");
  if (times.size() < 2) throw std::invalid_argument("ControlPulse: too short");
  const double step = times[1] - times[0];
  if (!(step > 0)) throw std::invalid_argument("ControlPulse: non-increasing grid");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw std::invalid_argument("ControlPulse: non-finite value");
    if (i > 0 && std::abs((times[i] - times[i - 1]) - step) > 1e-9 * std::max(1.0, step))
      throw std::invalid_argument("ControlPulse: non-uniform grid");
  }
}

namespace {
ControlPulse make_grid(double T, std::size_t n_samples) {
  if (n_samples < 2) n_samples = 2;
  ControlPulse p;
  p.times.resize(n_samples);
  p.values.resize(n_samples);
  const double step = T / static_cast<double>(n_samples - 1);
  for (std::size_t i = 0; i < n_samples; ++i)
    p.times[i] = step * static_cast<double>(i);
  p.times.back() = T;
  return p;
}
}  // namespace

ControlPulse constant_pulse(double value, double T, std::size_t n_samples) {
  ControlPulse p = make_grid(T, n_samples);
  std::fill(p.values.begin(), p.values.end(), value);
  p.provenance = PulseProvenance::constant;
  return p;
}

ControlPulse constrained_guess(double d0, double dT, double T,
                               std::size_t n_samples) {
  ControlPulse p = make_grid(T, n_samples);
  const std::size_t n = p.times.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(n - 1);
    p.values[i] = d0 + (dT - d0) * w;
  }
  p.provenance = PulseProvenance::custom;
  return p;
}

ControlPulse ccp_scheduled(const TwoModeParams& params, double T, double dt,
                           CcpForm form) {
  if (!(T > 0) || !(dt > 0)) throw std::invalid_argument("ccp_scheduled: bad T/dt");
  const std::size_t n = static_cast<std::size_t>(std::llround(T / dt)) + 1;
  ControlPulse p = make_grid(T, std::max<std::size_t>(n, 2));
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    const double t = p.times[i];
    const double sched = form == CcpForm::paper_cos2
                             ? std::cos(params.j * t) * std::cos(params.j * t)
                             : std::cos(2.0 * params.j * t);
    p.values[i] = -params.du - params.u_eff * sched;
  }
  p.provenance = PulseProvenance::ccp_scheduled;
  return p;
}

double ccp_feedback(double z, const TwoModeParams& params) {
  if (std::abs(z) > 1.0 + 1e-6)
    throw std::invalid_argument("ccp_feedback: |z| > 1 + 1e-6");
  return -params.du - params.u_eff * z;
}

CrabAnsatz::CrabAnsatz(ControlPulse guess_, std::size_t k, std::uint64_t seed_,
                       double d_max_)
    : guess(std::move(guess_)), n_modes(k), seed(seed_), d_max(d_max_) {
  guess.validate();
  const double T = guess.duration();
  std::mt19937_64 gen(seed);
  frequencies.resize(n_modes);
  for (std::size_t m = 0; m < n_modes; ++m) {
    const double r = uniform01(gen()) - 0.5;  // r in [-0.5, 0.5)
    frequencies[m] = 2.0 * kPi * static_cast<double>(m + 1) * (1.0 + r) / T;
  }
}

double CrabAnsatz::coefficient_clamp_bound() const {
  if (d_max <= 0.0) return std::numeric_limits<double>::infinity();
  double gmax = 0.0;
  for (double v : guess.values) gmax = std::max(gmax, std::abs(v));
  const double headroom = d_max - gmax;
  if (headroom <= 0.0) return 0.0;
  return headroom / std::sqrt(2.0 * static_cast<double>(n_modes));
}

ControlPulse crab_evaluate(const CrabAnsatz& ansatz,
                           const std::vector<double>& coeffs,
                           std::size_t n_samples, double* clamp_excess) {
  if (coeffs.size() != 2 * ansatz.n_modes)
    throw std::invalid_argument("crab_evaluate: coefficient count != 2K");
  const double T = ansatz.guess.duration();
  ControlPulse p = make_grid(T, n_samples);
  double excess = 0.0;
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    const double t = p.times[i];
    const double env = std::sin(kPi * t / T) * std::sin(kPi * t / T);
    double corr = 0.0;
    for (std::size_t m = 0; m < ansatz.n_modes; ++m) {
      const double w = ansatz.frequencies[m];
      corr += coeffs[2 * m] * std::sin(w * t) + coeffs[2 * m + 1] * std::cos(w * t);
    }
    double v = ansatz.guess.sample(t) + env * corr;
    if (i == 0) v = ansatz.guess.values.front();
    if (i + 1 == p.times.size()) v = ansatz.guess.values.back();
    if (ansatz.d_max > 0.0) {
      const double over = std::abs(v) - ansatz.d_max;
      if (over > 0.0) excess += over * over;
      v = std::clamp(v, -ansatz.d_max, ansatz.d_max);
    }
    p.values[i] = v;
  }
  if (clamp_excess)
    *clamp_excess = excess / static_cast<double>(p.times.size());
  p.provenance = PulseProvenance::crab;
  return p;
}

void write_pulse(std::ostream& os, const ControlPulse& p) {
  char buf[64];
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g %.12g\n", p.times[i], p.values[i]);
    os << buf;
  }
}

ControlPulse read_pulse(std::istream& is) {
  ControlPulse p;
  double t, v;
  while (is >> t >> v) {
    p.times.push_back(t);
    p.values.push_back(v);
  }
  p.provenance = PulseProvenance::custom;
  p.validate();
  return p;
}

ControlPulse reversed(const ControlPulse& p) {
  ControlPulse r = p;
  std::reverse(r.values.begin(), r.values.end());
  return r;
}

}  // namespace bjj
