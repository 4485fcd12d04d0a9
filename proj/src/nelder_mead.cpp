#include "bjj/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bjj/two_mode.hpp"

namespace bjj {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0,
                             const OptimizerConfig& config) {
  const std::size_t n = x0.size();
  NelderMeadResult res;

  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    if (!std::isfinite(v))
      throw SimError("nelder_mead: objective returned a non-finite value");
    ++res.n_evals;
    const double best = res.trace.empty() ? v : std::min(res.trace.back(), v);
    res.trace.push_back(best);
    return v;
  };

  for (double xi : x0)
    if (!std::isfinite(xi)) throw SimError("nelder_mead: non-finite start point");

  std::vector<std::vector<double>> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  for (std::size_t i = 1; i <= n; ++i) xs[i][i - 1] += config.simplex_scale;
  for (std::size_t i = 0; i <= n; ++i) fs[i] = eval(xs[i]);

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);

  while (res.n_evals < config.max_evals) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = order[0], worst = order[n],
                      second_worst = order[n - 1];

    if (fs[best] <= config.target_cost) break;
    if (fs[worst] - fs[best] <= config.spread_tol) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += xs[k][i];
    }
    for (std::size_t i = 0; i < n; ++i) centroid[i] /= static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i)
      xr[i] = centroid[i] + kReflect * (centroid[i] - xs[worst][i]);
    const double fr = eval(xr);

    if (fr < fs[best]) {
      for (std::size_t i = 0; i < n; ++i)
        xe[i] = centroid[i] + kExpand * (xr[i] - centroid[i]);
      const double fe = eval(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second_worst]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      const auto& base = outside ? xr : xs[worst];
      for (std::size_t i = 0; i < n; ++i)
        xc[i] = centroid[i] + kContract * (base[i] - centroid[i]);
      const double fc = eval(xc);
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (std::size_t k = 0; k <= n; ++k) {
          if (k == best) continue;
          for (std::size_t i = 0; i < n; ++i)
            xs[k][i] = xs[best][i] + kShrink * (xs[k][i] - xs[best][i]);
          fs[k] = eval(xs[k]);
          if (res.n_evals >= config.max_evals) break;
        }
      }
    }
  }

  std::size_t ibest = 0;
  for (std::size_t k = 1; k <= n; ++k)
    if (fs[k] < fs[ibest]) ibest = k;
  res.x_best = xs[ibest];
  res.cost_best = fs[ibest];
  return res;
}

}  // namespace bjj
