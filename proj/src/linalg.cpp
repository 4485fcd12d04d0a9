#include "bjj/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bjj::linalg {

namespace {

using cd = std::complex<double>;

// number of eigenvalues of (diag, off) strictly below x (Sturm sequence)
std::size_t sturm_count(const std::vector<double>& diag,
                        const std::vector<double>& off, double x) {
  const std::size_t n = diag.size();
  std::size_t cnt = 0;
  double d = diag[0] - x;
  if (d < 0) ++cnt;
  for (std::size_t i = 1; i < n; ++i) {
    if (d == 0.0) d = 1e-300;
    d = diag[i] - x - off[i - 1] * off[i - 1] / d;
    if (d < 0) ++cnt;
  }
  return cnt;
}

// solve (T - shift I) v = b in place; tridiagonal LU with partial pivoting
// (same scheme as LAPACK dgttrf/dgtts2, with fill-in on a second superdiag)
void shifted_solve(const std::vector<double>& diag,
                   const std::vector<double>& off, double shift,
                   std::vector<double>& v) {
  const std::size_t n = diag.size();
  std::vector<double> d(n), du(n > 1 ? n - 1 : 0), dl(n > 1 ? n - 1 : 0);
  std::vector<double> du2(n > 2 ? n - 2 : 0, 0.0);
  std::vector<char> swapped(n > 1 ? n - 1 : 0, 0);
  for (std::size_t i = 0; i < n; ++i) d[i] = diag[i] - shift;
  for (std::size_t i = 0; i + 1 < n; ++i) du[i] = dl[i] = off[i];

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = 1e-300;
      const double fact = dl[i] / d[i];
      dl[i] = fact;
      d[i + 1] -= fact * du[i];
    } else {
      swapped[i] = 1;
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = fact;
      const double tmp = du[i];
      du[i] = d[i + 1];
      d[i + 1] = tmp - fact * d[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du[i + 1];
      }
    }
  }
  if (d[n - 1] == 0.0) d[n - 1] = 1e-300;

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!swapped[i]) {
      v[i + 1] -= dl[i] * v[i];
    } else {
      const double tmp = v[i];
      v[i] = v[i + 1];
      v[i + 1] = tmp - dl[i] * v[i];
    }
  }
  v[n - 1] /= d[n - 1];
  if (n >= 2) v[n - 2] = (v[n - 2] - du[n - 2] * v[n - 1]) / d[n - 2];
  for (std::size_t ii = n; ii >= 3; --ii) {
    const std::size_t i = ii - 3;
    v[i] = (v[i] - du[i] * v[i + 1] - du2[i] * v[i + 2]) / d[i];
  }
}

void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  if (s == 0.0) return;
  for (double& x : v) x /= s;
}

}  // namespace

std::vector<double> sym_tridiag_eigenvalues(const std::vector<double>& diag,
                                            const std::vector<double>& off,
                                            std::size_t k) {
  const std::size_t n = diag.size();
  if (n == 0) throw std::invalid_argument("sym_tridiag: empty matrix");
  if (off.size() + 1 != n)
    throw std::invalid_argument("sym_tridiag: off size mismatch");
  k = std::min(k, n);

  // Gershgorin bounds
  double lo = diag[0], hi = diag[0];
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < n) r += std::abs(off[i]);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});

  std::vector<double> vals(k);
  for (std::size_t j = 0; j < k; ++j) {
    double a = lo, b = hi;
    while (b - a > 1e-15 * scale) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;  // hit double resolution
      if (sturm_count(diag, off, mid) > j)
        b = mid;
      else
        a = mid;
    }
    vals[j] = 0.5 * (a + b);
  }
  return vals;
}

TridiagEigenResult sym_tridiag_lowest(const std::vector<double>& diag,
                                      const std::vector<double>& off,
                                      std::size_t k) {
  const std::size_t n = diag.size();
  TridiagEigenResult res;
  res.values = sym_tridiag_eigenvalues(diag, off, k);
  k = res.values.size();
  res.vectors.resize(k);

  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(diag[i]));
  for (std::size_t i = 0; i + 1 < n; ++i) scale = std::max(scale, std::abs(off[i]));

  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> v(n);
    // deterministic pseudo-random start
    std::uint64_t s = 0x9e3779b97f4a7c15ull + j;
    for (std::size_t i = 0; i < n; ++i) {
      s ^= s << 13; s ^= s >> 7; s ^= s << 17;
      v[i] = static_cast<double>(s % 1000003) / 1000003.0 - 0.5;
    }
    normalize(v);
    const double shift = res.values[j] + 1e-12 * scale;
    for (int it = 0; it < 4; ++it) {
      shifted_solve(diag, off, shift, v);
      // re-orthogonalize against earlier near-degenerate vectors
      for (std::size_t m = 0; m < j; ++m) {
        if (std::abs(res.values[m] - res.values[j]) < 1e-6 * scale) {
          double d = std::inner_product(v.begin(), v.end(),
                                        res.vectors[m].begin(), 0.0);
          for (std::size_t i = 0; i < n; ++i) v[i] -= d * res.vectors[m][i];
        }
      }
      normalize(v);
    }
    res.vectors[j] = std::move(v);
  }
  return res;
}

HermitianEigenResult hermitian_eigen(const std::vector<cd>& a_in,
                                     std::size_t n) {
  if (a_in.size() != n * n)
    throw std::invalid_argument("hermitian_eigen: size mismatch");
  std::vector<cd> a(a_in);
  std::vector<cd> v(n * n, cd(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += std::norm(a[p * n + q]);
    return std::sqrt(s);
  };
  double scale = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(a[i]));
  if (scale == 0.0) scale = 1.0;

  for (int sweep = 0; sweep < 100 && off_norm() > 1e-14 * scale * n; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cd g = a[p * n + q];
        const double absg = std::abs(g);
        if (absg <= 1e-300) continue;
        const cd phase = g / absg;
        const double app = a[p * n + p].real();
        const double aqq = a[q * n + q].real();
        // small root of t^2 - 2 tau t - 1 = 0 annihilates the p,q element
        const double tau = (aqq - app) / (2.0 * absg);
        const double t = (tau >= 0 ? -1.0 : 1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cd jpq = -s * phase;        // J[p][q]
        const cd jqp = s * std::conj(phase);  // J[q][p]

        // A <- J^dagger A J ; update rows/cols p and q
        for (std::size_t i = 0; i < n; ++i) {
          const cd aip = a[i * n + p];
          const cd aiq = a[i * n + q];
          a[i * n + p] = aip * c + aiq * jqp;
          a[i * n + q] = aip * jpq + aiq * c;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const cd api = a[p * n + i];
          const cd aqi = a[q * n + i];
          a[p * n + i] = c * api + std::conj(jqp) * aqi;
          a[q * n + i] = std::conj(jpq) * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const cd vip = v[i * n + p];
          const cd viq = v[i * n + q];
          v[i * n + p] = vip * c + viq * jqp;
          v[i * n + q] = vip * jpq + viq * c;
        }
      }
    }
  }

  HermitianEigenResult res;
  res.n = n;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a[x * n + x].real() < a[y * n + y].real();
  });
  res.values.resize(n);
  res.vectors.assign(n * n, cd(0.0, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    res.values[j] = a[order[j] * n + order[j]].real();
    for (std::size_t i = 0; i < n; ++i)
      res.vectors[i * n + j] = v[i * n + order[j]];
  }
  return res;
}

}  // namespace bjj::linalg
