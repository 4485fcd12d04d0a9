#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "bjj/fft.hpp"
#include "bjj/linalg.hpp"

using cd = std::complex<double>;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

std::vector<cd> random_cvec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cd> v(n);
  for (auto& x : v) x = {u(gen), u(gen)};
  return v;
}

// quadratic-cost reference transform
std::vector<cd> naive_dft(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc(0, 0);
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * kPi * static_cast<double>(j * k) / static_cast<double>(n);
      acc += x[j] * cd(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}
}  // namespace

TEST_CASE("fft matches the naive transform") {
  for (std::size_t n : {2, 4, 8, 64}) {
    const auto x = random_cvec(n, n);
    auto got = x;
    bjj::Fft plan(n);
    plan.forward(got.data());
    const auto want = naive_dft(x);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(got[i] - want[i]) < 1e-11);
  }
}

TEST_CASE("fft round trip and Parseval") {
  for (std::size_t n : {256, 1024, 4096}) {
    const auto x = random_cvec(n, 7 * n);
    auto y = x;
    bjj::Fft plan(n);
    plan.forward(y.data());

    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += std::norm(x[i]);
      sy += std::norm(y[i]);
    }
    CHECK(std::abs(sy - sx * static_cast<double>(n)) < 1e-9 * sx * n);

    plan.inverse(y.data());
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(y[i] - x[i]) < 1e-13);
  }
}

TEST_CASE("fft rejects non-power-of-two sizes") {
  CHECK_THROWS(bjj::Fft(0));
  CHECK_THROWS(bjj::Fft(3));
  CHECK_THROWS(bjj::Fft(1023));
}

TEST_CASE("tridiagonal eigenvalues: discrete Laplacian") {
  // -u'' on a path graph: eigenvalues 2 - 2 cos(k pi / (n+1))
  const std::size_t n = 64;
  std::vector<double> diag(n, 2.0), off(n - 1, -1.0);
  const auto vals = bjj::linalg::sym_tridiag_eigenvalues(diag, off, 5);
  for (std::size_t k = 0; k < 5; ++k) {
    const double want =
        2.0 - 2.0 * std::cos(kPi * static_cast<double>(k + 1) / (n + 1));
    CHECK(std::abs(vals[k] - want) < 1e-12);
  }
}

TEST_CASE("tridiagonal eigenpairs: residual and orthogonality") {
  const std::size_t n = 200;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> diag(n), off(n - 1);
  for (auto& d : diag) d = u(gen);
  for (auto& e : off) e = u(gen);

  const auto res = bjj::linalg::sym_tridiag_lowest(diag, off, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto& v = res.vectors[j];
    double rmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double hv = diag[i] * v[i];
      if (i > 0) hv += off[i - 1] * v[i - 1];
      if (i + 1 < n) hv += off[i] * v[i + 1];
      rmax = std::max(rmax, std::abs(hv - res.values[j] * v[i]));
    }
    CHECK(rmax < 1e-9);
  }
  double d01 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d01 += res.vectors[0][i] * res.vectors[1][i];
  CHECK(std::abs(d01) < 1e-8);
}

TEST_CASE("harmonic oscillator on a grid") {
  // -1/2 u'' + x^2/2 with finite differences: E0 close to 1/2
  const std::size_t n = 512;
  const double l = 20.0, dx = l / n;
  std::vector<double> diag(n), off(n - 1, -0.5 / (dx * dx));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -l / 2 + dx * static_cast<double>(i);
    diag[i] = 1.0 / (dx * dx) + 0.5 * x * x;
  }
  const auto vals = bjj::linalg::sym_tridiag_eigenvalues(diag, off, 2);
  CHECK(vals[0] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(vals[1] == doctest::Approx(1.5).epsilon(1e-4));
}

TEST_CASE("hermitian_eigen reconstructs the matrix") {
  const std::size_t n = 6;
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cd> a(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i * n + i] = u(gen);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[i * n + j] = {u(gen), u(gen)};
      a[j * n + i] = std::conj(a[i * n + j]);
    }
  }
  const auto eig = bjj::linalg::hermitian_eigen(a, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cd acc(0, 0);
      for (std::size_t k = 0; k < n; ++k)
        acc += eig.vectors[i * n + k] * eig.values[k] *
               std::conj(eig.vectors[j * n + k]);
      CHECK(std::abs(acc - a[i * n + j]) < 1e-11);
    }
  for (std::size_t k = 0; k + 1 < n; ++k) CHECK(eig.values[k] <= eig.values[k + 1]);
}

TEST_CASE("hermitian_eigen 2x2 closed form") {
  std::vector<cd> a{cd(1.0, 0.0), cd(0.5, -0.25), cd(0.5, 0.25), cd(-1.0, 0.0)};
  const auto eig = bjj::linalg::hermitian_eigen(a, 2);
  const double disc = std::sqrt(1.0 + std::norm(cd(0.5, -0.25)));
  CHECK(eig.values[0] == doctest::Approx(-disc).epsilon(1e-12));
  CHECK(eig.values[1] == doctest::Approx(disc).epsilon(1e-12));
}
