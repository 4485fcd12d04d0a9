// Scalar vs AVX2 kernel equivalence on randomized inputs, plus the FFT stage
// contract the plans rely on.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "bjj/kernels.hpp"

using bjj::kernels::Backend;
using cd = std::complex<double>;

namespace {

std::vector<cd> random_cvec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cd> v(n);
  for (auto& x : v) x = {u(gen), u(gen)};
  return v;
}

std::vector<double> random_rvec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

const std::vector<std::size_t> kSizes{0, 1, 2, 3, 4, 5, 7, 8, 101, 255, 1024};

struct BackendGuard {
  ~BackendGuard() { bjj::kernels::reset_backend(); }
};

}  // namespace

TEST_CASE("scalar and avx2 kernels agree") {
  if (!bjj::kernels::avx2_supported()) {
    MESSAGE("AVX2 not supported on this CPU; skipping equivalence checks");
    return;
  }
  BackendGuard guard;

  for (std::size_t n : kSizes) {
    CAPTURE(n);
    const auto x = random_cvec(n, 11 + n);
    const auto y0 = random_cvec(n, 22 + n);
    const auto t = random_cvec(n, 33 + n);
    const auto r = random_rvec(n, 44 + n);
    const cd alpha{0.3, -0.7};

    auto ys = y0;
    auto yv = y0;

    bjj::kernels::force_backend(Backend::scalar);
    bjj::kernels::caxpy(alpha, x.data(), ys.data(), n);
    bjj::kernels::force_backend(Backend::avx2);
    bjj::kernels::caxpy(alpha, x.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(ys[i] - yv[i]) < 1e-14);

    ys = y0; yv = y0;
    bjj::kernels::force_backend(Backend::scalar);
    bjj::kernels::cscale(alpha, ys.data(), n);
    bjj::kernels::force_backend(Backend::avx2);
    bjj::kernels::cscale(alpha, yv.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(ys[i] - yv[i]) < 1e-14);

    ys = y0; yv = y0;
    bjj::kernels::force_backend(Backend::scalar);
    bjj::kernels::cmul(t.data(), ys.data(), n);
    bjj::kernels::force_backend(Backend::avx2);
    bjj::kernels::cmul(t.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(ys[i] - yv[i]) < 1e-14);

    ys = y0; yv = y0;
    bjj::kernels::force_backend(Backend::scalar);
    bjj::kernels::rscale(r.data(), ys.data(), n);
    bjj::kernels::force_backend(Backend::avx2);
    bjj::kernels::rscale(r.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(ys[i] - yv[i]) < 1e-14);

    bjj::kernels::force_backend(Backend::scalar);
    const double ns = bjj::kernels::norm_sq(x.data(), n);
    const cd ds = bjj::kernels::dotc(x.data(), y0.data(), n);
    const double ws = bjj::kernels::weighted_abs2(r.data(), x.data(), n);
    bjj::kernels::force_backend(Backend::avx2);
    const double nv = bjj::kernels::norm_sq(x.data(), n);
    const cd dv = bjj::kernels::dotc(x.data(), y0.data(), n);
    const double wv = bjj::kernels::weighted_abs2(r.data(), x.data(), n);
    CHECK(std::abs(ns - nv) < 1e-12 * std::max(1.0, ns));
    CHECK(std::abs(ds - dv) < 1e-12);
    CHECK(std::abs(ws - wv) < 1e-12 * std::max(1.0, std::abs(ws)));
  }
}

TEST_CASE("phase_apply matches scalar sincos") {
  if (!bjj::kernels::avx2_supported()) return;
  BackendGuard guard;
  for (std::size_t n : kSizes) {
    const auto psi0 = random_cvec(n, 5 + n);
    auto v = random_rvec(n, 6 + n);
    const auto tilt = random_rvec(n, 7 + n);
    // include large angles to exercise range reduction
    for (std::size_t i = 0; i < n; ++i) v[i] *= 20.0;

    auto ps = psi0, pv = psi0;
    bjj::kernels::force_backend(Backend::scalar);
    bjj::kernels::phase_apply(ps.data(), v.data(), tilt.data(), 0.4, 0.8, -0.37, n);
    bjj::kernels::force_backend(Backend::avx2);
    bjj::kernels::phase_apply(pv.data(), v.data(), tilt.data(), 0.4, 0.8, -0.37, n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(ps[i] - pv[i]) < 5e-15);

    ps = psi0; pv = psi0;
    bjj::kernels::force_backend(Backend::scalar);
    bjj::kernels::damp_apply(ps.data(), v.data(), tilt.data(), 0.4, 0.8, -0.02, n);
    bjj::kernels::force_backend(Backend::avx2);
    bjj::kernels::damp_apply(pv.data(), v.data(), tilt.data(), 0.4, 0.8, -0.02, n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(ps[i] - pv[i]) < 1e-13 * std::max(1.0, std::abs(ps[i])));
  }
}

TEST_CASE("phase_apply preserves modulus") {
  BackendGuard guard;
  const std::size_t n = 1024;
  auto psi = random_cvec(n, 99);
  const auto v = random_rvec(n, 98);
  const auto tilt = random_rvec(n, 97);
  std::vector<double> before(n);
  for (std::size_t i = 0; i < n; ++i) before[i] = std::abs(psi[i]);
  bjj::kernels::phase_apply(psi.data(), v.data(), tilt.data(), 1.3, 0.5, -0.11, n);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(std::abs(psi[i]) - before[i]) < 1e-14);
}

TEST_CASE("tridiag_matvec equivalence and correctness") {
  BackendGuard guard;
  for (std::size_t n : kSizes) {
    if (n == 0) continue;
    const auto x = random_cvec(n, 1000 + n);
    const auto d = random_rvec(n, 2000 + n);
    const auto e = random_rvec(n > 0 ? n - 1 : 0, 3000 + n);

    std::vector<cd> want(n);
    for (std::size_t i = 0; i < n; ++i) {
      cd acc = d[i] * x[i];
      if (i > 0) acc += e[i - 1] * x[i - 1];
      if (i + 1 < n) acc += e[i] * x[i + 1];
      want[i] = acc;
    }
    std::vector<cd> got(n);
    bjj::kernels::force_backend(Backend::scalar);
    bjj::kernels::tridiag_matvec(d.data(), e.data(), x.data(), got.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-13);
    if (bjj::kernels::avx2_supported()) {
      bjj::kernels::force_backend(Backend::avx2);
      bjj::kernels::tridiag_matvec(d.data(), e.data(), x.data(), got.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-13);
    }
  }
}

TEST_CASE("fft_stage equivalence") {
  if (!bjj::kernels::avx2_supported()) return;
  BackendGuard guard;
  for (std::size_t half : {1u, 2u, 4u, 8u, 256u}) {
    const std::size_t n = 4 * half;
    const auto a0 = random_cvec(n, half);
    auto tw = random_cvec(half, half + 1);
    auto as = a0, av = a0;
    bjj::kernels::force_backend(Backend::scalar);
    bjj::kernels::fft_stage(as.data(), tw.data(), half, n);
    bjj::kernels::force_backend(Backend::avx2);
    bjj::kernels::fft_stage(av.data(), tw.data(), half, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(as[i] - av[i]) < 1e-14);
  }
}
