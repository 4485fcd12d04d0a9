// Scalar reference kernels. These are the semantics the AVX2 variants are
// tested against; keep them simple and obviously correct.

#include "bjj/kernels.hpp"

#include <cmath>

namespace bjj::kernels::detail {

namespace {

void caxpy_s(cd a, const cd* x, cd* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void cscale_s(cd a, cd* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

void cmul_s(const cd* t, cd* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= t[i];
}

void rscale_s(const double* t, cd* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= t[i];
}

double norm_sq_s(const cd* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

cd dotc_s(const cd* x, const cd* y, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double weighted_abs2_s(const double* w, const cd* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += w[i] * (x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
  return s;
}

void phase_apply_s(cd* psi, const double* v, const double* tilt,
                   double d, double g, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a2 = psi[i].real() * psi[i].real() + psi[i].imag() * psi[i].imag();
    const double ang = c * (v[i] + d * tilt[i] + g * a2);
    psi[i] *= cd(std::cos(ang), std::sin(ang));
  }
}

void damp_apply_s(cd* psi, const double* v, const double* tilt,
                  double d, double g, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a2 = psi[i].real() * psi[i].real() + psi[i].imag() * psi[i].imag();
    psi[i] *= std::exp(c * (v[i] + d * tilt[i] + g * a2));
  }
}

void tridiag_matvec_s(const double* diag, const double* off,
                      const cd* x, cd* y, std::size_t n) {
  if (n == 0) return;
  if (n == 1) {
    y[0] = diag[0] * x[0];
    return;
  }
  y[0] = diag[0] * x[0] + off[0] * x[1];
  for (std::size_t i = 1; i + 1 < n; ++i)
    y[i] = diag[i] * x[i] + off[i - 1] * x[i - 1] + off[i] * x[i + 1];
  y[n - 1] = diag[n - 1] * x[n - 1] + off[n - 2] * x[n - 2];
}

void htridiag_matvec_s(const double* diag, const cd* off,
                       const cd* x, cd* y, std::size_t n) {
  if (n == 0) return;
  if (n == 1) {
    y[0] = diag[0] * x[0];
    return;
  }
  y[0] = diag[0] * x[0] + off[0] * x[1];
  for (std::size_t i = 1; i + 1 < n; ++i)
    y[i] = diag[i] * x[i] + std::conj(off[i - 1]) * x[i - 1] + off[i] * x[i + 1];
  y[n - 1] = diag[n - 1] * x[n - 1] + std::conj(off[n - 2]) * x[n - 2];
}

void fft_stage_s(cd* a, const cd* tw, std::size_t half, std::size_t n) {
  const std::size_t len = 2 * half;
  for (std::size_t blk = 0; blk < n; blk += len) {
    cd* u = a + blk;
    cd* v = a + blk + half;
    for (std::size_t j = 0; j < half; ++j) {
      const cd t = v[j] * tw[j];
      v[j] = u[j] - t;
      u[j] += t;
    }
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {
      caxpy_s, cscale_s, cmul_s, rscale_s, norm_sq_s, dotc_s,
      weighted_abs2_s, phase_apply_s, damp_apply_s, tridiag_matvec_s,
      htridiag_matvec_s, fft_stage_s,
  };
  return ops;
}

}  // namespace bjj::kernels::detail
