#pragma once
// Data-parallel inner-loop kernels with a scalar reference implementation
// and an AVX2 variant selected at runtime. Everything above this layer is
// backend-agnostic; the two backends are equivalence-tested against each
// other in tests/test_kernels.cpp.
//
// Backend selection: auto-detect at first use, overridable through the
// environment variable BJJQSL_KERNELS=scalar|avx2|auto or force_backend().

#include <complex>
#include <cstddef>
#include <string>

namespace bjj::kernels {

using cd = std::complex<double>;

enum class Backend { scalar, avx2 };

Backend active();
std::string backend_name();
bool avx2_supported();
// Throws std::runtime_error when asking for avx2 on a CPU without it.
void force_backend(Backend b);
void reset_backend();  // back to auto-detection

// y[i] += a * x[i]
void caxpy(cd a, const cd* x, cd* y, std::size_t n);
// y[i] *= a
void cscale(cd a, cd* y, std::size_t n);
// y[i] *= t[i]
void cmul(const cd* t, cd* y, std::size_t n);
// y[i] *= t[i]  (real table)
void rscale(const double* t, cd* y, std::size_t n);
// sum |x[i]|^2
double norm_sq(const cd* x, std::size_t n);
// sum conj(x[i]) * y[i]
cd dotc(const cd* x, const cd* y, std::size_t n);
// sum w[i] * |x[i]|^2
double weighted_abs2(const double* w, const cd* x, std::size_t n);

// psi[i] *= exp(i * c * (v[i] + d*tilt[i] + g*|psi[i]|^2)).
// Used for the potential/nonlinear half-step of the split-step propagator;
// |psi[i]| is unchanged by the multiplication so the half-step is exact.
void phase_apply(cd* psi, const double* v, const double* tilt,
                 double d, double g, double c, std::size_t n);
// psi[i] *= exp(c * (v[i] + d*tilt[i] + g*|psi[i]|^2))   (imaginary time)
void damp_apply(cd* psi, const double* v, const double* tilt,
                double d, double g, double c, std::size_t n);

// y[i] = diag[i]*x[i] + off[i-1]*x[i-1] + off[i]*x[i+1]; off has n-1 entries.
void tridiag_matvec(const double* diag, const double* off,
                    const cd* x, cd* y, std::size_t n);

// Hermitian-tridiagonal matvec with complex upper off-diagonal:
// y[i] = diag[i]*x[i] + conj(off[i-1])*x[i-1] + off[i]*x[i+1]
void htridiag_matvec(const double* diag, const cd* off,
                     const cd* x, cd* y, std::size_t n);

// One FFT stage over the whole array: butterflies of span `half` applied to
// each block of length 2*half, with per-j twiddles tw[0..half).
void fft_stage(cd* a, const cd* tw, std::size_t half, std::size_t n);

namespace detail {
struct Ops {
  void (*caxpy)(cd, const cd*, cd*, std::size_t);
  void (*cscale)(cd, cd*, std::size_t);
  void (*cmul)(const cd*, cd*, std::size_t);
  void (*rscale)(const double*, cd*, std::size_t);
  double (*norm_sq)(const cd*, std::size_t);
  cd (*dotc)(const cd*, const cd*, std::size_t);
  double (*weighted_abs2)(const double*, const cd*, std::size_t);
  void (*phase_apply)(cd*, const double*, const double*, double, double, double, std::size_t);
  void (*damp_apply)(cd*, const double*, const double*, double, double, double, std::size_t);
  void (*tridiag_matvec)(const double*, const double*, const cd*, cd*, std::size_t);
  void (*htridiag_matvec)(const double*, const cd*, const cd*, cd*, std::size_t);
  void (*fft_stage)(cd*, const cd*, std::size_t, std::size_t);
};
const Ops& scalar_ops();
#ifdef BJJ_WITH_AVX2
const Ops& avx2_ops();
#endif
}  // namespace detail

}  // namespace bjj::kernels
