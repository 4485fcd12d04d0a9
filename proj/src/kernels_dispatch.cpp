#include "bjj/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace bjj::kernels {

namespace {

Backend g_backend = Backend::scalar;
bool g_initialized = false;

Backend detect() {
#ifdef BJJ_WITH_AVX2
  if (const char* env = std::getenv("BJJQSL_KERNELS")) {
    const std::string s(env);
    if (s == "scalar") return Backend::scalar;
    if (s == "avx2") {
      if (!avx2_supported())
        throw std::runtime_error("BJJQSL_KERNELS=avx2 but CPU lacks AVX2/FMA");
      return Backend::avx2;
    }
    // anything else ("auto", empty) falls through to detection
  }
  if (avx2_supported()) return Backend::avx2;
#endif
  return Backend::scalar;
}

const detail::Ops& ops() {
  if (!g_initialized) {
    g_backend = detect();
    g_initialized = true;
  }
#ifdef BJJ_WITH_AVX2
  if (g_backend == Backend::avx2) return detail::avx2_ops();
#endif
  return detail::scalar_ops();
}

}  // namespace

bool avx2_supported() {
#ifdef BJJ_WITH_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active() {
  ops();
  return g_backend;
}

std::string backend_name() {
  return active() == Backend::avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_supported())
    throw std::runtime_error("AVX2 backend requested but not supported");
  g_backend = b;
  g_initialized = true;
}

void reset_backend() { g_initialized = false; }

void caxpy(cd a, const cd* x, cd* y, std::size_t n) { ops().caxpy(a, x, y, n); }
void cscale(cd a, cd* y, std::size_t n) { ops().cscale(a, y, n); }
void cmul(const cd* t, cd* y, std::size_t n) { ops().cmul(t, y, n); }
void rscale(const double* t, cd* y, std::size_t n) { ops().rscale(t, y, n); }
double norm_sq(const cd* x, std::size_t n) { return ops().norm_sq(x, n); }
cd dotc(const cd* x, const cd* y, std::size_t n) { return ops().dotc(x, y, n); }
double weighted_abs2(const double* w, const cd* x, std::size_t n) {
  return ops().weighted_abs2(w, x, n);
}
void phase_apply(cd* psi, const double* v, const double* tilt,
                 double d, double g, double c, std::size_t n) {
  ops().phase_apply(psi, v, tilt, d, g, c, n);
}
void damp_apply(cd* psi, const double* v, const double* tilt,
                double d, double g, double c, std::size_t n) {
  ops().damp_apply(psi, v, tilt, d, g, c, n);
}
void tridiag_matvec(const double* diag, const double* off,
                    const cd* x, cd* y, std::size_t n) {
  ops().tridiag_matvec(diag, off, x, y, n);
}
void htridiag_matvec(const double* diag, const cd* off,
                     const cd* x, cd* y, std::size_t n) {
  ops().htridiag_matvec(diag, off, x, y, n);
}
void fft_stage(cd* a, const cd* tw, std::size_t half, std::size_t n) {
  ops().fft_stage(a, tw, half, n);
}

}  // namespace bjj::kernels
