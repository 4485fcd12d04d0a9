// AVX2+FMA kernel variants. Complex doubles are interleaved (re,im), two per
// 256-bit register. sincos/exp use Cephes-style range reduction + minimax
// polynomials (double precision, ~1 ulp); equivalence against the scalar
// reference is asserted in tests/test_kernels.cpp.

#include "bjj/kernels.hpp"

#ifdef BJJ_WITH_AVX2

#include <immintrin.h>

#include <cmath>

namespace bjj::kernels::detail {

namespace {

// [w0 w1] -> [w0 w0 w1 w1]
inline __m256d dup_pair(const double* w) {
  __m256d v = _mm256_castpd128_pd256(_mm_loadu_pd(w));
  return _mm256_permute4x64_pd(v, 0x50);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// complex multiply, two complexes per register
inline __m256d cmul2(__m256d x, __m256d y) {
  __m256d yr = _mm256_movedup_pd(y);            // [yr yr]
  __m256d yi = _mm256_permute_pd(y, 0xF);       // [yi yi]
  __m256d xs = _mm256_permute_pd(x, 0x5);       // [xi xr]
  return _mm256_fmaddsub_pd(x, yr, _mm256_mul_pd(xs, yi));
}

// ---- vector sincos / exp ----------------------------------------------

const __m256d kTwoOverPi = _mm256_set1_pd(0.63661977236758134308);
// pi/2 split into three parts for Cody-Waite reduction
const __m256d kPio2A = _mm256_set1_pd(1.57079632673412561417e0);
const __m256d kPio2B = _mm256_set1_pd(6.07710050650619224932e-11);
const __m256d kPio2C = _mm256_set1_pd(2.02226624879595063154e-20);

const __m256d kSinC0 = _mm256_set1_pd(1.58962301576546568060e-10);
const __m256d kSinC1 = _mm256_set1_pd(-2.50507477628578072866e-8);
const __m256d kSinC2 = _mm256_set1_pd(2.75573136213857245213e-6);
const __m256d kSinC3 = _mm256_set1_pd(-1.98412698295895385996e-4);
const __m256d kSinC4 = _mm256_set1_pd(8.33333333332211858878e-3);
const __m256d kSinC5 = _mm256_set1_pd(-1.66666666666666307295e-1);

const __m256d kCosC0 = _mm256_set1_pd(-1.13585365213876817300e-11);
const __m256d kCosC1 = _mm256_set1_pd(2.08757008419747316778e-9);
const __m256d kCosC2 = _mm256_set1_pd(-2.75573141792967388112e-7);
const __m256d kCosC3 = _mm256_set1_pd(2.48015872888517179954e-5);
const __m256d kCosC4 = _mm256_set1_pd(-1.38888888888730564116e-3);
const __m256d kCosC5 = _mm256_set1_pd(4.16666666666665929218e-2);

inline void sincos4(__m256d x, __m256d& s_out, __m256d& c_out) {
  __m256d n = _mm256_round_pd(_mm256_mul_pd(x, kTwoOverPi),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  // r = ((x - n*A) - n*B) - n*C
  __m256d r = _mm256_fnmadd_pd(n, kPio2A, x);
  r = _mm256_fnmadd_pd(n, kPio2B, r);
  r = _mm256_fnmadd_pd(n, kPio2C, r);

  __m256d z = _mm256_mul_pd(r, r);

  __m256d ps = kSinC0;
  ps = _mm256_fmadd_pd(ps, z, kSinC1);
  ps = _mm256_fmadd_pd(ps, z, kSinC2);
  ps = _mm256_fmadd_pd(ps, z, kSinC3);
  ps = _mm256_fmadd_pd(ps, z, kSinC4);
  ps = _mm256_fmadd_pd(ps, z, kSinC5);
  __m256d sr = _mm256_fmadd_pd(_mm256_mul_pd(ps, z), r, r);  // sin(r)

  __m256d pc = kCosC0;
  pc = _mm256_fmadd_pd(pc, z, kCosC1);
  pc = _mm256_fmadd_pd(pc, z, kCosC2);
  pc = _mm256_fmadd_pd(pc, z, kCosC3);
  pc = _mm256_fmadd_pd(pc, z, kCosC4);
  pc = _mm256_fmadd_pd(pc, z, kCosC5);
  __m256d z2 = _mm256_mul_pd(z, z);
  __m256d cr = _mm256_add_pd(
      _mm256_fnmadd_pd(z, _mm256_set1_pd(0.5), _mm256_set1_pd(1.0)),
      _mm256_mul_pd(z2, pc));  // cos(r)

  // quadrant logic from q = n mod 4
  __m128i qi = _mm256_cvtpd_epi32(n);
  __m256i q = _mm256_cvtepi32_epi64(qi);
  __m256i bit0 = _mm256_and_si256(q, _mm256_set1_epi64x(1));
  __m256i bit1 = _mm256_and_si256(q, _mm256_set1_epi64x(2));
  __m256d swap = _mm256_castsi256_pd(
      _mm256_cmpeq_epi64(bit0, _mm256_set1_epi64x(1)));
  __m256d flip2 = _mm256_castsi256_pd(
      _mm256_cmpeq_epi64(bit1, _mm256_set1_epi64x(2)));

  // sin: q0 -> sr, q1 -> cr, q2 -> -sr, q3 -> -cr
  __m256d s = _mm256_blendv_pd(sr, cr, swap);
  s = _mm256_xor_pd(s, _mm256_and_pd(flip2, _mm256_set1_pd(-0.0)));

  // cos: q0 -> cr, q1 -> -sr, q2 -> -cr, q3 -> sr
  __m256d c = _mm256_blendv_pd(cr, sr, swap);
  __m256d cflip = _mm256_xor_pd(flip2, swap);  // sign flip for q in {1,2}
  c = _mm256_xor_pd(c, _mm256_and_pd(cflip, _mm256_set1_pd(-0.0)));

  s_out = s;
  c_out = c;
}

const __m256d kLog2E = _mm256_set1_pd(1.4426950408889634074);
const __m256d kExpC1 = _mm256_set1_pd(6.93145751953125e-1);
const __m256d kExpC2 = _mm256_set1_pd(1.42860682030941723212e-6);
const __m256d kExpP0 = _mm256_set1_pd(1.26177193074810590878e-4);
const __m256d kExpP1 = _mm256_set1_pd(3.02994407707441961300e-2);
const __m256d kExpP2 = _mm256_set1_pd(9.99999999999999999910e-1);
const __m256d kExpQ0 = _mm256_set1_pd(3.00198505138664455042e-6);
const __m256d kExpQ1 = _mm256_set1_pd(2.52448340349684104192e-3);
const __m256d kExpQ2 = _mm256_set1_pd(2.27265548208155028766e-1);
const __m256d kExpQ3 = _mm256_set1_pd(2.00000000000000000005e0);

inline __m256d exp4(__m256d x) {
  x = _mm256_min_pd(x, _mm256_set1_pd(708.0));
  x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));
  __m256d n = _mm256_round_pd(_mm256_mul_pd(x, kLog2E),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, kExpC1, x);
  r = _mm256_fnmadd_pd(n, kExpC2, r);
  __m256d z = _mm256_mul_pd(r, r);

  __m256d p = kExpP0;
  p = _mm256_fmadd_pd(p, z, kExpP1);
  p = _mm256_fmadd_pd(p, z, kExpP2);
  p = _mm256_mul_pd(p, r);

  __m256d q = kExpQ0;
  q = _mm256_fmadd_pd(q, z, kExpQ1);
  q = _mm256_fmadd_pd(q, z, kExpQ2);
  q = _mm256_fmadd_pd(q, z, kExpQ3);

  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  // scale by 2^n through the exponent field
  __m256i ni = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
  __m256i pow2 = _mm256_slli_epi64(
      _mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));
}

// ---- kernels ------------------------------------------------------------

void caxpy_v(cd a, const cd* x, cd* y, std::size_t n) {
  const std::size_t n2 = n & ~std::size_t(1);
  const __m256d av = _mm256_setr_pd(a.real(), a.imag(), a.real(), a.imag());
  const double* xp = reinterpret_cast<const double*>(x);
  double* yp = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < 2 * n2; i += 4) {
    __m256d xv = _mm256_loadu_pd(xp + i);
    __m256d yv = _mm256_loadu_pd(yp + i);
    _mm256_storeu_pd(yp + i, _mm256_add_pd(yv, cmul2(xv, av)));
  }
  for (std::size_t i = n2; i < n; ++i) y[i] += a * x[i];
}

void cscale_v(cd a, cd* y, std::size_t n) {
  const std::size_t n2 = n & ~std::size_t(1);
  const __m256d av = _mm256_setr_pd(a.real(), a.imag(), a.real(), a.imag());
  double* yp = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < 2 * n2; i += 4) {
    __m256d yv = _mm256_loadu_pd(yp + i);
    _mm256_storeu_pd(yp + i, cmul2(yv, av));
  }
  for (std::size_t i = n2; i < n; ++i) y[i] *= a;
}

void cmul_v(const cd* t, cd* y, std::size_t n) {
  const std::size_t n2 = n & ~std::size_t(1);
  const double* tp = reinterpret_cast<const double*>(t);
  double* yp = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < 2 * n2; i += 4) {
    __m256d yv = _mm256_loadu_pd(yp + i);
    __m256d tv = _mm256_loadu_pd(tp + i);
    _mm256_storeu_pd(yp + i, cmul2(yv, tv));
  }
  for (std::size_t i = n2; i < n; ++i) y[i] *= t[i];
}

void rscale_v(const double* t, cd* y, std::size_t n) {
  const std::size_t n2 = n & ~std::size_t(1);
  double* yp = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < n2; i += 2) {
    __m256d yv = _mm256_loadu_pd(yp + 2 * i);
    _mm256_storeu_pd(yp + 2 * i, _mm256_mul_pd(yv, dup_pair(t + i)));
  }
  for (std::size_t i = n2; i < n; ++i) y[i] *= t[i];
}

double norm_sq_v(const cd* x, std::size_t n) {
  const std::size_t n2 = n & ~std::size_t(1);
  const double* xp = reinterpret_cast<const double*>(x);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < 2 * n2; i += 4) {
    __m256d xv = _mm256_loadu_pd(xp + i);
    acc = _mm256_fmadd_pd(xv, xv, acc);
  }
  double s = hsum(acc);
  for (std::size_t i = n2; i < n; ++i)
    s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

cd dotc_v(const cd* x, const cd* y, std::size_t n) {
  const std::size_t n2 = n & ~std::size_t(1);
  const double* xp = reinterpret_cast<const double*>(x);
  const double* yp = reinterpret_cast<const double*>(y);
  const __m256d negeven = _mm256_setr_pd(-0.0, 0.0, -0.0, 0.0);
  __m256d racc = _mm256_setzero_pd();
  __m256d iacc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < 2 * n2; i += 4) {
    __m256d xv = _mm256_loadu_pd(xp + i);
    __m256d yv = _mm256_loadu_pd(yp + i);
    racc = _mm256_fmadd_pd(xv, yv, racc);
    __m256d xs = _mm256_permute_pd(xv, 0x5);  // [xi xr]
    // odd lanes give xr*yi, even lanes give xi*yr (negated below)
    iacc = _mm256_add_pd(iacc,
                         _mm256_xor_pd(_mm256_mul_pd(xs, yv), negeven));
  }
  double re = hsum(racc);
  double im = hsum(iacc);
  for (std::size_t i = n2; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double weighted_abs2_v(const double* w, const cd* x, std::size_t n) {
  const std::size_t n2 = n & ~std::size_t(1);
  const double* xp = reinterpret_cast<const double*>(x);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n2; i += 2) {
    __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(xv, xv), dup_pair(w + i), acc);
  }
  double s = hsum(acc);
  for (std::size_t i = n2; i < n; ++i)
    s += w[i] * (x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
  return s;
}

void phase_apply_v(cd* psi, const double* v, const double* tilt,
                   double d, double g, double c, std::size_t n) {
  const std::size_t n2 = n & ~std::size_t(1);
  double* pp = reinterpret_cast<double*>(psi);
  const __m256d dv = _mm256_set1_pd(d);
  const __m256d gv = _mm256_set1_pd(g);
  const __m256d cv = _mm256_set1_pd(c);
  for (std::size_t i = 0; i < n2; i += 2) {
    __m256d pv = _mm256_loadu_pd(pp + 2 * i);
    __m256d sq = _mm256_mul_pd(pv, pv);
    __m256d a2 = _mm256_hadd_pd(sq, sq);  // |psi|^2 duplicated per complex
    __m256d ang = _mm256_fmadd_pd(dv, dup_pair(tilt + i), dup_pair(v + i));
    ang = _mm256_fmadd_pd(gv, a2, ang);
    ang = _mm256_mul_pd(ang, cv);
    __m256d s, co;
    sincos4(ang, s, co);
    __m256d unit = _mm256_blend_pd(co, s, 0xA);  // [cos sin cos sin]
    _mm256_storeu_pd(pp + 2 * i, cmul2(pv, unit));
  }
  for (std::size_t i = n2; i < n; ++i) {
    const double a2 = psi[i].real() * psi[i].real() + psi[i].imag() * psi[i].imag();
    const double ang = c * (v[i] + d * tilt[i] + g * a2);
    psi[i] *= cd(std::cos(ang), std::sin(ang));
  }
}

void damp_apply_v(cd* psi, const double* v, const double* tilt,
                  double d, double g, double c, std::size_t n) {
  const std::size_t n2 = n & ~std::size_t(1);
  double* pp = reinterpret_cast<double*>(psi);
  const __m256d dv = _mm256_set1_pd(d);
  const __m256d gv = _mm256_set1_pd(g);
  const __m256d cv = _mm256_set1_pd(c);
  for (std::size_t i = 0; i < n2; i += 2) {
    __m256d pv = _mm256_loadu_pd(pp + 2 * i);
    __m256d sq = _mm256_mul_pd(pv, pv);
    __m256d a2 = _mm256_hadd_pd(sq, sq);
    __m256d ang = _mm256_fmadd_pd(dv, dup_pair(tilt + i), dup_pair(v + i));
    ang = _mm256_fmadd_pd(gv, a2, ang);
    ang = _mm256_mul_pd(ang, cv);
    _mm256_storeu_pd(pp + 2 * i, _mm256_mul_pd(pv, exp4(ang)));
  }
  for (std::size_t i = n2; i < n; ++i) {
    const double a2 = psi[i].real() * psi[i].real() + psi[i].imag() * psi[i].imag();
    psi[i] *= std::exp(c * (v[i] + d * tilt[i] + g * a2));
  }
}

void tridiag_matvec_v(const double* diag, const double* off,
                      const cd* x, cd* y, std::size_t n) {
  if (n < 4) {
    // fall back for tiny systems
    if (n == 0) return;
    if (n == 1) {
      y[0] = diag[0] * x[0];
      return;
    }
    y[0] = diag[0] * x[0] + off[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i)
      y[i] = diag[i] * x[i] + off[i - 1] * x[i - 1] + off[i] * x[i + 1];
    y[n - 1] = diag[n - 1] * x[n - 1] + off[n - 2] * x[n - 2];
    return;
  }
  y[0] = diag[0] * x[0] + off[0] * x[1];
  const double* xp = reinterpret_cast<const double*>(x);
  double* yp = reinterpret_cast<double*>(y);
  std::size_t i = 1;
  const std::size_t last = n - 1;
  for (; i + 2 <= last; i += 2) {
    __m256d xc = _mm256_loadu_pd(xp + 2 * i);
    __m256d xm = _mm256_loadu_pd(xp + 2 * (i - 1));
    __m256d xq = _mm256_loadu_pd(xp + 2 * (i + 1));
    __m256d r = _mm256_mul_pd(xc, dup_pair(diag + i));
    r = _mm256_fmadd_pd(xm, dup_pair(off + i - 1), r);
    r = _mm256_fmadd_pd(xq, dup_pair(off + i), r);
    _mm256_storeu_pd(yp + 2 * i, r);
  }
  for (; i < last; ++i)
    y[i] = diag[i] * x[i] + off[i - 1] * x[i - 1] + off[i] * x[i + 1];
  y[last] = diag[last] * x[last] + off[last - 1] * x[last - 1];
}

void htridiag_matvec_v(const double* diag, const cd* off,
                       const cd* x, cd* y, std::size_t n) {
  if (n < 4) {
    if (n == 0) return;
    if (n == 1) {
      y[0] = diag[0] * x[0];
      return;
    }
    y[0] = diag[0] * x[0] + off[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i)
      y[i] = diag[i] * x[i] + std::conj(off[i - 1]) * x[i - 1] + off[i] * x[i + 1];
    y[n - 1] = diag[n - 1] * x[n - 1] + std::conj(off[n - 2]) * x[n - 2];
    return;
  }
  y[0] = diag[0] * x[0] + off[0] * x[1];
  const double* xp = reinterpret_cast<const double*>(x);
  const double* op = reinterpret_cast<const double*>(off);
  double* yp = reinterpret_cast<double*>(y);
  const __m256d conj_mask = _mm256_setr_pd(0.0, -0.0, 0.0, -0.0);
  std::size_t i = 1;
  const std::size_t last = n - 1;
  for (; i + 2 <= last; i += 2) {
    __m256d xc = _mm256_loadu_pd(xp + 2 * i);
    __m256d xm = _mm256_loadu_pd(xp + 2 * (i - 1));
    __m256d xq = _mm256_loadu_pd(xp + 2 * (i + 1));
    __m256d om = _mm256_xor_pd(_mm256_loadu_pd(op + 2 * (i - 1)), conj_mask);
    __m256d oq = _mm256_loadu_pd(op + 2 * i);
    __m256d r = _mm256_mul_pd(xc, dup_pair(diag + i));
    r = _mm256_add_pd(r, cmul2(xm, om));
    r = _mm256_add_pd(r, cmul2(xq, oq));
    _mm256_storeu_pd(yp + 2 * i, r);
  }
  for (; i < last; ++i)
    y[i] = diag[i] * x[i] + std::conj(off[i - 1]) * x[i - 1] + off[i] * x[i + 1];
  y[last] = diag[last] * x[last] + std::conj(off[last - 1]) * x[last - 1];
}

void fft_stage_v(cd* a, const cd* tw, std::size_t half, std::size_t n) {
  if (half == 1) {
    const cd w = tw[0];
    for (std::size_t blk = 0; blk < n; blk += 2) {
      const cd u = a[blk];
      const cd t = a[blk + 1] * w;
      a[blk] = u + t;
      a[blk + 1] = u - t;
    }
    return;
  }
  const std::size_t len = 2 * half;
  const double* twp = reinterpret_cast<const double*>(tw);
  for (std::size_t blk = 0; blk < n; blk += len) {
    double* up = reinterpret_cast<double*>(a + blk);
    double* vp = reinterpret_cast<double*>(a + blk + half);
    for (std::size_t j = 0; j < 2 * half; j += 4) {
      __m256d uv = _mm256_loadu_pd(up + j);
      __m256d vv = _mm256_loadu_pd(vp + j);
      __m256d tv = _mm256_loadu_pd(twp + j);
      __m256d t = cmul2(vv, tv);
      _mm256_storeu_pd(up + j, _mm256_add_pd(uv, t));
      _mm256_storeu_pd(vp + j, _mm256_sub_pd(uv, t));
    }
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops = {
      caxpy_v, cscale_v, cmul_v, rscale_v, norm_sq_v, dotc_v,
      weighted_abs2_v, phase_apply_v, damp_apply_v, tridiag_matvec_v,
      htridiag_matvec_v, fft_stage_v,
  };
  return ops;
}

}  // namespace bjj::kernels::detail

#endif  // BJJ_WITH_AVX2
