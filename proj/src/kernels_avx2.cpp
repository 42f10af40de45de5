// AVX2+FMA variant of the RK4 propagation kernel. Compiled with -mavx2
// -mfma for this translation unit only; callers go through the runtime
// dispatch in kernels.cpp, which checks CPU support first.
#if defined(__x86_64__)

#include <immintrin.h>

#include "spinpair/kernels.hpp"

namespace spinpair::kernels::detail {

namespace {

// A __m256d holds two adjacent complex doubles [re0, im0, re1, im1].
// Complex multiply-accumulate of a scalar a = (ar, ai) against a pair b:
//   acc += a * b
// via the addsub/shuffle idiom.
inline __m256d cmadd(__m256d ar, __m256d ai, __m256d b, __m256d acc) {
  const __m256d b_swap = _mm256_shuffle_pd(b, b, 0x5);  // [im0, re0, im1, re1]
  // fmaddsub: even lanes ar*b - t, odd lanes ar*b + t with t = ai*b_swap.
  const __m256d t = _mm256_mul_pd(ai, b_swap);
  return _mm256_add_pd(acc, _mm256_fmaddsub_pd(ar, b, t));
}

// y = -i * H * x (4x4 complex, row-major).
inline void minus_i_h_mul(const double* h, const double* x, double* y) {
  const __m256d negi_signs = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);  // [+, -, +, -] order note below
  for (int i = 0; i < 4; ++i) {
    __m256d acc0 = _mm256_setzero_pd();  // columns 0..1
    __m256d acc1 = _mm256_setzero_pd();  // columns 2..3
    for (int k = 0; k < 4; ++k) {
      const double hr = h[8 * i + 2 * k];
      const double hi = h[8 * i + 2 * k + 1];
      const __m256d ar = _mm256_set1_pd(hr);
      const __m256d ai = _mm256_set1_pd(hi);
      const __m256d b0 = _mm256_loadu_pd(x + 8 * k);
      const __m256d b1 = _mm256_loadu_pd(x + 8 * k + 4);
      acc0 = cmadd(ar, ai, b0, acc0);
      acc1 = cmadd(ar, ai, b1, acc1);
    }
    // Multiply by -i: (re, im) -> (im, -re): swap pairs, negate odd lanes.
    acc0 = _mm256_shuffle_pd(acc0, acc0, 0x5);
    acc1 = _mm256_shuffle_pd(acc1, acc1, 0x5);
    acc0 = _mm256_mul_pd(acc0, negi_signs);
    acc1 = _mm256_mul_pd(acc1, negi_signs);
    _mm256_storeu_pd(y + 8 * i, acc0);
    _mm256_storeu_pd(y + 8 * i + 4, acc1);
  }
}

inline void axpy16(const double* x, double a, const double* k, double* out) {
  const __m256d av = _mm256_set1_pd(a);
  for (int i = 0; i < 32; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d kv = _mm256_loadu_pd(k + i);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(av, kv, xv));
  }
}

}  // namespace

void rk4_step_avx2(const cplx* h0c, const cplx* hhc, const cplx* h1c, cplx* uc, double dt) {
  const double* h0 = reinterpret_cast<const double*>(h0c);
  const double* hh = reinterpret_cast<const double*>(hhc);
  const double* h1 = reinterpret_cast<const double*>(h1c);
  double* u = reinterpret_cast<double*>(uc);

  alignas(32) double k1[32], k2[32], k3[32], k4[32], tmp[32];
  minus_i_h_mul(h0, u, k1);
  axpy16(u, 0.5 * dt, k1, tmp);
  minus_i_h_mul(hh, tmp, k2);
  axpy16(u, 0.5 * dt, k2, tmp);
  minus_i_h_mul(hh, tmp, k3);
  axpy16(u, dt, k3, tmp);
  minus_i_h_mul(h1, tmp, k4);

  const __m256d w = _mm256_set1_pd(dt / 6.0);
  const __m256d two = _mm256_set1_pd(2.0);
  for (int i = 0; i < 32; i += 4) {
    __m256d s = _mm256_loadu_pd(k1 + i);
    s = _mm256_fmadd_pd(two, _mm256_loadu_pd(k2 + i), s);
    s = _mm256_fmadd_pd(two, _mm256_loadu_pd(k3 + i), s);
    s = _mm256_add_pd(s, _mm256_loadu_pd(k4 + i));
    const __m256d uv = _mm256_loadu_pd(u + i);
    _mm256_storeu_pd(u + i, _mm256_fmadd_pd(w, s, uv));
  }
}

}  // namespace spinpair::kernels::detail

#endif  // __x86_64__
