// Compiled with -mavx2 -mfma; only reached through avx2_kernels() after a
// CPU feature check.
#include <immintrin.h>

#include "flatinv/simd/kernels.hpp"

namespace flatinv::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// Lanes of a*b hold [ar*br, ai*bi, ...]; lanes of a*swap(b) hold [ar*bi, ai*br, ...].
// Even/odd lanes are separated at the end by a sign mask.
struct PairAcc {
  __m256d direct = _mm256_setzero_pd();
  __m256d swapped = _mm256_setzero_pd();
};

inline PairAcc accumulate(const cplx* a, const cplx* b, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  const auto* pb = reinterpret_cast<const double*>(b);
  PairAcc acc0;
  PairAcc acc1;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d va0 = _mm256_loadu_pd(pa + 2 * i);
    __m256d vb0 = _mm256_loadu_pd(pb + 2 * i);
    __m256d va1 = _mm256_loadu_pd(pa + 2 * i + 4);
    __m256d vb1 = _mm256_loadu_pd(pb + 2 * i + 4);
    acc0.direct = _mm256_fmadd_pd(va0, vb0, acc0.direct);
    acc0.swapped = _mm256_fmadd_pd(va0, _mm256_permute_pd(vb0, 0b0101), acc0.swapped);
    acc1.direct = _mm256_fmadd_pd(va1, vb1, acc1.direct);
    acc1.swapped = _mm256_fmadd_pd(va1, _mm256_permute_pd(vb1, 0b0101), acc1.swapped);
  }
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(pa + 2 * i);
    __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    acc0.direct = _mm256_fmadd_pd(va, vb, acc0.direct);
    acc0.swapped = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0b0101), acc0.swapped);
  }
  if (i < n) {
    __m256d va = _mm256_castpd128_pd256(_mm_loadu_pd(pa + 2 * i));
    __m256d vb = _mm256_castpd128_pd256(_mm_loadu_pd(pb + 2 * i));
    va = _mm256_insertf128_pd(va, _mm_setzero_pd(), 1);
    vb = _mm256_insertf128_pd(vb, _mm_setzero_pd(), 1);
    acc0.direct = _mm256_fmadd_pd(va, vb, acc0.direct);
    acc0.swapped = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0b0101), acc0.swapped);
  }
  acc0.direct = _mm256_add_pd(acc0.direct, acc1.direct);
  acc0.swapped = _mm256_add_pd(acc0.swapped, acc1.swapped);
  return acc0;
}

// Built per call: a namespace-scope vector constant would run AVX code during
// static initialization, before any feature check.
inline __m256d neg_odd() { return _mm256_setr_pd(1.0, -1.0, 1.0, -1.0); }

cplx dot_avx2(const cplx* a, const cplx* b, std::size_t n) {
  PairAcc acc = accumulate(a, b, n);
  // re = ar*br - ai*bi, im = ar*bi + ai*br
  return {hsum(_mm256_mul_pd(acc.direct, neg_odd())), hsum(acc.swapped)};
}

cplx dot_conj_avx2(const cplx* a, const cplx* b, std::size_t n) {
  PairAcc acc = accumulate(a, b, n);
  // re = ar*br + ai*bi, im = ar*bi - ai*br
  return {hsum(acc.direct), hsum(_mm256_mul_pd(acc.swapped, neg_odd()))};
}

void matvec_avx2(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

void scale_real_avx2(const double* r, const cplx* in, cplx* out, std::size_t n) {
  const auto* pin = reinterpret_cast<const double*>(in);
  auto* pout = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d rr = _mm256_castpd128_pd256(_mm_loadu_pd(r + i));
    rr = _mm256_permute4x64_pd(rr, 0b01010000);
    _mm256_storeu_pd(pout + 2 * i, _mm256_mul_pd(rr, _mm256_loadu_pd(pin + 2 * i)));
  }
  for (; i < n; ++i) out[i] = {r[i] * in[i].real(), r[i] * in[i].imag()};
}

double sum_sq_avx2(const double* p, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d v0 = _mm256_loadu_pd(p + i);
    __m256d v1 = _mm256_loadu_pd(p + i + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(p + i);
    acc0 = _mm256_fmadd_pd(v, v, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += p[i] * p[i];
  return s;
}

double sum_abs2_avx2(const cplx* x, std::size_t n) {
  return sum_sq_avx2(reinterpret_cast<const double*>(x), 2 * n);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2",          dot_avx2,      dot_conj_avx2, matvec_avx2,
                                 scale_real_avx2, sum_abs2_avx2, sum_sq_avx2};
  return table;
}

}  // namespace flatinv::simd
