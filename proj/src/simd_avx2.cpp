// AVX2+FMA variants. Compiled with -mavx2 -mfma; only dispatched to when the
// CPU reports both features.
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>

namespace sbsvm::simd::avx2 {

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  // Lane sum ((l0+l1)+(l2+l3)), then the scalar tail, matching the scalar
  // kernel's reduction order.
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  double l0 = _mm_cvtsd_f64(lo);
  double l1 = _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
  double l2 = _mm_cvtsd_f64(hi);
  double l3 = _mm_cvtsd_f64(_mm_unpackhi_pd(hi, hi));
  double tail = 0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((l0 + l1) + (l2 + l3)) + tail;
}

double sumsq(const double* a, std::size_t n) { return dot(a, a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

}  // namespace sbsvm::simd::avx2

#endif
