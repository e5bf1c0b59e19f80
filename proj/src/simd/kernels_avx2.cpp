#include "siph/simd/kernels.hpp"

#if defined(SIPH_HAVE_AVX2)

#include <immintrin.h>

namespace siph::simd {
namespace {

// Row-of-C at a time: broadcast A(i,l), FMA with row l of B.  B is walked
// row-wise so all vector loads are contiguous; the j-tail is scalar.
void gemm_avx2(int m, int n, int k, const double* a, int lda, const double* b,
               int ldb, double* c, int ldc, bool accumulate) {
  const int n4 = n & ~3;
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<long>(i) * ldc;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) ci[j] = 0.0;
    }
    const double* ai = a + static_cast<long>(i) * lda;
    for (int l = 0; l < k; ++l) {
      const double ail = ai[l];
      if (ail == 0.0) continue;
      const __m256d va = _mm256_set1_pd(ail);
      const double* bl = b + static_cast<long>(l) * ldb;
      int j = 0;
      for (; j < n4; j += 4) {
        __m256d vc = _mm256_loadu_pd(ci + j);
        vc = _mm256_fmadd_pd(va, _mm256_loadu_pd(bl + j), vc);
        _mm256_storeu_pd(ci + j, vc);
      }
      for (; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
}

void axpy_avx2(int n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot_avx2(int n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void scale_avx2(int n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = alpha * x[i];
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels k{gemm_avx2, axpy_avx2, dot_avx2, scale_avx2, "avx2"};
  return k;
}

}  // namespace siph::simd

#endif  // SIPH_HAVE_AVX2
