#include "siph/simd/kernels.hpp"

#if defined(SIPH_HAVE_NEON)

#include <arm_neon.h>

namespace siph::simd {
namespace {

void gemm_neon(int m, int n, int k, const double* a, int lda, const double* b,
               int ldb, double* c, int ldc, bool accumulate) {
  const int n2 = n & ~1;
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<long>(i) * ldc;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) ci[j] = 0.0;
    }
    const double* ai = a + static_cast<long>(i) * lda;
    for (int l = 0; l < k; ++l) {
      const double ail = ai[l];
      if (ail == 0.0) continue;
      const float64x2_t va = vdupq_n_f64(ail);
      const double* bl = b + static_cast<long>(l) * ldb;
      int j = 0;
      for (; j < n2; j += 2) {
        float64x2_t vc = vld1q_f64(ci + j);
        vc = vfmaq_f64(vc, va, vld1q_f64(bl + j));
        vst1q_f64(ci + j, vc);
      }
      for (; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
}

void axpy_neon(int n, double alpha, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(alpha);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot_neon(int n, const double* x, const double* y) {
  float64x2_t acc = vdupq_n_f64(0.0);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  }
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void scale_neon(int n, double alpha, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(alpha);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vmulq_f64(va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] = alpha * x[i];
}

}  // namespace

const Kernels& neon_kernels() {
  static const Kernels k{gemm_neon, axpy_neon, dot_neon, scale_neon, "neon"};
  return k;
}

}  // namespace siph::simd

#endif  // SIPH_HAVE_NEON
