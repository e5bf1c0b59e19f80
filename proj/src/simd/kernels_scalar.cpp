#include "siph/simd/kernels.hpp"

namespace siph::simd {
namespace {

void gemm_scalar(int m, int n, int k, const double* a, int lda,
                 const double* b, int ldb, double* c, int ldc,
                 bool accumulate) {
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<long>(i) * ldc;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) ci[j] = 0.0;
    }
    const double* ai = a + static_cast<long>(i) * lda;
    for (int l = 0; l < k; ++l) {
      const double ail = ai[l];
      if (ail == 0.0) continue;  // structured T matrices are mostly zeros
      const double* bl = b + static_cast<long>(l) * ldb;
      for (int j = 0; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
}

void axpy_scalar(int n, double alpha, const double* x, double* y) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dot_scalar(int n, const double* x, const double* y) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void scale_scalar(int n, double alpha, const double* x, double* y) {
  for (int i = 0; i < n; ++i) y[i] = alpha * x[i];
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{gemm_scalar, axpy_scalar, dot_scalar, scale_scalar,
                         "scalar"};
  return k;
}

}  // namespace siph::simd
