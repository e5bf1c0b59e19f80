#pragma once

// Small dense kernels with runtime-dispatched SIMD variants.
//
// The workloads here are many exponentials of small (p <= ~128, typically
// p <= 16) row-major matrices, so the kernels are tuned for tiny GEMMs where
// call overhead and clean tails matter more than cache blocking.  The scalar
// variants are the reference semantics; vector variants must match them to
// rounding (tested in test_simd.cpp).

namespace siph::simd {

// C = A*B (accumulate=false) or C += A*B (accumulate=true).
// A is m x k (row stride lda), B is k x n (ldb), C is m x n (ldc).
using GemmFn = void (*)(int m, int n, int k, const double* a, int lda,
                        const double* b, int ldb, double* c, int ldc,
                        bool accumulate);
// y += alpha * x
using AxpyFn = void (*)(int n, double alpha, const double* x, double* y);
// sum_i x[i] * y[i]
using DotFn = double (*)(int n, const double* x, const double* y);
// y = alpha * x
using ScaleFn = void (*)(int n, double alpha, const double* x, double* y);

struct Kernels {
  GemmFn gemm;
  AxpyFn axpy;
  DotFn dot;
  ScaleFn scale;
  const char* name;
};

const Kernels& scalar_kernels();

#if defined(SIPH_HAVE_AVX2)
const Kernels& avx2_kernels();
#endif
#if defined(SIPH_HAVE_NEON)
const Kernels& neon_kernels();
#endif

// Best variant supported by the running CPU.  The environment variable
// SIPH_KERNELS=scalar|avx2|neon overrides the automatic choice.
const Kernels& active();

// Force a variant by name (tests).  Throws std::invalid_argument if the
// variant is unknown or unsupported on this CPU.
void set_active(const char* name);

}  // namespace siph::simd
