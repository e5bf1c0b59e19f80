#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "siph/simd/kernels.hpp"

namespace siph::simd {
namespace {

const Kernels* lookup(const char* name) {
  if (std::strcmp(name, "scalar") == 0) return &scalar_kernels();
#if defined(SIPH_HAVE_AVX2)
  if (std::strcmp(name, "avx2") == 0) {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
      return nullptr;
    return &avx2_kernels();
  }
#endif
#if defined(SIPH_HAVE_NEON)
  if (std::strcmp(name, "neon") == 0) return &neon_kernels();
#endif
  return nullptr;
}

const Kernels* pick_default() {
  if (const char* env = std::getenv("SIPH_KERNELS")) {
    if (const Kernels* k = lookup(env)) return k;
    // Unknown or unsupported request: fall through to auto-detection rather
    // than fail hard inside a static initializer.
  }
#if defined(SIPH_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return &avx2_kernels();
#endif
#if defined(SIPH_HAVE_NEON)
  return &neon_kernels();
#endif
  return &scalar_kernels();
}

const Kernels*& active_slot() {
  static const Kernels* slot = pick_default();
  return slot;
}

}  // namespace

const Kernels& active() { return *active_slot(); }

void set_active(const char* name) {
  const Kernels* k = lookup(name);
  if (!k)
    throw std::invalid_argument(std::string("unknown or unsupported kernel variant: ") + name);
  active_slot() = k;
}

}  // namespace siph::simd
