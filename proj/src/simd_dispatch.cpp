// Runtime kernel selection: CPU feature probe plus QCHAOS_SIMD override.
#include "qchaos/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace qchaos::simd {
namespace {

enum class Variant { kScalar, kAvx2 };

Variant resolve() {
  const bool hw = cpu_has_avx2();
  if (const char* env = std::getenv("QCHAOS_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Variant::kScalar;
    if (std::strcmp(env, "avx2") == 0 && hw) return Variant::kAvx2;
    // "auto", unknown values, or unsatisfiable requests fall through.
  }
  return hw ? Variant::kAvx2 : Variant::kScalar;
}

Variant active_variant() {
  static const Variant v = resolve();
  return v;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels& active() {
  return active_variant() == Variant::kAvx2 ? avx2_kernels() : scalar_kernels();
}

std::string active_name() {
  return active_variant() == Variant::kAvx2 ? "avx2" : "scalar";
}

}  // namespace qchaos::simd
