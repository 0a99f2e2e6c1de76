#include <cstdlib>
#include <string_view>

#include "bcmf/simd/kernels.hpp"

namespace bcmf::simd {

#if defined(BCMF_HAVE_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif

const KernelTable* avx2_kernels() {
#if defined(BCMF_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2::table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select() {
  const char* env = std::getenv("BCMF_SIMD");
  const std::string_view request = env ? env : "";
  if (request == "scalar") return scalar_kernels();
  if (const KernelTable* vec = avx2_kernels()) return *vec;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace bcmf::simd
