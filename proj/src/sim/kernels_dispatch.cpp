#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "qmeta/simd/kernels.hpp"

namespace qmeta::simd {

#ifndef QMETA_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_supports_avx2() {
#if defined(QMETA_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable* detect() {
  if (const char* env = std::getenv("QMETA_SIMD"); env && std::string(env) == "scalar") return &scalar_kernels();
  if (cpu_supports_avx2() && avx2_kernels()) return avx2_kernels();
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& active_kernels() { return *current().load(std::memory_order_acquire); }

void select_backend(Backend b) {
  switch (b) {
    case Backend::Auto: current().store(detect()); break;
    case Backend::Scalar: current().store(&scalar_kernels()); break;
    case Backend::Avx2:
      if (!cpu_supports_avx2() || !avx2_kernels()) throw std::runtime_error("AVX2 kernels are not available");
      current().store(avx2_kernels());
      break;
  }
}

std::string_view active_backend_name() { return active_kernels().name; }

}  // namespace qmeta::simd
