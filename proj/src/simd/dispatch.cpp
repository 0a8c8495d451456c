#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "bdk/simd/kernels.hpp"

namespace bdk::simd {

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "?";
}

bool available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(BDK_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(BDK_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend detect_backend() {
  if (available(Backend::Avx2)) return Backend::Avx2;
  if (available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

const KernelTable& kernels(Backend b) {
  if (!available(b))
    throw std::invalid_argument("SIMD backend " + std::string(to_string(b)) +
                                " is not available on this build/CPU");
  switch (b) {
#if defined(BDK_HAVE_AVX2)
    case Backend::Avx2:
      return detail::avx2_table();
#endif
#if defined(BDK_HAVE_NEON)
    case Backend::Neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

namespace {

Backend initial_backend() {
  const char* env = std::getenv("BDK_SIMD");
  if (!env || std::string(env).empty() || std::string(env) == "auto")
    return detect_backend();
  const std::string v(env);
  for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon})
    if (v == to_string(b)) {
      if (!available(b))
        throw std::runtime_error("BDK_SIMD=" + v +
                                 " requested but not available");
      return b;
    }
  throw std::runtime_error("BDK_SIMD must be scalar, avx2, neon or auto; got " +
                           v);
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{&kernels(initial_backend())};
  return table;
}

}  // namespace

const KernelTable& kernels() {
  return *active().load(std::memory_order_acquire);
}

Backend active_backend() { return kernels().backend; }

void set_backend(Backend b) {
  active().store(&kernels(b), std::memory_order_release);
}

}  // namespace bdk::simd
