#include "spinpair/kernels.hpp"

#include <stdexcept>

#if defined(__x86_64__)
#include <cpuid.h>
#endif

namespace spinpair::kernels {

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__)
  unsigned int eax, ebx, ecx, edx;
  if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
  const bool avx2 = (ebx & (1u << 5)) != 0;
  if (!__get_cpuid(1, &eax, &ebx, &ecx, &edx)) return false;
  const bool fma = (ecx & (1u << 12)) != 0;
  const bool osxsave = (ecx & (1u << 27)) != 0;
  return avx2 && fma && osxsave;
#else
  return false;
#endif
}

}  // namespace

bool available(Backend b) {
  switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2: {
      static const bool ok = cpu_has_avx2_fma();
      return ok;
    }
  }
  return false;
}

Backend best_available() {
  return available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

Rk4StepFn get(Backend b) {
  switch (b) {
    case Backend::scalar: return detail::rk4_step_scalar;
    case Backend::avx2:
#if defined(__x86_64__)
      if (available(Backend::avx2)) return detail::rk4_step_avx2;
#endif
      throw std::runtime_error("avx2 kernel requested but not supported on this CPU");
  }
  throw std::runtime_error("unknown kernel backend");
}

const char* name(Backend b) {
  return b == Backend::scalar ? "scalar" : "avx2";
}

Backend parse_backend(const std::string& s) {
  if (s == "auto") return best_available();
  if (s == "scalar") return Backend::scalar;
  if (s == "avx2") return Backend::avx2;
  throw std::invalid_argument("unknown kernel backend '" + s + "' (auto|scalar|avx2)");
}

}  // namespace spinpair::kernels
