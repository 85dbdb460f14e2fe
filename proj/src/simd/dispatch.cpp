#include <atomic>
#include <cstdlib>
#include <string>

#include <spdlog/spdlog.h>

#include "kernels_internal.hpp"

namespace pals::simd {
namespace {

Isa best_available() { return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa initial_isa() {
  if (const char* env = std::getenv("PALS_SIMD")) {
    const std::string choice(env);
    if (choice == "scalar") return Isa::scalar;
    if (choice == "avx2") {
      if (isa_available(Isa::avx2)) return Isa::avx2;
      spdlog::warn("PALS_SIMD=avx2 requested but AVX2 is unavailable; using scalar kernels");
      return Isa::scalar;
    }
    spdlog::warn("unknown PALS_SIMD value '{}'; ignoring", choice);
  }
  return best_available();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&kernels_for(initial_isa())};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(PALS_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
#if defined(PALS_HAVE_AVX2_KERNELS)
  if (isa == Isa::avx2 && isa_available(Isa::avx2)) return detail::kAvx2Kernels;
#endif
  (void)isa;
  return detail::kScalarKernels;
}

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

void set_active_isa(Isa isa) { active_slot().store(&kernels_for(isa), std::memory_order_release); }

}  // namespace pals::simd
