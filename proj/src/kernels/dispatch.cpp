#include <atomic>
#include <cstdlib>
#include <string>

#include "eos/error.hpp"
#include "eos/kernels.hpp"

namespace eos::kernels {

#ifndef EOS_KERNELS_AVX2
const KernelTable& avx2_table() noexcept { return scalar_table(); }
#endif

std::string_view to_string(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool avx2_available() noexcept {
#if defined(EOS_KERNELS_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

namespace {

const KernelTable* select_initial() noexcept {
  if (const char* env = std::getenv("EOS_LAB_ISA"); env && std::string(env) == "scalar") {
    return &scalar_table();
  }
  return avx2_available() ? &avx2_table() : &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> table{select_initial()};
  return table;
}

}  // namespace

const KernelTable& active() noexcept { return *slot().load(std::memory_order_relaxed); }

void set_active(Isa isa) {
  if (isa == Isa::avx2 && !avx2_available()) {
    throw ConfigError("AVX2 kernels requested but not available on this CPU/build");
  }
  slot().store(isa == Isa::avx2 ? &avx2_table() : &scalar_table());
}

}  // namespace eos::kernels
