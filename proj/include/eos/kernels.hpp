#pragma once

// Dense double-precision inner loops used by the vector algebra and the MLP
// oracle. Every kernel has a portable scalar reference implementation; an
// AVX2/FMA variant is compiled on x86-64 and picked at runtime when the CPU
// supports it. Set EOS_LAB_ISA=scalar to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace eos::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Function table for one instruction set. All pointers are non-null.
struct KernelTable {
  Isa isa;
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y = a * x + b * y
  void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);
  void (*scale)(double a, double* x, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  // z = x * y elementwise
  void (*hadamard)(const double* x, const double* y, double* z, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// True when the AVX2 variant was compiled in and the running CPU has AVX2+FMA.
bool avx2_available() noexcept;

/// The AVX2 table; only valid when avx2_available().
const KernelTable& avx2_table() noexcept;

/// Table selected at startup (best available unless overridden by env).
const KernelTable& active() noexcept;

/// Override the active table. Intended for tests and benchmarking.
void set_active(Isa isa);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void axpby(double a, std::span<const double> x, double b, std::span<double> y) {
  active().axpby(a, x.data(), b, y.data(), x.size());
}
inline void scale(double a, std::span<double> x) { active().scale(a, x.data(), x.size()); }
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }
inline void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> z) {
  active().hadamard(x.data(), y.data(), z.data(), x.size());
}

}  // namespace eos::kernels
