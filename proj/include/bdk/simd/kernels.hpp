#pragma once

// Data-parallel inner loops of the truncated kinetics and the integrator.
//
// Every kernel has a scalar reference implementation; vector variants are
// selected at runtime from the CPU's capabilities (override with the
// BDK_SIMD environment variable: scalar | avx2 | neon | auto). Variants agree
// with the reference to rounding: elementwise kernels up to FMA contraction,
// reductions up to reassociation.

#include <cstddef>
#include <span>
#include <string_view>

namespace bdk::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend b);

struct KernelTable {
  Backend backend;

  /// out[i] = a[i] * x[i] * s - b[i] * y[i]
  void (*flux)(const double* a, const double* b, const double* x, double s,
               const double* y, double* out, std::size_t n);

  /// acc[i] += x[i] - y[i]
  void (*add_diff)(double* acc, const double* x, const double* y,
                   std::size_t n);

  /// out[i] = base[i] + h * sum_s coef[s] * stage[s][i]; base may be null
  /// (treated as zero). Stages with coef == 0 are skipped.
  void (*combine)(double* out, const double* base, double h,
                  const double* coef, const double* const* stage,
                  std::size_t n_stages, std::size_t n);

  /// max_i |err[i]| / (atol + rtol * max(|y0[i]|, |y1[i]|))
  double (*error_norm)(const double* err, const double* y0, const double* y1,
                       double atol, double rtol, std::size_t n);

  /// sum_i (i + 1) * x[i]
  double (*index_weighted_sum)(const double* x, std::size_t n);

  /// sum_i (i + 1) * |x[i] - y[i]|
  double (*index_weighted_abs_diff)(const double* x, const double* y,
                                    std::size_t n);

  /// sum_i x[i]
  double (*sum)(const double* x, std::size_t n);

  /// min_i x[i] (+inf for n == 0)
  double (*min)(const double* x, std::size_t n);
};

/// Kernels of the currently selected backend.
const KernelTable& kernels();

/// Kernels of a specific backend; throws std::invalid_argument if the
/// backend is not compiled in or the CPU does not support it.
const KernelTable& kernels(Backend b);

bool available(Backend b);
Backend active_backend();
void set_backend(Backend b);

/// Best backend the CPU supports (ignores BDK_SIMD).
Backend detect_backend();

// span conveniences over the active table

inline double index_weighted_sum(std::span<const double> x) {
  return kernels().index_weighted_sum(x.data(), x.size());
}

inline double index_weighted_abs_diff(std::span<const double> x,
                                      std::span<const double> y) {
  return kernels().index_weighted_abs_diff(x.data(), y.data(), x.size());
}

inline double min_element(std::span<const double> x) {
  return kernels().min(x.data(), x.size());
}

namespace detail {
const KernelTable& scalar_table();
#if defined(BDK_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(BDK_HAVE_NEON)
const KernelTable& neon_table();
#endif
}  // namespace detail

}  // namespace bdk::simd
