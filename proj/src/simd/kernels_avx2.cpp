// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bdk/simd/kernels.hpp"

namespace bdk::simd::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_min_sd(lo, sh));
}

inline __m256d vabs(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

void flux(const double* a, const double* b, const double* x, double s,
          const double* y, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ax = _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                     _mm256_loadu_pd(x + i));
    const __m256d by = _mm256_mul_pd(_mm256_loadu_pd(b + i),
                                     _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_fmsub_pd(ax, vs, by));
  }
  for (; i < n; ++i) out[i] = a[i] * x[i] * s - b[i] * y[i];
}

void add_diff(double* acc, const double* x, const double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), d));
  }
  for (; i < n; ++i) acc[i] += x[i] - y[i];
}

void combine(double* out, const double* base, double h, const double* coef,
             const double* const* stage, std::size_t n_stages, std::size_t n) {
  const __m256d vh = _mm256_set1_pd(h);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t s = 0; s < n_stages; ++s)
      if (coef[s] != 0.0)
        acc = _mm256_fmadd_pd(_mm256_set1_pd(coef[s]),
                              _mm256_loadu_pd(stage[s] + i), acc);
    const __m256d b0 = base ? _mm256_loadu_pd(base + i) : _mm256_setzero_pd();
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vh, acc, b0));
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t s = 0; s < n_stages; ++s)
      if (coef[s] != 0.0) acc += coef[s] * stage[s][i];
    out[i] = (base ? base[i] : 0.0) + h * acc;
  }
}

double error_norm(const double* err, const double* y0, const double* y1,
                  double atol, double rtol, std::size_t n) {
  const __m256d va = _mm256_set1_pd(atol);
  const __m256d vr = _mm256_set1_pd(rtol);
  __m256d worst = _mm256_setzero_pd();
  __m256d nan_mask = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mag = _mm256_max_pd(vabs(_mm256_loadu_pd(y0 + i)),
                                      vabs(_mm256_loadu_pd(y1 + i)));
    const __m256d scale = _mm256_fmadd_pd(vr, mag, va);
    const __m256d r = _mm256_div_pd(vabs(_mm256_loadu_pd(err + i)), scale);
    nan_mask = _mm256_or_pd(nan_mask, _mm256_cmp_pd(r, r, _CMP_UNORD_Q));
    worst = _mm256_max_pd(worst, r);
  }
  if (_mm256_movemask_pd(nan_mask) != 0)
    return std::numeric_limits<double>::quiet_NaN();
  double w = hmax(worst);
  for (; i < n; ++i) {
    const double scale =
        atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = std::abs(err[i]) / scale;
    if (std::isnan(r)) return r;
    w = std::max(w, r);
  }
  return w;
}

double index_weighted_sum(const double* x, std::size_t n) {
  __m256d idx = _mm256_set_pd(4.0, 3.0, 2.0, 1.0);
  const __m256d step = _mm256_set1_pd(4.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(idx, _mm256_loadu_pd(x + i), acc);
    idx = _mm256_add_pd(idx, step);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += static_cast<double>(i + 1) * x[i];
  return s;
}

double index_weighted_abs_diff(const double* x, const double* y,
                               std::size_t n) {
  __m256d idx = _mm256_set_pd(4.0, 3.0, 2.0, 1.0);
  const __m256d step = _mm256_set1_pd(4.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        vabs(_mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    acc = _mm256_fmadd_pd(idx, d, acc);
    idx = _mm256_add_pd(idx, step);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += static_cast<double>(i + 1) * std::abs(x[i] - y[i]);
  return s;
}

double sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i];
  return s;
}

double min(const double* x, std::size_t n) {
  __m256d m = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_min_pd(m, _mm256_loadu_pd(x + i));
  double r = hmin(m);
  for (; i < n; ++i) r = std::min(r, x[i]);
  return r;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{Backend::Avx2,       flux,
                             add_diff,            combine,
                             error_norm,          index_weighted_sum,
                             index_weighted_abs_diff, sum,
                             min};
  return t;
}

}  // namespace bdk::simd::detail
