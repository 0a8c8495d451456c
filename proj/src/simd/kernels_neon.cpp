// AArch64 only; Advanced SIMD is architecturally guaranteed there.
#include <arm_neon.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bdk/simd/kernels.hpp"

namespace bdk::simd::detail {

namespace {

void flux(const double* a, const double* b, const double* x, double s,
          const double* y, double* out, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t ax = vmulq_f64(vld1q_f64(a + i), vld1q_f64(x + i));
    const float64x2_t by = vmulq_f64(vld1q_f64(b + i), vld1q_f64(y + i));
    // ax * s - by
    vst1q_f64(out + i, vfmaq_f64(vnegq_f64(by), ax, vs));
  }
  for (; i < n; ++i) out[i] = a[i] * x[i] * s - b[i] * y[i];
}

void add_diff(double* acc, const double* x, const double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), d));
  }
  for (; i < n; ++i) acc[i] += x[i] - y[i];
}

void combine(double* out, const double* base, double h, const double* coef,
             const double* const* stage, std::size_t n_stages, std::size_t n) {
  const float64x2_t vh = vdupq_n_f64(h);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t s = 0; s < n_stages; ++s)
      if (coef[s] != 0.0)
        acc = vfmaq_f64(acc, vdupq_n_f64(coef[s]), vld1q_f64(stage[s] + i));
    const float64x2_t b0 = base ? vld1q_f64(base + i) : vdupq_n_f64(0.0);
    vst1q_f64(out + i, vfmaq_f64(b0, vh, acc));
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
  const float64x2_t va = vdupq_n_f64(atol);
  const float64x2_t vr = vdupq_n_f64(rtol);
  float64x2_t worst = vdupq_n_f64(0.0);
  uint64x2_t ordered = vdupq_n_u64(~0ull);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t mag =
        vmaxq_f64(vabsq_f64(vld1q_f64(y0 + i)), vabsq_f64(vld1q_f64(y1 + i)));
    const float64x2_t r =
        vdivq_f64(vabsq_f64(vld1q_f64(err + i)), vfmaq_f64(va, vr, mag));
    ordered = vandq_u64(ordered, vceqq_f64(r, r));
    worst = vmaxq_f64(worst, r);
  }
  if ((vgetq_lane_u64(ordered, 0) & vgetq_lane_u64(ordered, 1)) != ~0ull)
    return std::numeric_limits<double>::quiet_NaN();
  double w = vmaxvq_f64(worst);
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
  float64x2_t idx = {1.0, 2.0};
  const float64x2_t step = vdupq_n_f64(2.0);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, idx, vld1q_f64(x + i));
    idx = vaddq_f64(idx, step);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += static_cast<double>(i + 1) * x[i];
  return s;
}

double index_weighted_abs_diff(const double* x, const double* y,
                               std::size_t n) {
  float64x2_t idx = {1.0, 2.0};
  const float64x2_t step = vdupq_n_f64(2.0);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, idx, vabdq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    idx = vaddq_f64(idx, step);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += static_cast<double>(i + 1) * std::abs(x[i] - y[i]);
  return s;
}

double sum(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double min(const double* x, std::size_t n) {
  float64x2_t m = vdupq_n_f64(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) m = vminq_f64(m, vld1q_f64(x + i));
  double r = vminvq_f64(m);
  for (; i < n; ++i) r = std::min(r, x[i]);
  return r;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable t{Backend::Neon,       flux,
                             add_diff,            combine,
                             error_norm,          index_weighted_sum,
                             index_weighted_abs_diff, sum,
                             min};
  return t;
}

}  // namespace bdk::simd::detail
