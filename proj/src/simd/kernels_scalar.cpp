#include <algorithm>
#include <cmath>
#include <limits>

#include "bdk/simd/kernels.hpp"

namespace bdk::simd::detail {

namespace {

void flux(const double* a, const double* b, const double* x, double s,
          const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * x[i] * s - b[i] * y[i];
}

void add_diff(double* acc, const double* x, const double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i] - y[i];
}

void combine(double* out, const double* base, double h, const double* coef,
             const double* const* stage, std::size_t n_stages, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t s = 0; s < n_stages; ++s)
      if (coef[s] != 0.0) acc += coef[s] * stage[s][i];
    out[i] = (base ? base[i] : 0.0) + h * acc;
  }
}

double error_norm(const double* err, const double* y0, const double* y1,
                  double atol, double rtol, std::size_t n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scale =
        atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = std::abs(err[i]) / scale;
    if (std::isnan(r)) return r;
    worst = std::max(worst, r);
  }
  return worst;
}

double index_weighted_sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(i + 1) * x[i];
  return acc;
}

double index_weighted_abs_diff(const double* x, const double* y,
                               std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += static_cast<double>(i + 1) * std::abs(x[i] - y[i]);
  return acc;
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double min(const double* x, std::size_t n) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::min(m, x[i]);
  return m;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Backend::Scalar,     flux,
                             add_diff,            combine,
                             error_norm,          index_weighted_sum,
                             index_weighted_abs_diff, sum,
                             min};
  return t;
}

}  // namespace bdk::simd::detail
