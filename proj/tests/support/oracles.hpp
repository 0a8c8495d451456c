#pragma once

// Independent reference computations for the test suites. Nothing here
// shares code with the library beyond the coefficient accessors.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "bdk/coefficients.hpp"
#include "bdk/kinetics.hpp"

namespace bdk::oracle {

/// Generic coagulation-fragmentation RHS on the closed truncation:
///   dc_i/dt = 1/2 sum_{j+k=i} W_jk - sum_{k<=L-i} W_ik
/// over every ordered pair, with the cutoff living in the kernel itself.
/// O(L^2), no regime bookkeeping.
inline std::vector<double> brute_force_rhs(const CoefficientModel& m,
                                           const std::vector<double>& c) {
  const std::size_t L = c.size();
  std::vector<double> d(L, 0.0);
  for (std::size_t j = 1; j < L; ++j)
    for (std::size_t k = 1; j + k <= L; ++k) {
      const double a = m.coag_rate(j, k);
      if (a == 0.0) continue;
      const double b = a * std::exp(m.log_q(j) + m.log_q(k) - m.log_q(j + k));
      const double w = a * c[j - 1] * c[k - 1] - b * c[j + k - 1];
      d[j + k - 1] += 0.5 * w;
      d[j - 1] -= 0.5 * w;
      d[k - 1] -= 0.5 * w;
    }
  return d;
}

/// sum over the oracle's terms of their magnitudes, the scale for relative
/// comparisons of component i
inline std::vector<double> brute_force_scale(const CoefficientModel& m,
                                             const std::vector<double>& c) {
  const std::size_t L = c.size();
  std::vector<double> s(L, 0.0);
  for (std::size_t j = 1; j < L; ++j)
    for (std::size_t k = 1; j + k <= L; ++k) {
      const double a = m.coag_rate(j, k);
      if (a == 0.0) continue;
      const double b = a * std::exp(m.log_q(j) + m.log_q(k) - m.log_q(j + k));
      const double w = std::abs(a * c[j - 1] * c[k - 1]) +
                       std::abs(b * c[j + k - 1]);
      s[j + k - 1] += 0.5 * w;
      s[j - 1] += 0.5 * w;
      s[k - 1] += 0.5 * w;
    }
  return s;
}

/// Random positive state: log-uniform components over many decades with a
/// decaying envelope so all regimes carry weight.
inline State random_state(std::mt19937_64& rng, std::size_t L) {
  std::uniform_real_distribution<double> u(-6.0, 0.0);
  std::uniform_real_distribution<double> decay(0.0, 0.2);
  const double rate = decay(rng);
  State s;
  s.c.resize(L);
  for (std::size_t j = 1; j <= L; ++j)
    s.c[j - 1] = std::pow(10.0, u(rng)) * std::exp(-rate * static_cast<double>(j));
  return s;
}

/// Random positive decaying sequence (not necessarily monotone).
inline std::vector<double> random_decaying(std::mt19937_64& rng,
                                           std::size_t M) {
  std::uniform_real_distribution<double> jitter(0.2, 5.0);
  std::uniform_real_distribution<double> rate_d(0.01, 1.0);
  std::uniform_real_distribution<double> amp(-3.0, 3.0);
  const double rate = rate_d(rng);
  const double a = std::pow(10.0, amp(rng));
  std::vector<double> g(M);
  for (std::size_t k = 1; k <= M; ++k)
    g[k - 1] = a * jitter(rng) * std::exp(-rate * static_cast<double>(k));
  return g;
}

inline CoefficientModel reference_model() {
  return CoefficientModel::power_law(2, 1.0, 0.5, 1.0, 0.5);
}

/// sum_{j>=1} j Q_j z_s^j of the reference model, fixed by direct summation
/// in extended precision until terms fell below 1e-30.
inline constexpr double kReferenceRhoS = 11.941043116529912;
inline constexpr double kReferenceRhoSUnweighted = 1.6704068179663398;

}  // namespace bdk::oracle
