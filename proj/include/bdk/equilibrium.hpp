#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdk/coefficients.hpp"

namespace bdk {

/// Result of summing sum_j j^p Q_j z^j.
struct SeriesSum {
  double value = 0.0;
  bool divergent = false;
  std::size_t terms = 0;
  /// geometric majorant of the neglected remainder
  double tail_bound = 0.0;
};

struct CriticalData {
  double z_s = 0.0;
  /// sum_j j Q_j z_s^j (meaningless when rho_s_divergent)
  double rho_s = 0.0;
  bool rho_s_divergent = false;
  /// sum_j Q_j z_s^j, the unweighted reading of the critical density
  double rho_s_unweighted = 0.0;
  bool rho_s_unweighted_divergent = false;
  std::size_t series_terms_used = 0;
  double tail_bound = 0.0;
  bool degenerate = false;
};

struct EquilibriumProfile {
  double z = 0.0;
  std::size_t L = 0;
  /// densities[j-1] = Q_j z^j
  std::vector<double> densities;
  /// sum_{j<=L} j c_j
  double rho = 0.0;

  double c(std::size_t j) const { return densities.at(j - 1); }
};

class LimitNotResolved : public std::runtime_error {
 public:
  LimitNotResolved(double at_probe, double at_half);
  double at_probe;
  double at_half;
};

class SupercriticalDensity : public std::domain_error {
 public:
  SupercriticalDensity(double rho, double rho_s);
};

/// Series controls. The sum stops once the largest of the last
/// `ratio_window` term ratios is <= `ratio_threshold` and the geometric
/// remainder bound is <= tol; `term_cap` terms without that happening is
/// reported as divergence.
struct SeriesControl {
  double ratio_threshold = 0.999;
  std::size_t ratio_window = 10;
  std::size_t term_cap = 10'000'000;
  double divergence_sum = 1e12;
};

/// z_s = lim Q_j / Q_{j+1}. PowerLaw: e^{-C2}. Tabulated: the ratio at
/// j_probe, required to agree with the ratio at j_probe / 2 within tol
/// (default: the largest probe the table allows).
double critical_activity(const CoefficientModel& model,
                         std::size_t j_probe = 0,
                         double tol = kLimitTolerance);

/// sum_j j Q_j z^j (weight_power = 1) or sum_j Q_j z^j (weight_power = 0).
SeriesSum series_of_activity(const CoefficientModel& model, double z,
                             double tol, int weight_power = 1,
                             const SeriesControl& ctl = {});

/// Density sum_j j Q_j z^j of the equilibrium with activity z.
SeriesSum density_of_activity(const CoefficientModel& model, double z,
                              double tol, const SeriesControl& ctl = {});

/// The activity z in [0, z_s] with density rho (bisection, residual <= tol).
/// Throws SupercriticalDensity if rho > rho_s.
double activity_of_density(const CoefficientModel& model, double rho,
                           double tol);

CriticalData critical_density(const CoefficientModel& model, double tol);

EquilibriumProfile equilibrium_profile(const CoefficientModel& model, double z,
                                       std::size_t L);

/// sum_{j<=L} j Q_j z^j of the truncated system (any z >= 0).
double truncated_density_of_activity(const CoefficientModel& model, double z,
                                     std::size_t L);

/// Activity of the equilibrium of the size-L truncated system with density
/// rho. Unlike the infinite system every rho >= 0 has one; for rho > rho_s
/// the activity exceeds z_s.
double truncated_activity_of_density(const CoefficientModel& model, double rho,
                                     std::size_t L, double tol);

}  // namespace bdk
