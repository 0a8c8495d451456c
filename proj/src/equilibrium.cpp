#include "bdk/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bdk {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace

LimitNotResolved::LimitNotResolved(double probe, double half)
    : std::runtime_error("limit not resolved: Q_j/Q_{j+1} = " + num(probe) +
                         " at the probe index but " + num(half) +
                         " at half of it"),
      at_probe(probe),
      at_half(half) {}

SupercriticalDensity::SupercriticalDensity(double rho, double rho_s)
    : std::domain_error("supercritical density has no equilibrium: rho = " +
                        num(rho) + " > rho_s = " + num(rho_s)) {}

double critical_activity(const CoefficientModel& model, std::size_t j_probe,
                         double tol) {
  if (const auto* p = std::get_if<PowerLaw>(&model.family()))
    return std::exp(-p->C2);
  const std::size_t q_len = model.max_log_q_index();
  if (j_probe == 0) j_probe = q_len - 1;
  if (j_probe < 2 || j_probe + 1 > q_len)
    throw std::out_of_range("critical_activity: probe index " +
                            std::to_string(j_probe) +
                            " needs log Q up to j_probe + 1 (table has " +
                            std::to_string(q_len) + ")");
  const std::size_t half = j_probe / 2;
  const double at_probe =
      std::exp(model.log_q(j_probe) - model.log_q(j_probe + 1));
  const double at_half = std::exp(model.log_q(half) - model.log_q(half + 1));
  if (!(std::abs(at_probe - at_half) <= tol))
    throw LimitNotResolved(at_probe, at_half);
  return at_probe;
}

SeriesSum series_of_activity(const CoefficientModel& model, double z,
                             double tol, int weight_power,
                             const SeriesControl& ctl) {
  if (!(z >= 0.0)) throw std::invalid_argument("activity must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  SeriesSum out;
  if (z == 0.0) return out;
  const double log_z = std::log(z);
  const std::size_t cap = std::min(ctl.term_cap, model.max_log_q_index());
  const std::size_t window = std::max<std::size_t>(ctl.ratio_window, 1);

  std::vector<double> ratios(window, std::numeric_limits<double>::infinity());
  CompensatedSum acc;
  double prev = 0.0;
  for (std::size_t j = 1; j <= cap; ++j) {
    const double x = static_cast<double>(j);
    const double term =
        std::exp(weight_power * std::log(x) + model.log_q(j) + x * log_z);
    out.terms = j;
    if (!std::isfinite(term)) {
      out.divergent = true;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    acc.add(term);
    if (j > 1) ratios[(j - 2) % window] = prev > 0.0 ? term / prev : 0.0;
    prev = term;
    if (j > window) {
      if (term == 0.0) {
        out.value = acc.value();
        out.tail_bound = 0.0;
        return out;
      }
      const double r = *std::max_element(ratios.begin(), ratios.end());
      if (r <= ctl.ratio_threshold) {
        const double bound = term * r / (1.0 - r);
        if (bound <= tol) {
          out.value = acc.value();
          out.tail_bound = bound;
          return out;
        }
      }
    }
  }
  if (cap < ctl.term_cap)
    throw std::out_of_range(
        "series did not converge within the tabulated log Q range (" +
        std::to_string(cap) + " terms)");
  // Terms failed to decay geometrically within the cap.
  out.divergent = true;
  out.value = std::numeric_limits<double>::infinity();
  return out;
}

SeriesSum density_of_activity(const CoefficientModel& model, double z,
                              double tol, const SeriesControl& ctl) {
  return series_of_activity(model, z, tol, 1, ctl);
}

CriticalData critical_density(const CoefficientModel& model, double tol) {
  CriticalData cd;
  cd.z_s = critical_activity(model);
  cd.degenerate = !(cd.z_s > tol);
  const SeriesSum weighted = series_of_activity(model, cd.z_s, tol, 1);
  const SeriesSum unweighted = series_of_activity(model, cd.z_s, tol, 0);
  cd.rho_s = weighted.value;
  cd.rho_s_divergent = weighted.divergent;
  cd.rho_s_unweighted = unweighted.value;
  cd.rho_s_unweighted_divergent = unweighted.divergent;
  cd.series_terms_used = weighted.terms;
  cd.tail_bound = weighted.tail_bound;
  return cd;
}

double activity_of_density(const CoefficientModel& model, double rho,
                           double tol) {
  if (!(rho >= 0.0)) throw std::invalid_argument("density must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (rho == 0.0) return 0.0;
  const double series_tol = tol / 4;
  const CriticalData cd = critical_density(model, series_tol);
  if (!cd.rho_s_divergent) {
    if (rho > cd.rho_s + tol) throw SupercriticalDensity(rho, cd.rho_s);
    if (std::abs(cd.rho_s - rho) <= tol) return cd.z_s;
  }
  double lo = 0.0, hi = cd.z_s;
  double best = 0.5 * (lo + hi);
  double best_resid = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const SeriesSum d = density_of_activity(model, mid, series_tol);
    if (d.divergent) {
      hi = mid;
      continue;
    }
    const double resid = std::abs(d.value - rho);
    if (resid < best_resid) {
      best_resid = resid;
      best = mid;
    }
    if (resid <= tol) return mid;
    (d.value < rho ? lo : hi) = mid;
  }
  return best;
}

EquilibriumProfile equilibrium_profile(const CoefficientModel& model, double z,
                                       std::size_t L) {
  if (!(z >= 0.0)) throw std::invalid_argument("activity must be >= 0");
  if (L < 1) throw std::invalid_argument("profile length must be >= 1");
  EquilibriumProfile p;
  p.z = z;
  p.L = L;
  p.densities.assign(L, 0.0);
  if (z > 0.0) {
    // extended precision keeps the profile an equilibrium to rounding even
    // where log Q_j is large
    const long double log_z = std::log(static_cast<long double>(z));
    for (std::size_t j = 1; j <= L; ++j)
      p.densities[j - 1] = static_cast<double>(std::exp(
          model.log_q_extended(j) + static_cast<long double>(j) * log_z));
    p.densities[0] = z;
  }
  double rho = 0.0;
  for (std::size_t j = L; j >= 1; --j)
    rho += static_cast<double>(j) * p.densities[j - 1];
  p.rho = rho;
  return p;
}

double truncated_density_of_activity(const CoefficientModel& model, double z,
                                     std::size_t L) {
  return equilibrium_profile(model, z, L).rho;
}

double truncated_activity_of_density(const CoefficientModel& model, double rho,
                                     std::size_t L, double tol) {
  if (!(rho >= 0.0)) throw std::invalid_argument("density must be >= 0");
  if (rho == 0.0) return 0.0;
  double lo = 0.0;
  double hi = critical_activity(model);
  if (!(hi > 0.0)) hi = 1.0;
  while (truncated_density_of_activity(model, hi, L) < rho) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double d = truncated_density_of_activity(model, mid, L);
    if (std::abs(d - rho) <= tol) return mid;
    (d < rho ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace bdk
