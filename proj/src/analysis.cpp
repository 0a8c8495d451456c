#include "bdk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bdk/simd/kernels.hpp"

namespace bdk {

double tail_mass(const State& s, std::size_t i) {
  if (i < 1 || i > s.L())
    throw std::out_of_range("tail_mass index must lie in [1, L]");
  double g = 0.0;
  for (std::size_t j = s.L(); j >= i; --j)
    g += static_cast<double>(j) * s.c[j - 1];
  return g;
}

std::vector<double> tail_masses(const State& s) {
  std::vector<double> G(s.L(), 0.0);
  double g = 0.0;
  for (std::size_t j = s.L(); j >= 1; --j) {
    g += static_cast<double>(j) * s.c[j - 1];
    G[j - 1] = g;
  }
  return G;
}

double moment(const State& s, double mu) {
  double m = 0.0;
  for (std::size_t j = s.L(); j >= 1; --j)
    m += std::pow(static_cast<double>(j), mu) * s.c[j - 1];
  return m;
}

double strong_distance(const State& s, const EquilibriumProfile& ref) {
  if (ref.densities.size() != s.L())
    throw std::invalid_argument("strong_distance: state has L = " +
                                std::to_string(s.L()) + ", reference has " +
                                std::to_string(ref.densities.size()));
  return simd::index_weighted_abs_diff(s.c, ref.densities);
}

double head_distance(const State& s, const CoefficientModel& model, double z,
                     std::size_t J) {
  J = std::min(J, s.L());
  double worst = 0.0;
  const double log_z = z > 0.0 ? std::log(z) : 0.0;
  for (std::size_t j = 1; j <= J; ++j) {
    const double eq =
        z > 0.0 ? std::exp(model.log_q(j) + static_cast<double>(j) * log_z)
                : 0.0;
    worst = std::max(worst, std::abs(s.c[j - 1] - eq));
  }
  return worst;
}

TailEnvelope build_tail_envelope(std::span<const double> g, double lambda) {
  if (g.empty()) throw std::invalid_argument("envelope needs a nonempty g");
  if (!(lambda > 1.0) || !std::isfinite(lambda))
    throw std::invalid_argument("envelope ratio lambda must be > 1");
  for (std::size_t k = 0; k < g.size(); ++k)
    if (!(g[k] > 0.0) || !std::isfinite(g[k]))
      throw std::invalid_argument("envelope input g_" + std::to_string(k + 1) +
                                  " must be positive and finite");
  const std::size_t M = g.size();

  // gbar[k-1] = sup_{j>=k} g_j, gbar_1 raised by 1, gbar_{M+1} = 0
  std::vector<double> gbar(M + 1, 0.0);
  for (std::size_t k = M; k >= 1; --k) gbar[k - 1] = std::max(g[k - 1], gbar[k]);
  gbar[0] += 1.0;

  TailEnvelope env;
  env.lambda = lambda;
  env.source.assign(g.begin(), g.end());
  env.s.resize(M);
  env.s[0] = gbar[0] - gbar[1];
  for (std::size_t k = 1; k < M; ++k) {
    const double prev = env.s[k - 1];
    // smallest representable value with prev / cand <= lambda
    double cand = prev / lambda;
    while (prev / cand > lambda) cand = std::nextafter(cand, INFINITY);
    env.s[k] = std::max(cand, gbar[k] - gbar[k + 1]);
  }
  env.closure = env.s[M - 1] / (lambda - 1.0);

  // r_k = r_{k+1} + s_k; ulp-level repairs keep r dominating gbar (and so g)
  // and strictly decreasing in floating point.
  env.r.resize(M);
  double next = env.closure;
  for (std::size_t k = M; k >= 1; --k) {
    double rk = next + env.s[k - 1];
    if (rk < gbar[k - 1]) rk = gbar[k - 1];
    if (!(rk > next)) rk = std::nextafter(next, INFINITY);
    env.r[k - 1] = rk;
    next = rk;
  }
  return env;
}

std::string BoundReport::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << "tail bound G_i(t) <= C r_i, C = " << C << ", i in [" << k0 << ", "
     << M << "], t >= " << t0 << "\n";
  os << "  snapshots checked: " << snapshots_checked << "\n";
  os << "  minimal C: " << minimal_C << " (attained at t = " << argmax_t
     << ", i = " << argmax_i << ")\n";
  os << "  violations: " << violations.size() << "\n";
  const std::size_t shown = std::min<std::size_t>(violations.size(), 10);
  if (shown) os << "  " << "t" << "\t" << "i" << "\t" << "G_i" << "\t"
                << "C r_i" << "\n";
  for (std::size_t v = 0; v < shown; ++v)
    os << "  " << violations[v].t << "\t" << violations[v].i << "\t"
       << violations[v].G << "\t" << violations[v].bound << "\n";
  return os.str();
}

std::string BoundReport::to_kv(const std::string& prefix) const {
  std::ostringstream os;
  os.precision(17);
  os << prefix << ".C = " << C << "\n"
     << prefix << ".k0 = " << k0 << "\n"
     << prefix << ".M = " << M << "\n"
     << prefix << ".t0 = " << t0 << "\n"
     << prefix << ".snapshots_checked = " << snapshots_checked << "\n"
     << prefix << ".minimal_C = " << minimal_C << "\n"
     << prefix << ".violations = " << violations.size() << "\n";
  return os.str();
}

BoundReport check_tail_bound(const Trajectory& traj, const TailEnvelope& env,
                             double C, std::size_t k0, double t0) {
  if (k0 < 1) throw std::invalid_argument("k0 must be >= 1");
  BoundReport rep;
  rep.C = C;
  rep.k0 = k0;
  rep.t0 = t0;
  rep.M = std::min(env.size(), traj.L);
  for (const auto& snap : traj.snapshots) {
    if (snap.state.t < t0) continue;
    ++rep.snapshots_checked;
    const std::vector<double> G = tail_masses(snap.state);
    for (std::size_t i = k0; i <= rep.M; ++i) {
      const double r = env.r[i - 1];
      const double ratio = G[i - 1] / r;
      if (ratio > rep.minimal_C) {
        rep.minimal_C = ratio;
        rep.argmax_t = snap.state.t;
        rep.argmax_i = i;
      }
      if (G[i - 1] > C * r)
        rep.violations.push_back({snap.state.t, i, G[i - 1], C * r});
    }
  }
  return rep;
}

std::vector<std::pair<std::size_t, double>> minimal_constants(
    const Trajectory& traj, const TailEnvelope& env,
    std::span<const std::size_t> k0_grid, double t0) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(k0_grid.size());
  for (std::size_t k0 : k0_grid)
    out.emplace_back(k0, check_tail_bound(traj, env,
                                          std::numeric_limits<double>::max(),
                                          k0, t0)
                             .minimal_C);
  return out;
}

namespace {

std::vector<double> premise_caps(const CoefficientModel& model, double z) {
  std::vector<double> caps(model.N());
  for (std::size_t j = 1; j <= model.N(); ++j)
    caps[j - 1] = std::exp(model.log_q(j) + static_cast<double>(j) * std::log(z));
  return caps;
}

double premise_ratio(const State& s, const std::vector<double>& caps) {
  double worst = 0.0;
  for (std::size_t j = 1; j <= caps.size(); ++j)
    worst = std::max(worst, s.c[j - 1] / caps[j - 1]);
  return worst;
}

}  // namespace

PremiseReport verify_premise(const Trajectory& traj,
                             const CoefficientModel& model, double z,
                             double t0) {
  if (!(z > 0.0)) throw std::invalid_argument("premise activity must be > 0");
  const auto caps = premise_caps(model, z);
  PremiseReport rep;
  for (const auto& snap : traj.snapshots) {
    if (snap.state.t < t0) continue;
    ++rep.snapshots_checked;
    rep.worst_ratio = std::max(rep.worst_ratio, premise_ratio(snap.state, caps));
  }
  rep.holds = rep.snapshots_checked > 0 && rep.worst_ratio <= 1.0;
  return rep;
}

std::optional<double> earliest_premise_time(const Trajectory& traj,
                                            const CoefficientModel& model,
                                            double z) {
  if (!(z > 0.0)) throw std::invalid_argument("premise activity must be > 0");
  const auto caps = premise_caps(model, z);
  std::optional<double> t0;
  for (auto it = traj.snapshots.rbegin(); it != traj.snapshots.rend(); ++it) {
    if (premise_ratio(it->state, caps) > 1.0) break;
    t0 = it->state.t;
  }
  return t0;
}

FluxIdentity tail_flux_identity(const CoefficientModel& model, const State& s,
                                std::size_t i) {
  const std::size_t N = model.N();
  const std::size_t L = s.L();
  if (i <= 2 * N)
    throw std::invalid_argument("tail flux identity needs i > 2N");
  if (i + N > L)
    throw std::invalid_argument("tail flux identity needs i <= L - N");

  FluxIdentity out;
  for (std::size_t j = 1; j <= N; ++j) {
    for (std::size_t k = i - j; k <= i - 1; ++k) {
      const double term = static_cast<double>(j + k) * net_flux(model, s, j, k);
      out.analytic += term;
      out.scale += std::abs(term);
    }
    for (std::size_t k = i; j + k <= L; ++k) {
      const double term = static_cast<double>(j) * net_flux(model, s, j, k);
      out.analytic += term;
      out.scale += std::abs(term);
    }
  }
  const std::vector<double> d = rhs(model, s);
  for (std::size_t j = L; j >= i; --j)
    out.numeric += static_cast<double>(j) * d[j - 1];
  return out;
}

double ab_ratio(const CoefficientModel& model, double z, std::size_t j,
                std::size_t k) {
  if (j < 1 || j > model.N())
    throw std::invalid_argument("ab_ratio needs 1 <= j <= N");
  if (k < 1) throw std::invalid_argument("ab_ratio needs k >= 1");
  if (!(z > 0.0)) throw std::invalid_argument("ab_ratio needs z > 0");
  const double a_jk = model.coag_rate(j, k);
  if (a_jk == 0.0) throw std::domain_error("ab_ratio: a_jk = 0");
  const double x = static_cast<double>(j);
  const double y = static_cast<double>(k);
  const double first =
      y / (x + y) *
      std::exp(model.log_q(k) - model.log_q(j + k) - x * std::log(z));
  const double second =
      x * y * model.coag_rate(j, j + k) / ((x + y) * (x + y) * a_jk);
  return first - second;
}

DiagnosticsRecord diagnose(const State& s, const DiagnosticsConfig& cfg) {
  DiagnosticsRecord rec;
  rec.t = s.t;
  const std::vector<double> G = tail_masses(s);
  rec.rho = G.empty() ? 0.0 : G[0];
  rec.G.reserve(cfg.G_indices.size());
  for (std::size_t i : cfg.G_indices)
    rec.G.push_back(i >= 1 && i <= s.L() ? G[i - 1] : 0.0);
  for (double mu : cfg.moments) rec.moments.push_back(moment(s, mu));
  rec.strong_dist = cfg.reference ? strong_distance(s, *cfg.reference) : 0.0;
  const std::size_t J = std::min(cfg.head, s.L());
  rec.c_head.assign(s.c.begin(), s.c.begin() + J);
  return rec;
}

}  // namespace bdk
