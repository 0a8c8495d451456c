#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdk/coefficients.hpp"
#include "bdk/equilibrium.hpp"
#include "bdk/kinetics.hpp"

namespace bdk {

/// G_i = sum_{j=i}^{L} j c_j, accumulated from j = L downward.
double tail_mass(const State& s, std::size_t i);

/// All tail masses; result[i-1] = G_i for i = 1..L.
std::vector<double> tail_masses(const State& s);

/// sum_{j<=L} j^mu c_j (accumulated from j = L downward).
double moment(const State& s, double mu);

/// sum_j j |c_j - ref_j|. Throws std::invalid_argument on length mismatch.
double strong_distance(const State& s, const EquilibriumProfile& ref);

/// max_{j<=J} |c_j - Q_j z^j| (the componentwise part of weak-* distance).
double head_distance(const State& s, const CoefficientModel& model, double z,
                     std::size_t J);

/// Decreasing majorant of a sequence g:
///   gbar_1 = sup g + 1, gbar_k = sup_{j>=k} g_j, h_k = gbar_k - gbar_{k+1},
///   s_1 = h_1, s_{k+1} = max(s_k / lambda, h_{k+1}),
///   r_k = sum_{j>=k} s_j,
/// with g = 0 beyond its length M and the geometric continuation
/// s_{M+m} = s_M lambda^{-m} closing the sum.
struct TailEnvelope {
  std::vector<double> r;  // r[k-1] = r_k, k = 1..M
  /// increments s_k; r_k - r_{k+1} equals s_k up to the rounding of r_k,
  /// and the ratio law s_{k-1} / s_k <= lambda holds exactly on these
  std::vector<double> s;
  double lambda = 0.0;
  /// sum of the geometric continuation past M, s_M / (lambda - 1)
  double closure = 0.0;
  std::vector<double> source;

  std::size_t size() const { return r.size(); }
  double at(std::size_t k) const { return r.at(k - 1); }
};

/// Throws std::invalid_argument if g is empty, has a non-positive or
/// non-finite entry, or lambda <= 1.
TailEnvelope build_tail_envelope(std::span<const double> g, double lambda);

struct BoundViolation {
  double t = 0.0;
  std::size_t i = 0;
  double G = 0.0;
  double bound = 0.0;
};

struct BoundReport {
  double C = 0.0;
  std::size_t k0 = 0;
  std::size_t M = 0;
  double t0 = 0.0;
  std::size_t snapshots_checked = 0;
  std::vector<BoundViolation> violations;
  /// smallest C with G_i(t) <= C r_i on every checked (t, i)
  double minimal_C = 0.0;
  /// where minimal_C is attained
  double argmax_t = 0.0;
  std::size_t argmax_i = 0;

  std::string to_text() const;
  std::string to_kv(const std::string& prefix = "bound") const;
};

/// Checks G_i(t) <= C r_i for every snapshot with t >= t0 and every
/// i in [k0, M], M = min(envelope length, L).
BoundReport check_tail_bound(const Trajectory& traj, const TailEnvelope& env,
                             double C, std::size_t k0, double t0 = 0.0);

/// minimal C for each k0 in the grid (the bound's constants are only known
/// to exist, so they are searched for).
std::vector<std::pair<std::size_t, double>> minimal_constants(
    const Trajectory& traj, const TailEnvelope& env,
    std::span<const std::size_t> k0_grid, double t0 = 0.0);

struct PremiseReport {
  bool holds = false;
  /// max over checked snapshots and j <= N of c_j(t) / (Q_j z^j)
  double worst_ratio = 0.0;
  std::size_t snapshots_checked = 0;
};

/// Verifies c_j(t) <= Q_j z^j for j <= N on all snapshots with t >= t0.
PremiseReport verify_premise(const Trajectory& traj,
                             const CoefficientModel& model, double z,
                             double t0);

/// Earliest snapshot time after which the premise holds on the rest of the
/// trajectory, if any.
std::optional<double> earliest_premise_time(const Trajectory& traj,
                                            const CoefficientModel& model,
                                            double z);

struct FluxIdentity {
  /// sum_{j<=N} sum_{k=i-j}^{i-1} (j+k) W_jk + sum_{j<=N} sum_{k>=i} j W_jk
  double analytic = 0.0;
  /// sum_{j>=i} j (dc_j/dt)
  double numeric = 0.0;
  /// sum of |terms| on the analytic side, the scale for comparisons
  double scale = 0.0;
};

/// Requires 2N < i <= L - N; throws std::invalid_argument otherwise.
FluxIdentity tail_flux_identity(const CoefficientModel& model, const State& s,
                                std::size_t i);

/// B_jk / A_jk = k/(j+k) Q_k/Q_{j+k} z^{-j} - j k a_{j,j+k} / ((j+k)^2 a_jk).
/// Requires 1 <= j <= N, k >= 1, z > 0. Throws std::domain_error if a_jk = 0.
double ab_ratio(const CoefficientModel& model, double z, std::size_t j,
                std::size_t k);

struct DiagnosticsConfig {
  std::vector<std::size_t> G_indices;
  std::vector<double> moments{2.0};
  std::size_t head = 10;
  std::optional<EquilibriumProfile> reference;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double rho = 0.0;
  std::vector<double> G;        // at cfg.G_indices
  std::vector<double> moments;  // at cfg.moments
  double strong_dist = 0.0;
  std::vector<double> c_head;
};

DiagnosticsRecord diagnose(const State& s, const DiagnosticsConfig& cfg);

}  // namespace bdk
