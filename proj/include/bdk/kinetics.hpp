#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bdk/coefficients.hpp"

namespace bdk {

/// Cluster densities c_1..c_L (c[j-1] = c_j) at time t.
struct State {
  std::vector<double> c;
  double t = 0.0;

  std::size_t L() const { return c.size(); }
  double at(std::size_t j) const { return c.at(j - 1); }
  /// sum_j j c_j
  double density() const;
};

/// Coefficient tables of the size-L truncated system plus the right-hand
/// side. Coagulation events that would form a cluster larger than L are
/// absent, so sum_j j c_j is conserved exactly.
class TruncatedSystem {
 public:
  /// Throws std::invalid_argument if L < 2N + 1 and std::out_of_range if a
  /// tabulated model does not cover sizes up to L.
  TruncatedSystem(const CoefficientModel& model, std::size_t L);

  std::size_t L() const { return L_; }
  std::size_t N() const { return N_; }
  const CoefficientModel& model() const { return *model_; }

  /// a_{j,k} and b_{j,k} for k <= N and j + k <= L.
  double a(std::size_t j, std::size_t k) const { return a_[k - 1][j]; }
  double b(std::size_t j, std::size_t k) const { return b_[k - 1][j]; }

  /// dc/dt at c (both length L). Cost O(L N).
  void rhs(std::span<const double> c, std::span<double> dcdt) const;
  std::vector<double> rhs(std::span<const double> c) const;

 private:
  const CoefficientModel* model_;
  std::size_t L_;
  std::size_t N_;
  // a_[k-1][j] = a_{j,k} for j = 1..L-k (index 0 unused)
  std::vector<std::vector<double>> a_;
  std::vector<std::vector<double>> b_;
  // scratch flux rows: flux_[k-1][j] = W_{j,k}
  mutable std::vector<std::vector<double>> flux_;
};

/// W_jk = a_jk c_j c_k - b_jk c_{j+k}. Throws std::out_of_range if
/// j + k > L (no such cluster in the truncated system).
double net_flux(const CoefficientModel& model, const State& s, std::size_t j,
                std::size_t k);

/// Right-hand side of the truncated system (length L >= 2N + 1).
std::vector<double> rhs(const CoefficientModel& model, const State& s);

/// c_j = c0_j for j <= n, 0 for n < j <= L, t = 0. Entries of c0 beyond
/// its length count as 0.
State truncate_initial(std::span<const double> c0, std::size_t n,
                       std::size_t L);

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-20;
  double h_init = 1e-4;
  double h_max = 1.0;
  double T = 1.0;
  /// increasing, within [0, T]; the integrator lands on each exactly
  std::vector<double> snapshot_times;
  std::size_t max_steps = 500'000'000;

  /// throws std::invalid_argument describing the first violated invariant
  void validate() const;
};

enum class SnapshotMode {
  /// an accepted step ended exactly on the requested time
  Exact,
  /// taken at the nearest accepted step
  Nearest,
};

struct SnapshotInfo {
  double requested_time = 0.0;
  SnapshotMode mode = SnapshotMode::Exact;
  double density = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  /// cumulative sum_j j |c_j| removed by clamping small negatives
  double clamped_mass = 0.0;
};

struct Snapshot {
  State state;
  SnapshotInfo info;
};

struct Trajectory {
  std::size_t L = 0;
  const CoefficientModel* model = nullptr;
  std::vector<Snapshot> snapshots;
  double initial_density = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t negativity_rejections = 0;
  double clamped_mass = 0.0;

  /// max over snapshots of |rho(t) - rho(0)| / rho(0) (absolute if rho(0)=0)
  double density_drift() const;
  /// clamped mass <= 1e-6 rho0
  bool valid() const;
  const State& final_state() const { return snapshots.back().state; }
};

class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, State last_valid);
  State last_valid;
};

/// Called on every snapshot as it is produced.
using SnapshotObserver = std::function<void(const Snapshot&)>;

/// Dormand-Prince 5(4) with FSAL and PI step control. Local error per
/// component <= abs_tol + rel_tol |c_j|; steps with any c_j < -abs_tol are
/// retried with half the step; accepted negatives in [-abs_tol, 0) are
/// clamped to 0. Throws IntegrationFailure when h < 1e-14 T.
Trajectory integrate(const CoefficientModel& model, const State& s0,
                     const IntegratorConfig& cfg,
                     const SnapshotObserver& observer = {});

}  // namespace bdk
