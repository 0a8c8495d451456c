#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "bdk/kinetics.hpp"
#include "bdk/simd/kernels.hpp"

namespace bdk {

namespace {

// Dormand-Prince 5(4) tableau; row s gives the input of stage s, row 6 is
// the 5th-order solution (FSAL).
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
     -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// b - b*, the embedded error weights
constexpr std::array<double, 7> kE{71.0 / 57600,   0.0,         -71.0 / 16695,
                                   71.0 / 1920,    -17253.0 / 339200,
                                   22.0 / 525,     -1.0 / 40};

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;
constexpr double kBeta = 0.04;  // PI memory term
constexpr double kAlpha = 0.2 - 0.75 * kBeta;

// Real-axis stability boundary of the 5th-order DP step is about 3.3; steps
// are kept well inside it so stiff tail modes damp instead of oscillating
// at the error tolerance (where clamping would turn the noise into mass).
constexpr double kStableReach = 2.5;
constexpr std::size_t kRadiusInterval = 50;

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Nonlinear power iteration on f(y + eps v) - f(y) for the spectral
// radius of the Jacobian at y; v carries over between calls.
double spectral_radius(const TruncatedSystem& sys, const std::vector<double>& y,
                       const std::vector<double>& fy, std::vector<double>& v,
                       std::vector<double>& yp, std::vector<double>& fp) {
  const std::size_t L = y.size();
  const double ynorm = norm2(y);
  double vnorm = norm2(v);
  if (!(vnorm > 0.0)) {
    for (std::size_t j = 0; j < L; ++j) v[j] = (j % 2 ? -1.0 : 1.0);
    vnorm = norm2(v);
  }
  const double eps = 1e-7 * std::max(ynorm, 1e-10);
  double rho = 0.0;
  for (int it = 0; it < 30; ++it) {
    const double scale = eps / vnorm;
    for (std::size_t j = 0; j < L; ++j) yp[j] = y[j] + scale * v[j];
    sys.rhs(yp, fp);
    for (std::size_t j = 0; j < L; ++j) v[j] = fp[j] - fy[j];
    vnorm = norm2(v);
    const double prev = rho;
    rho = vnorm / eps;
    if (!(vnorm > 0.0)) break;
    if (it > 2 && std::abs(rho - prev) <= 0.01 * rho) break;
  }
  return 1.2 * rho;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("integrator tolerances must be > 0");
  if (!(h_init > 0.0) || !(h_max > 0.0))
    throw std::invalid_argument("integrator step bounds must be > 0");
  if (!(T > 0.0) || !std::isfinite(T))
    throw std::invalid_argument("integration horizon T must be > 0");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    const double t = snapshot_times[i];
    if (!(t >= 0.0) || t > T)
      throw std::invalid_argument("snapshot time " + std::to_string(t) +
                                  " outside [0, T]");
    if (i > 0 && !(t > snapshot_times[i - 1]))
      throw std::invalid_argument("snapshot times must be strictly increasing");
  }
}

double Trajectory::density_drift() const {
  double worst = 0.0;
  for (const auto& s : snapshots) {
    const double d = std::abs(s.info.density - initial_density);
    worst = std::max(worst, initial_density > 0.0 ? d / initial_density : d);
  }
  return worst;
}

bool Trajectory::valid() const {
  return clamped_mass <= 1e-6 * initial_density;
}

IntegrationFailure::IntegrationFailure(const std::string& what,
                                       State last)
    : std::runtime_error(what), last_valid(std::move(last)) {}

Trajectory integrate(const CoefficientModel& model, const State& s0,
                     const IntegratorConfig& cfg,
                     const SnapshotObserver& observer) {
  cfg.validate();
  const std::size_t L = s0.L();
  for (double v : s0.c)
    if (!(v >= 0.0))
      throw std::invalid_argument("initial state must be nonnegative");
  const TruncatedSystem sys(model, L);
  const auto& kern = simd::kernels();

  Trajectory traj;
  traj.L = L;
  traj.model = &model;
  traj.initial_density = s0.density();

  std::vector<double> targets = cfg.snapshot_times;
  if (targets.empty() || targets.back() < cfg.T) targets.push_back(cfg.T);

  std::vector<double> y = s0.c;
  std::vector<double> y_new(L), err(L);
  std::array<std::vector<double>, 7> k;
  for (auto& v : k) v.assign(L, 0.0);
  std::vector<double> stage_in(L);
  std::vector<double> eig(L, 0.0), probe(L), probe_f(L);
  double h_stable = cfg.h_max;
  std::array<const double*, 7> kp{};
  for (std::size_t i = 0; i < 7; ++i) kp[i] = k[i].data();

  double t = s0.t;
  double h = std::min(cfg.h_init, cfg.h_max);
  const double h_floor = 1e-14 * cfg.T;
  double err_prev = 1e-4;

  auto emit = [&](double requested, SnapshotMode mode) {
    Snapshot snap;
    snap.state.c = y;
    snap.state.t = t;
    snap.info.requested_time = requested;
    snap.info.mode = mode;
    snap.info.density = snap.state.density();
    snap.info.accepted_steps = traj.accepted_steps;
    snap.info.rejected_steps = traj.rejected_steps;
    snap.info.clamped_mass = traj.clamped_mass;
    if (observer) observer(snap);
    traj.snapshots.push_back(std::move(snap));
  };
  auto fail = [&](const std::string& why) {
    State last;
    last.c = y;
    last.t = t;
    throw IntegrationFailure(why, std::move(last));
  };

  sys.rhs(y, k[0]);
  std::size_t next = 0;
  std::size_t steps = 0;
  std::size_t last_radius_step = static_cast<std::size_t>(-1);
  while (next < targets.size()) {
    const double target = targets[next];
    const double remaining = target - t;
    if (remaining <= h_floor) {
      emit(target, remaining == 0.0 ? SnapshotMode::Exact
                                    : SnapshotMode::Nearest);
      ++next;
      continue;
    }
    if (++steps > cfg.max_steps) fail("step budget exhausted");
    if (h < h_floor)
      fail("step size underflow at t = " + std::to_string(t) +
           " (stiffness beyond the explicit integrator's reach)");

    if (traj.accepted_steps % kRadiusInterval == 0 && last_radius_step != traj.accepted_steps) {
      last_radius_step = traj.accepted_steps;
      const double rad = spectral_radius(sys, y, k[0], eig, probe, probe_f);
      h_stable = rad > 0.0 ? kStableReach / rad : cfg.h_max;
    }
    h = std::min(h, h_stable);

    const bool landing = h >= remaining;
    const double step = landing ? remaining : h;

    for (std::size_t s = 1; s < 7; ++s) {
      kern.combine(stage_in.data(), y.data(), step, kA[s], kp.data(), s, L);
      sys.rhs(stage_in, k[s]);
    }
    std::copy(stage_in.begin(), stage_in.end(), y_new.begin());
    kern.combine(err.data(), nullptr, step, kE.data(), kp.data(), 7, L);
    const double en =
        kern.error_norm(err.data(), y.data(), y_new.data(), cfg.abs_tol,
                        cfg.rel_tol, L);

    if (!(en <= 1.0)) {
      ++traj.rejected_steps;
      const double fac =
          std::isfinite(en)
              ? std::max(kFacMin, kSafety * std::pow(en, -0.2))
              : kFacMin;
      h = step * std::min(1.0, fac);
      continue;
    }
    if (kern.min(y_new.data(), L) < -cfg.abs_tol) {
      ++traj.rejected_steps;
      ++traj.negativity_rejections;
      h = 0.5 * step;
      continue;
    }

    // accept
    ++traj.accepted_steps;
    bool clamped = false;
    for (std::size_t j = 0; j < L; ++j)
      if (y_new[j] < 0.0) {
        traj.clamped_mass += static_cast<double>(j + 1) * -y_new[j];
        y_new[j] = 0.0;
        clamped = true;
      }
    y.swap(y_new);
    t = landing ? target : t + step;
    if (clamped)
      sys.rhs(y, k[0]);
    else
      k[0].swap(k[6]);
    kp[0] = k[0].data();
    kp[6] = k[6].data();

    const double en_c = std::max(en, 1e-10);
    double fac = kSafety * std::pow(en_c, -kAlpha) * std::pow(err_prev, kBeta);
    fac = std::clamp(fac, kFacMin, kFacMax);
    err_prev = en_c;
    // a landing step may be much shorter than the controller's choice
    if (!landing) h = std::min(cfg.h_max, step * fac);

    if (landing) {
      emit(target, SnapshotMode::Exact);
      ++next;
    }
  }
  return traj;
}

}  // namespace bdk
