#include "bdk/runner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "bdk/equilibrium.hpp"
#include "bdk/format.hpp"
#include "bdk/simd/kernels.hpp"

namespace bdk {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "state binaries are written in native order");

std::string classify_regime(double rho0, double rho_s, bool rho_s_divergent) {
  if (rho_s_divergent) return "subcritical";
  if (std::abs(rho0 - rho_s) <= 1e-6 * rho_s) return "critical";
  return rho0 < rho_s ? "subcritical" : "supercritical";
}

namespace {

constexpr double kEqTol = 1e-13;

std::vector<double> truncated_equilibrium(const CoefficientModel& model,
                                          double rho, std::size_t L) {
  if (rho == 0.0) return std::vector<double>(L, 0.0);
  const double z = truncated_activity_of_density(model, rho, L, kEqTol * rho);
  return equilibrium_profile(model, z, L).densities;
}

}  // namespace

State make_initial(const RunConfig& cfg, const CoefficientModel& model,
                   std::size_t L) {
  const auto& ic = cfg.initial;
  State s;
  s.c.assign(L, 0.0);
  switch (ic.kind) {
    case InitialKind::Monomer:
      s.c[0] = ic.rho0;
      break;
    case InitialKind::Equilibrium:
      s.c = truncated_equilibrium(model, ic.rho, L);
      break;
    case InitialKind::EquilibriumPlusMonomer:
      s.c = truncated_equilibrium(model, ic.rho_eq, L);
      s.c[0] += ic.rho_extra;
      break;
    case InitialKind::File: {
      const State f = read_state_binary(cfg.resolve(ic.path));
      s = truncate_initial(f.c, std::min(f.L(), L), L);
      break;
    }
  }
  if (ic.n) s = truncate_initial(s.c, std::min(ic.n, L), L);
  s.t = 0.0;
  return s;
}

void write_state_binary(const std::string& path, const State& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const char header[8] = {'B', 'D', 'K', '1', 0, 0, 0, 0};
  const std::uint64_t L = s.L();
  out.write(header, sizeof header);
  out.write(reinterpret_cast<const char*>(&L), sizeof L);
  out.write(reinterpret_cast<const char*>(s.c.data()),
            static_cast<std::streamsize>(s.c.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write to " + path);
}

State read_state_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open state file " + path);
  char header[8];
  std::uint64_t L = 0;
  in.read(header, sizeof header);
  in.read(reinterpret_cast<char*>(&L), sizeof L);
  if (!in || std::memcmp(header, "BDK1\0\0\0\0", 8) != 0)
    throw std::runtime_error(path + ": not a BDK1 state file");
  if (L == 0 || L > (std::uint64_t{1} << 32))
    throw std::runtime_error(path + ": implausible size " + std::to_string(L));
  State s;
  s.c.resize(static_cast<std::size_t>(L));
  in.read(reinterpret_cast<char*>(s.c.data()),
          static_cast<std::streamsize>(L * sizeof(double)));
  if (!in) throw std::runtime_error(path + ": truncated state data");
  for (double v : s.c)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::runtime_error(path + ": densities must be finite and >= 0");
  return s;
}

const std::string* RunResult::get(const std::string& key) const {
  for (const auto& [k, v] : summary)
    if (k == key) return &v;
  return nullptr;
}

namespace {

class Csv {
 public:
  explicit Csv(const fs::path& p) : out_(p) {
    if (!out_) throw std::runtime_error("cannot write " + p.string());
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

std::string idx_name(std::size_t i, std::size_t width) {
  std::string s = std::to_string(i);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

void write_summary(const fs::path& dir,
                   const std::vector<std::pair<std::string, std::string>>& kv,
                   const std::string& text) {
  std::ofstream k(dir / "summary.kv");
  for (const auto& [key, val] : kv) k << key << " = " << val << "\n";
  std::ofstream t(dir / "summary.txt");
  t << text;
}

}  // namespace

RunResult run_single(const RunConfig& cfg, const CoefficientModel& model,
                     std::size_t L, const std::string& out_dir,
                     bool keep_trajectory) {
  RunResult res;
  res.out_dir = out_dir;
  res.L = L;
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  auto put = [&](const std::string& k, const std::string& v) {
    res.summary.emplace_back(k, v);
  };
  auto putd = [&](const std::string& k, double v) { put(k, fmt_double(v)); };

  const CriticalData crit = critical_density(model, 1e-12);
  State s0;
  try {
    s0 = make_initial(cfg, model, L);
  } catch (const std::exception& e) {
    res.exit_code = kExitValidation;
    res.error = std::string("initial condition: ") + e.what();
    return res;
  }
  const double rho0 = s0.density();
  const std::string regime =
      classify_regime(rho0, crit.rho_s, crit.rho_s_divergent);

  // reference equilibrium for the strong distance
  double ref_rho = cfg.diagnostics.reference_rho.value_or(rho0);
  double z_ref = crit.z_s;
  if (crit.rho_s_divergent || ref_rho < crit.rho_s)
    z_ref = activity_of_density(model, ref_rho, 1e-14 * std::max(ref_rho, 1.0));
  else
    ref_rho = crit.rho_s;
  DiagnosticsConfig dc;
  dc.G_indices = cfg.diagnostics.G_indices;
  dc.moments = cfg.diagnostics.moments;
  dc.head = cfg.diagnostics.head;
  dc.reference = equilibrium_profile(model, z_ref, L);
  const double z_L =
      rho0 > 0.0 ? truncated_activity_of_density(model, rho0, L, kEqTol * rho0)
                 : 0.0;

  const std::size_t J = std::min(cfg.output_head, L);
  Csv traj_csv(dir / "trajectory.csv");
  {
    std::vector<std::string> h{"t", "rho"};
    for (std::size_t j = 1; j <= J; ++j) h.push_back("c_" + std::to_string(j));
    traj_csv.row(h);
  }
  Csv diag_csv(dir / "diagnostics.csv");
  {
    std::vector<std::string> h{"t", "rho"};
    for (double mu : dc.moments) h.push_back("moment_" + fmt_double(mu));
    h.push_back("strong_dist");
    h.push_back("c1");
    for (std::size_t i : dc.G_indices) h.push_back("G_" + std::to_string(i));
    diag_csv.row(h);
  }
  std::optional<Csv> manifest;
  if (cfg.state_binaries) {
    fs::create_directories(dir / "states");
    manifest.emplace(dir / "states" / "manifest.csv");
    manifest->row({"index", "t", "requested_time", "mode", "file"});
  }

  std::size_t snap_index = 0;
  DiagnosticsRecord last_rec;
  auto observer = [&](const Snapshot& snap) {
    const State& s = snap.state;
    std::vector<std::string> row{fmt_double(s.t), fmt_double(snap.info.density)};
    for (std::size_t j = 0; j < J; ++j) row.push_back(fmt_double(s.c[j]));
    traj_csv.row(row);

    last_rec = diagnose(s, dc);
    std::vector<std::string> d{fmt_double(s.t), fmt_double(last_rec.rho)};
    for (double m : last_rec.moments) d.push_back(fmt_double(m));
    d.push_back(fmt_double(last_rec.strong_dist));
    d.push_back(fmt_double(s.c[0]));
    for (double g : last_rec.G) d.push_back(fmt_double(g));
    diag_csv.row(d);

    if (manifest) {
      const std::string name = "state_" + idx_name(snap_index, 6) + ".bin";
      write_state_binary((dir / "states" / name).string(), s);
      manifest->row({std::to_string(snap_index), fmt_double(s.t),
                     fmt_double(snap.info.requested_time),
                     snap.info.mode == SnapshotMode::Exact ? "exact" : "nearest",
                     name});
    }
    ++snap_index;
  };

  put("scenario", cfg.scenario);
  put("L", std::to_string(L));
  put("N", std::to_string(model.N()));
  put("backend", std::string(simd::to_string(simd::active_backend())));
  putd("z_s", crit.z_s);
  putd("rho_s", crit.rho_s);
  put("rho_s_divergent", crit.rho_s_divergent ? "true" : "false");
  putd("rho_s_unweighted", crit.rho_s_unweighted);
  put("rho_s_unweighted_divergent",
      crit.rho_s_unweighted_divergent ? "true" : "false");
  putd("rho0", rho0);
  put("regime", regime);
  putd("reference_rho", ref_rho);
  putd("reference_z", z_ref);
  putd("z_L", z_L);

  const IntegratorConfig icfg = cfg.integrator_for_run();
  Trajectory traj;
  try {
    traj = integrate(model, s0, icfg, observer);
  } catch (const IntegrationFailure& e) {
    traj_csv.flush();
    diag_csv.flush();
    write_state_binary((dir / "last_valid.bin").string(), e.last_valid);
    res.exit_code = kExitIntegration;
    res.error = e.what();
    put("status", "integration_failure");
    put("error", e.what());
    putd("last_valid_t", e.last_valid.t);
    std::ostringstream txt;
    txt << "scenario " << cfg.scenario << " (L = " << L << ")\n"
        << "integration failed: " << e.what() << "\n"
        << "last valid state at t = " << e.last_valid.t
        << " written to last_valid.bin\n";
    write_summary(dir, res.summary, txt.str());
    return res;
  }

  const State& fin = traj.final_state();
  put("status", traj.valid() ? "ok" : "invalid_clamping");
  putd("final_t", fin.t);
  putd("final_strong_dist", last_rec.strong_dist);
  putd("final_c1", fin.c[0]);
  putd("final_head_distance_zL", head_distance(fin, model, z_L, dc.head));
  for (std::size_t k = 0; k < dc.G_indices.size(); ++k)
    putd("final_G_" + std::to_string(dc.G_indices[k]), last_rec.G[k]);
  for (std::size_t k = 0; k < dc.moments.size(); ++k)
    putd("final_moment_" + fmt_double(dc.moments[k]), last_rec.moments[k]);
  putd("density_drift", traj.density_drift());
  putd("clamped_mass", traj.clamped_mass);
  put("valid", traj.valid() ? "true" : "false");
  put("accepted_steps", std::to_string(traj.accepted_steps));
  put("rejected_steps", std::to_string(traj.rejected_steps));
  put("snapshots", std::to_string(traj.snapshots.size()));

  std::string bound_text;
  if (cfg.bound.enabled) {
    const auto it = std::find_if(
        traj.snapshots.begin(), traj.snapshots.end(),
        [&](const Snapshot& s) { return s.state.t >= cfg.bound.t0; });
    if (it != traj.snapshots.end()) {
      const std::vector<double> G = tail_masses(it->state);
      std::size_t M = cfg.bound.M ? std::min(cfg.bound.M, L) : L;
      // the envelope needs positive input; stop at the first vanished tail
      std::size_t pos = 0;
      while (pos < M && G[pos] > 0.0) ++pos;
      M = pos;
      if (M >= cfg.bound.k0) {
        const TailEnvelope env = build_tail_envelope(
            std::span<const double>(G.data(), M), cfg.bound.lambda);
        res.bound = check_tail_bound(traj, env, cfg.bound.C, cfg.bound.k0,
                                     it->state.t);
        bound_text = res.bound->to_text();
        std::ofstream(dir / "bound.txt") << bound_text;
        std::ofstream(dir / "bound.kv") << res.bound->to_kv("bound");
        putd("bound_minimal_C", res.bound->minimal_C);
        put("bound_violations", std::to_string(res.bound->violations.size()));
      }
    }
  }

  std::ostringstream txt;
  txt.precision(10);
  txt << "scenario " << cfg.scenario << " (L = " << L << ", N = " << model.N()
      << ")\n"
      << "critical activity z_s = " << crit.z_s << "\n"
      << "critical density rho_s = "
      << (crit.rho_s_divergent ? std::string("divergent")
                               : fmt_double(crit.rho_s))
      << " (unweighted sum: "
      << (crit.rho_s_unweighted_divergent ? std::string("divergent")
                                          : fmt_double(crit.rho_s_unweighted))
      << ")\n"
      << "initial density rho0 = " << rho0 << " -> " << regime << "\n"
      << "finite-L equilibrium activity z_L = " << z_L << "\n"
      << "final time " << fin.t << ": c_1 = " << fin.c[0]
      << ", strong distance to the rho = " << ref_rho
      << " equilibrium = " << last_rec.strong_dist << "\n"
      << "density drift " << traj.density_drift() << ", clamped mass "
      << traj.clamped_mass << (traj.valid() ? "" : " (run INVALID)") << "\n"
      << "steps: " << traj.accepted_steps << " accepted, "
      << traj.rejected_steps << " rejected\n";
  if (!bound_text.empty()) txt << bound_text;
  write_summary(dir, res.summary, txt.str());
  if (keep_trajectory) res.trajectory = std::move(traj);
  return res;
}

std::vector<RunResult> run_config(const RunConfig& cfg,
                                  const std::string& out_dir,
                                  bool keep_trajectory) {
  std::vector<RunResult> out;
  std::optional<CoefficientModel> model;
  try {
    cfg.validate();
    model.emplace(cfg.build_model());
  } catch (const std::exception& e) {
    RunResult r;
    r.exit_code = kExitValidation;
    r.error = e.what();
    out.push_back(std::move(r));
    return out;
  }

  fs::create_directories(out_dir);
  const ValidationReport rep =
      validate_hypotheses(*model, cfg.validate_j_max, cfg.validate_tol);
  std::ofstream(fs::path(out_dir) / "validation.txt") << rep.to_text();
  if (!rep.all_passed()) {
    RunResult r;
    r.exit_code = kExitValidation;
    r.out_dir = out_dir;
    r.error = "model fails hypothesis validation (see validation.txt)";
    out.push_back(std::move(r));
    return out;
  }

  if (cfg.sweep_L.empty()) {
    out.push_back(run_single(cfg, *model, cfg.L, out_dir, keep_trajectory));
    return out;
  }
  out.resize(cfg.sweep_L.size());
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < cfg.sweep_L.size(); ++i)
    workers.emplace_back([&, i] {
      const std::size_t L = cfg.sweep_L[i];
      const std::string sub =
          (fs::path(out_dir) / ("L_" + std::to_string(L))).string();
      try {
        out[i] = run_single(cfg, *model, L, sub, keep_trajectory);
      } catch (const std::exception& e) {
        out[i].exit_code = kExitValidation;
        out[i].out_dir = sub;
        out[i].L = L;
        out[i].error = e.what();
      }
    });
  for (auto& w : workers) w.join();
  return out;
}

std::string output_root() {
  const char* env = std::getenv("BDK_OUT_DIR");
  return env && *env ? std::string(env) : std::string("bdk_out");
}

int combined_exit_code(const std::vector<RunResult>& runs) {
  int code = kExitOk;
  for (const auto& r : runs) code = std::max(code, r.exit_code);
  return code;
}

}  // namespace bdk
