#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bdk/analysis.hpp"
#include "bdk/config.hpp"

namespace bdk {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitIntegration = 3,
};

/// "subcritical", "critical" (|rho0 - rho_s| <= 1e-6 rho_s) or
/// "supercritical"; a divergent rho_s makes every density subcritical.
std::string classify_regime(double rho0, double rho_s, bool rho_s_divergent);

/// Initial state of length L for the config's initial-condition spec.
/// Equilibrium data use the size-L truncated equilibrium of the requested
/// density, which is an exact fixed point of the truncated system.
State make_initial(const RunConfig& cfg, const CoefficientModel& model,
                   std::size_t L);

/// Flat little-endian state file: "BDK1", 4 zero bytes, u64 L, L doubles.
void write_state_binary(const std::string& path, const State& s);
/// Throws std::runtime_error on a bad header or short file; t is set to 0.
State read_state_binary(const std::string& path);

struct RunResult {
  int exit_code = kExitOk;
  std::string out_dir;
  std::string error;
  std::size_t L = 0;
  /// summary records in output order
  std::vector<std::pair<std::string, std::string>> summary;
  std::optional<Trajectory> trajectory;
  std::optional<BoundReport> bound;

  const std::string* get(const std::string& key) const;
};

/// One integration at truncation L, artifacts into out_dir. keep_trajectory
/// retains the snapshots in the result.
RunResult run_single(const RunConfig& cfg, const CoefficientModel& model,
                     std::size_t L, const std::string& out_dir,
                     bool keep_trajectory = false);

/// All runs of a config (one per sweep.L entry, concurrently, into
/// out_dir/L_<size>; otherwise one run into out_dir). Validation failures
/// of the model yield a single result with exit code 2.
std::vector<RunResult> run_config(const RunConfig& cfg,
                                  const std::string& out_dir,
                                  bool keep_trajectory = false);

/// Output root: $BDK_OUT_DIR if set, else "bdk_out".
std::string output_root();

/// Worst exit code over a set of runs.
int combined_exit_code(const std::vector<RunResult>& runs);

}  // namespace bdk
