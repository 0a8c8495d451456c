#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdk/coefficients.hpp"
#include "bdk/kinetics.hpp"

namespace bdk {

/// Schema or value error in a run config. line == 0 when the problem is not
/// tied to one line (a missing key, a cross-field invariant).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string origin, std::size_t line, const std::string& msg);
  std::string origin;
  std::size_t line;
};

enum class InitialKind { Monomer, Equilibrium, File, EquilibriumPlusMonomer };

struct InitialSpec {
  InitialKind kind = InitialKind::Monomer;
  double rho0 = 0.0;       // monomer
  double rho = 0.0;        // equilibrium
  std::string path;        // file (BDK1 state binary)
  double rho_eq = 0.0;     // equilibrium_plus_monomer
  double rho_extra = 0.0;
  /// keep c_j for j <= n only (0 = all of L)
  std::size_t n = 0;
};

struct ModelSpec {
  std::string family = "power_law";  // power_law | custom
  std::size_t N = 2;
  double C1 = 1.0;
  double alpha = 0.5;
  double C2 = 1.0;
  double delta = 0.5;
  std::string table;
};

struct DiagnosticsSpec {
  std::vector<std::size_t> G_indices;
  std::vector<double> moments{2.0};
  std::size_t head = 10;
  std::optional<double> reference_rho;
};

/// Optional tail-bound check over the run's snapshots.
struct BoundSpec {
  bool enabled = false;
  double t0 = 0.0;
  double lambda = 1.5;
  std::size_t k0 = 1;
  std::size_t M = 0;  // 0 = L
  double C = 1.0;
};

struct RunConfig {
  std::string scenario = "run";
  ModelSpec model;
  std::size_t L = 0;
  /// nonempty: one run per truncation size (the L key is then ignored)
  std::vector<std::size_t> sweep_L;
  InitialSpec initial;
  IntegratorConfig integrator;
  /// uniform snapshot spacing used when no explicit times are given
  double snapshot_every = 0.0;
  DiagnosticsSpec diagnostics;
  BoundSpec bound;
  std::size_t validate_j_max = 10000;
  double validate_tol = kLimitTolerance;
  /// c_1..c_head columns in trajectory.csv
  std::size_t output_head = 10;
  bool state_binaries = false;
  /// directory of the config file; relative paths resolve against it
  std::string base_dir = ".";

  /// Cross-field invariants (N >= 2, L >= 2N + 1, rho >= 0, paths exist).
  /// Throws ConfigError.
  void validate(const std::string& origin = "config") const;

  CoefficientModel build_model() const;
  /// snapshot times actually used (explicit list or uniform grid)
  IntegratorConfig integrator_for_run() const;
  std::string resolve(const std::string& path) const;
};

/// Parses the `key = value` format: `#` comments, dotted keys, lists as
/// comma-separated values. Unknown keys and malformed values are errors
/// naming the line.
RunConfig parse_config(const std::string& text,
                       const std::string& origin = "config");
RunConfig load_config(const std::string& path);

/// Serializes to the same format; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& cfg);

/// Critical density of the reference model, fixed by an independent
/// summation; the `critical` preset starts exactly there.
inline constexpr double kReferenceCriticalDensity = 11.941043116529912;
/// Horizon of the supercritical presets.
inline constexpr double kSupercriticalHorizon = 3e5;

std::vector<std::string> preset_names();
/// Throws std::invalid_argument listing the presets on an unknown name.
RunConfig preset(const std::string& name);

}  // namespace bdk
