#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bdk/config.hpp"
#include "bdk/equilibrium.hpp"
#include "bdk/format.hpp"
#include "bdk/runner.hpp"

namespace fs = std::filesystem;
using namespace bdk;

namespace {

int cmd_run(const std::string& path) {
  RunConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  const std::string out = (fs::path(output_root()) / cfg.scenario).string();
  std::vector<RunResult> runs;
  try {
    runs = run_config(cfg, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  for (const auto& r : runs) {
    if (r.exit_code != kExitOk) {
      std::cerr << "error";
      if (r.L) std::cerr << " (L = " << r.L << ")";
      std::cerr << ": " << r.error << "\n";
      continue;
    }
    std::cout << r.out_dir << ":";
    for (const char* k : {"regime", "final_strong_dist", "final_c1",
                          "density_drift", "status"})
      if (auto v = r.get(k)) std::cout << " " << k << "=" << *v;
    std::cout << "\n";
  }
  return combined_exit_code(runs);
}

int cmd_preset(const std::string& name, const std::string& emit) {
  RunConfig cfg;
  try {
    cfg = preset(name);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  const std::string text = emit_config(cfg);
  if (emit.empty()) {
    std::cout << text;
    return kExitOk;
  }
  std::ofstream out(emit);
  if (!(out << text)) {
    std::cerr << "error: cannot write " << emit << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  try {
    const RunConfig cfg = load_config(path);
    const CoefficientModel model = cfg.build_model();
    const ValidationReport rep =
        validate_hypotheses(model, cfg.validate_j_max, cfg.validate_tol);
    std::cout << rep.to_text();
    return rep.all_passed() ? kExitOk : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

int cmd_equilibrium(const std::string& path, double rho) {
  try {
    const RunConfig cfg = load_config(path);
    const CoefficientModel model = cfg.build_model();
    if (rho < 0.0) throw std::invalid_argument("--rho must be >= 0");
    const CriticalData crit = critical_density(model, 1e-12);
    std::cout << "z_s = " << fmt_double(crit.z_s) << "\n"
              << "rho_s = "
              << (crit.rho_s_divergent ? "inf" : fmt_double(crit.rho_s)) << "\n"
              << "rho_s_unweighted = "
              << (crit.rho_s_unweighted_divergent
                      ? "inf"
                      : fmt_double(crit.rho_s_unweighted))
              << "\n"
              << "rho = " << fmt_double(rho) << "\n"
              << "regime = "
              << classify_regime(rho, crit.rho_s, crit.rho_s_divergent) << "\n";
    if (crit.rho_s_divergent || rho <= crit.rho_s) {
      const double z =
          activity_of_density(model, rho, 1e-14 * std::max(rho, 1.0));
      std::cout << "z = " << fmt_double(z) << "\n";
    } else {
      std::cout << "z = none (no equilibrium above rho_s)\n";
    }
    if (!cfg.sweep_L.empty() || cfg.L) {
      const std::size_t L = cfg.sweep_L.empty() ? cfg.L : cfg.sweep_L.back();
      const double zL = rho > 0.0
                            ? truncated_activity_of_density(model, rho, L,
                                                            1e-13 * rho)
                            : 0.0;
      std::cout << "z_L = " << fmt_double(zL) << " (L = " << L << ")\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Becker-Doring kinetics: scenario runner"};
  app.require_subcommand(1);

  std::string run_path;
  auto* run = app.add_subcommand("run", "integrate a config, write artifacts");
  run->add_option("config", run_path)->required();

  std::string preset_name, emit;
  auto* pre = app.add_subcommand("preset", "print or write a preset config");
  pre->add_option("name", preset_name)->required();
  pre->add_option("--emit", emit, "write to this path instead of stdout");

  std::string val_path;
  auto* val = app.add_subcommand("validate", "check the model hypotheses");
  val->add_option("config", val_path)->required();

  std::string eq_path;
  double rho = 0.0;
  auto* eq = app.add_subcommand("equilibrium", "equilibrium at a density");
  eq->add_option("config", eq_path)->required();
  eq->add_option("--rho", rho)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  if (*run) return cmd_run(run_path);
  if (*pre) return cmd_preset(preset_name, emit);
  if (*val) return cmd_validate(val_path);
  if (*eq) return cmd_equilibrium(eq_path, rho);
  return kExitValidation;
}
