#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bdk/config.hpp"
#include "support/oracles.hpp"

using namespace bdk;

namespace {

const char* kMinimal = R"(# smallest useful run
scenario = tiny
model.family = power_law
model.N = 2
model.C1 = 1
model.alpha = 0.5
model.C2 = 1
model.delta = 0.5
L = 40
initial.type = monomer
initial.rho0 = 2
integrator.T = 10
)";

std::size_t error_line(const std::string& text) {
  try {
    (void)parse_config(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.line;
  }
  ADD_FAILURE() << "accepted:\n" << text;
  return 0;
}

std::string replace_line(std::string text, const std::string& key,
                         const std::string& line) {
  const auto at = text.find(key + " =");
  if (at == std::string::npos) return text + line + "\n";
  const auto end = text.find('\n', at);
  return text.replace(at, end - at, line);
}

}  // namespace

TEST(Config, ParsesMinimal) {
  const RunConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.scenario, "tiny");
  EXPECT_EQ(c.model.N, 2u);
  EXPECT_EQ(c.L, 40u);
  EXPECT_EQ(c.initial.kind, InitialKind::Monomer);
  EXPECT_EQ(c.initial.rho0, 2.0);
  EXPECT_EQ(c.integrator.T, 10.0);
  EXPECT_NO_THROW(c.validate());
  const auto m = c.build_model();
  EXPECT_DOUBLE_EQ(m.log_q(100), oracle::reference_model().log_q(100));
}

TEST(Config, ListsAndComments) {
  std::string t = kMinimal;
  t += "diagnostics.G_indices = 2, 5,10   # trailing comment\n";
  t += "integrator.snapshot_times = 0.5, 1, 2.5\n";
  const RunConfig c = parse_config(t);
  EXPECT_EQ(c.diagnostics.G_indices, (std::vector<std::size_t>{2, 5, 10}));
  EXPECT_EQ(c.integrator.snapshot_times, (std::vector<double>{0.5, 1, 2.5}));
}

TEST(Config, EmitRoundTrips) {
  for (const auto& name : preset_names()) {
    const RunConfig c = preset(name);
    const std::string text = emit_config(c);
    const RunConfig back = parse_config(text, name);
    EXPECT_EQ(emit_config(back), text) << name;
    EXPECT_EQ(back.integrator.T, c.integrator.T);
    EXPECT_EQ(back.initial.rho0, c.initial.rho0);
    EXPECT_EQ(back.sweep_L, c.sweep_L);
  }
}

TEST(Config, ErrorsNameTheLine) {
  EXPECT_EQ(error_line(replace_line(kMinimal, "model.N", "model.N = 1")), 4u);
  EXPECT_EQ(error_line(replace_line(kMinimal, "L", "L = 4")), 9u);
  EXPECT_EQ(error_line(replace_line(kMinimal, "model.C1", "model.C1 = abc")), 5u);
  EXPECT_EQ(error_line(std::string(kMinimal) + "model.colour = red\n"), 13u);
  EXPECT_EQ(error_line(std::string(kMinimal) + "L = 50\n"), 13u);
  EXPECT_EQ(error_line(std::string(kMinimal) + "just words\n"), 13u);
  EXPECT_EQ(error_line(replace_line(kMinimal, "initial.rho0", "initial.rho0 = -1")), 11u);
}

TEST(Config, MessageCarriesOrigin) {
  try {
    (void)parse_config(replace_line(kMinimal, "model.N", "model.N = 1"), "my.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("my.cfg:4:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("N >= 2"), std::string::npos) << e.what();
  }
}

TEST(Config, MissingRequiredKeys) {
  EXPECT_THROW(parse_config(replace_line(kMinimal, "integrator.T", "")),
               ConfigError);
  EXPECT_THROW(parse_config(replace_line(kMinimal, "initial.rho0", "")), ConfigError);
  EXPECT_THROW(parse_config(replace_line(kMinimal, "L", "")), ConfigError);
}

TEST(Config, FilePathsResolveAgainstConfigDirectory) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "bdk_config_test";
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "run.cfg");
    f << replace_line(replace_line(kMinimal, "initial.type", "initial.type = file"),
                      "initial.rho0", "initial.path = start.bin");
  }
  fs::remove(dir / "start.bin");
  EXPECT_THROW(load_config((dir / "run.cfg").string()), ConfigError);
  { std::ofstream(dir / "start.bin") << "x"; }
  const RunConfig c = load_config((dir / "run.cfg").string());
  EXPECT_EQ(c.resolve(c.initial.path), (dir / "start.bin").string());
  EXPECT_THROW(load_config((dir / "absent.cfg").string()), ConfigError);
}

TEST(Config, UniformSnapshotGrid) {
  RunConfig c = parse_config(std::string(kMinimal) + "integrator.snapshot_every = 2.5\n");
  const auto ig = c.integrator_for_run();
  EXPECT_EQ(ig.snapshot_times, (std::vector<double>{0.0, 2.5, 5.0, 7.5}));
}

TEST(Preset, Subcritical) {
  const RunConfig c = preset("subcritical");
  EXPECT_EQ(c.initial.kind, InitialKind::Monomer);
  EXPECT_EQ(c.initial.rho0, 2.0);
  EXPECT_EQ(c.model.C1, 1.0);
  EXPECT_EQ(c.model.alpha, 0.5);
  EXPECT_EQ(c.model.C2, 1.0);
  EXPECT_EQ(c.model.delta, 0.5);
  EXPECT_EQ(c.model.N, 2u);
  EXPECT_EQ(c.L, 2000u);
}

TEST(Preset, RefinementSweep) {
  const RunConfig c = preset("refinement");
  EXPECT_EQ(c.sweep_L, (std::vector<std::size_t>{250, 500, 1000, 2000}));
  EXPECT_EQ(c.initial.rho0, 20.0);
}

TEST(Preset, CriticalAndSupercritical) {
  EXPECT_EQ(preset("critical").initial.rho0, kReferenceCriticalDensity);
  EXPECT_EQ(preset("supercritical").initial.rho0, 20.0);
  EXPECT_EQ(preset_names().size(), 4u);
}

TEST(Preset, UnknownNameListsPresets) {
  try {
    (void)preset("bogus");
    FAIL();
  } catch (const std::invalid_argument& e) {
    const std::string w = e.what();
    for (const auto& n : preset_names()) EXPECT_NE(w.find(n), std::string::npos) << w;
  }
}
