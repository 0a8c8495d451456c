#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

// runs the CLI with its output root in dir, stderr folded into out
Result bdk(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && BDK_OUT_DIR='" +
                          (dir / "out").string() + "' '" BDK_CLI_PATH "' " + args +
                          " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "bdk_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string kv_value(const std::string& kv, const std::string& key) {
  std::istringstream in(kv);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
  return {};
}

const char* kSmall = R"(scenario = small
model.family = power_law
model.N = 2
model.C1 = 1
model.alpha = 0.5
model.C2 = 1
model.delta = 0.5
L = 30
initial.type = monomer
initial.rho0 = 0
integrator.T = 3
integrator.snapshot_every = 1
)";

}  // namespace

TEST(Cli, NeedsSubcommand) {
  const auto dir = scratch("none");
  EXPECT_EQ(bdk(dir, "").code, 2);
}

TEST(Cli, UnknownPresetExitsTwoAndListsPresets) {
  const auto dir = scratch("bogus");
  const auto r = bdk(dir, "preset bogus");
  EXPECT_EQ(r.code, 2);
  for (const char* n : {"subcritical", "critical", "supercritical", "refinement"})
    EXPECT_NE(r.out.find(n), std::string::npos) << r.out;
}

TEST(Cli, PresetEmitsParsableConfig) {
  const auto dir = scratch("emit");
  ASSERT_EQ(bdk(dir, "preset refinement --emit ref.cfg").code, 0);
  const std::string text = slurp(dir / "ref.cfg");
  EXPECT_NE(text.find("sweep.L = 250, 500, 1000, 2000"), std::string::npos) << text;
  const auto r = bdk(dir, "preset subcritical");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("initial.rho0 = 2\n"), std::string::npos) << r.out;
}

TEST(Cli, CutoffBelowTwoExitsTwoWithLine) {
  const auto dir = scratch("n1");
  std::string text = kSmall;
  text.replace(text.find("model.N = 2"), 11, "model.N = 1");
  write(dir / "bad.cfg", text);
  for (const char* sub : {"run", "validate"}) {
    const auto r = bdk(dir, std::string(sub) + " bad.cfg");
    EXPECT_EQ(r.code, 2) << sub;
    EXPECT_NE(r.out.find("bad.cfg:3:"), std::string::npos) << r.out;
  }
}

TEST(Cli, MissingConfigExitsTwo) {
  const auto dir = scratch("missing");
  EXPECT_EQ(bdk(dir, "run nowhere.cfg").code, 2);
}

TEST(Cli, ZeroDensityGivesZeroTrajectory) {
  const auto dir = scratch("zero");
  write(dir / "zero.cfg", kSmall);
  const auto r = bdk(dir, "run zero.cfg");
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream csv(slurp(dir / "out" / "small" / "trajectory.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("t,rho,c_1", 0), 0u) << line;
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');  // t
    while (std::getline(cells, cell, ',')) EXPECT_EQ(std::stod(cell), 0.0) << line;
  }
  EXPECT_EQ(rows, 4);
}

TEST(Cli, EquilibriumReport) {
  const auto dir = scratch("eq");
  write(dir / "m.cfg", kSmall);
  auto r = bdk(dir, "equilibrium m.cfg --rho 2");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("regime = subcritical"), std::string::npos) << r.out;
  EXPECT_NEAR(std::stod(kv_value(r.out, "z")), 0.29953879482109014, 1e-12);
  r = bdk(dir, "equilibrium m.cfg --rho 20");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("regime = supercritical"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("z = none"), std::string::npos) << r.out;
}

TEST(Cli, SubcriticalPreset) {
  const auto dir = scratch("sub");
  ASSERT_EQ(bdk(dir, "preset subcritical --emit sub.cfg").code, 0);
  const auto r = bdk(dir, "run sub.cfg");
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string kv = slurp(dir / "out" / "subcritical" / "summary.kv");
  EXPECT_EQ(kv_value(kv, "regime"), "subcritical");
  EXPECT_LE(std::stod(kv_value(kv, "final_strong_dist")), 1e-4);
  EXPECT_FALSE(kv_value(kv, "rho_s").empty());
  EXPECT_FALSE(kv_value(kv, "rho_s_unweighted").empty());
  EXPECT_FALSE(kv_value(kv, "z_s").empty());
}

TEST(Cli, IntegrationFailureExitsThree) {
  const auto dir = scratch("fail");
  std::string text = kSmall;
  text.replace(text.find("initial.rho0 = 0"), 16, "initial.rho0 = 3");
  text += "integrator.max_steps = 2\n";
  write(dir / "f.cfg", text);
  const auto r = bdk(dir, "run f.cfg");
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_TRUE(fs::exists(dir / "out" / "small" / "last_valid.bin"));
}
