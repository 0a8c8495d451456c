#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bdk/coefficients.hpp"
#include "support/oracles.hpp"

using namespace bdk;

namespace {

CoefficientModel exp_decay_table(std::size_t cols) {
  return CoefficientModel::tabulate(
      2, cols,
      [](std::size_t j, std::size_t k) {
        return std::exp(-static_cast<double>(j + k));
      },
      2 * cols + 2,
      [](std::size_t j) {
        const double x = static_cast<double>(j);
        return x - std::sqrt(x);
      });
}

CoefficientModel floor_log_table(std::size_t cols) {
  return CoefficientModel::tabulate(
      2, cols,
      [](std::size_t j, std::size_t k) {
        const double s = static_cast<double>(j + k);
        return std::floor(std::log(s)) * std::sqrt(s);
      },
      2 * cols + 2,
      [](std::size_t j) {
        const double x = static_cast<double>(j);
        return x - std::sqrt(x);
      });
}

}  // namespace

TEST(CoagRate, ZeroExponentGivesTwo) {
  auto m = CoefficientModel::power_law(2, 1.0, 0.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(m.coag_rate(1, 5), 2.0);
}

TEST(CoagRate, SquareRootKernel) {
  auto m = CoefficientModel::power_law(2, 1.0, 0.5, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(m.coag_rate(1, 4), 3.0);
}

TEST(CoagRate, VanishesAboveCutoff) {
  auto m = oracle::reference_model();
  EXPECT_EQ(m.coag_rate(3, 4), 0.0);
  EXPECT_EQ(m.frag_rate(3, 4), 0.0);
}

TEST(CoagRate, SymmetricExactly) {
  auto m = oracle::reference_model();
  for (std::size_t j = 1; j <= 50; ++j)
    for (std::size_t k = 1; k <= 50; ++k) {
      EXPECT_EQ(m.coag_rate(j, k), m.coag_rate(k, j));
      EXPECT_EQ(m.frag_rate(j, k), m.frag_rate(k, j));
    }
}

TEST(CoagRate, FreeFunctionsForward) {
  auto m = oracle::reference_model();
  EXPECT_EQ(coag_rate(m, 2, 7), m.coag_rate(2, 7));
  EXPECT_EQ(frag_rate(m, 2, 7), m.frag_rate(2, 7));
  EXPECT_EQ(log_q(m, 7), m.log_q(7));
}

TEST(CoagRate, TableLookupOutsideRangeThrows) {
  auto m = exp_decay_table(10);
  EXPECT_NO_THROW(m.coag_rate(2, 10));
  EXPECT_THROW(m.coag_rate(1, 11), std::out_of_range);
  EXPECT_THROW(m.log_q(23), std::out_of_range);
  EXPECT_EQ(m.coag_rate(5, 7), 0.0);
}

TEST(LogQ, PowerOfTwo) {
  auto m = CoefficientModel::power_law(2, 1.0, 0.5, std::log(2.0), 0.5);
  EXPECT_NEAR(std::exp(m.log_q(4)), 4.0, 1e-14);
}

TEST(LogQ, FirstIsZero) {
  for (double c2 : {0.0, 0.3, 1.0, 7.0})
    for (double d : {0.0, 0.5, 0.9})
      EXPECT_EQ(CoefficientModel::power_law(2, 1, 0.5, c2, d).log_q(1), 0.0);
}

TEST(LogQ, Hundred) {
  EXPECT_DOUBLE_EQ(oracle::reference_model().log_q(100), 90.0);
}

TEST(FragRate, FlatQGivesCoag) {
  auto m = CoefficientModel::power_law(3, 1.3, 0.4, 0.0, 0.5);
  for (std::size_t j = 1; j <= 3; ++j)
    for (std::size_t k = 1; k <= 40; ++k)
      EXPECT_DOUBLE_EQ(m.frag_rate(j, k), m.coag_rate(j, k));
}

TEST(FragRate, MonomerPair) {
  auto m = CoefficientModel::power_law(2, 1.0, 0.0, 1.0, 0.5);
  EXPECT_NEAR(m.frag_rate(1, 1), 2.0 * std::exp(-(2.0 - std::sqrt(2.0))),
              1e-15);
}

TEST(FragRate, ZeroAboveCutoff) {
  EXPECT_EQ(oracle::reference_model().frag_rate(5, 7), 0.0);
}

TEST(FragRate, BoundedByCoagUnderSuperadditivity) {
  auto m = oracle::reference_model();
  for (std::size_t j = 1; j <= 2; ++j)
    for (std::size_t k = 1; k <= 10000; k += 7)
      EXPECT_LE(m.frag_rate(j, k), m.coag_rate(j, k));
}

TEST(FragRate, DetailedBalanceToRounding) {
  auto m = oracle::reference_model();
  double worst = 0.0;
  for (std::size_t j = 1; j <= 2; ++j)
    for (std::size_t k = 1; k <= 10000; ++k) {
      const long double lhs =
          static_cast<long double>(m.frag_rate(j, k)) *
          std::exp(m.log_q_extended(j + k) - m.log_q_extended(j) -
                   m.log_q_extended(k));
      const double a = m.coag_rate(j, k);
      worst = std::max(worst, static_cast<double>(std::abs(lhs - a) / a));
    }
  EXPECT_LE(worst, 1e-14);
}

TEST(LogBalance, MatchesNaiveDifferenceWhereItIsAccurate) {
  auto m = oracle::reference_model();
  for (std::size_t j = 1; j <= 2; ++j)
    for (std::size_t k = 1; k <= 30; ++k)
      EXPECT_NEAR(m.log_balance(j, k),
                  m.log_q(j) + m.log_q(k) - m.log_q(j + k), 1e-13);
}

TEST(Construction, RejectsBadParameters) {
  EXPECT_THROW(CoefficientModel::power_law(1, 1, 0.5, 1, 0.5),
               std::invalid_argument);
  EXPECT_THROW(CoefficientModel::power_law(2, -1, 0.5, 1, 0.5),
               std::invalid_argument);
  EXPECT_THROW(CoefficientModel::power_law(2, 1, 1.0, 1, 0.5),
               std::invalid_argument);
  EXPECT_THROW(CoefficientModel::power_law(2, 1, 0.5, -1, 0.5),
               std::invalid_argument);
  EXPECT_THROW(CoefficientModel::power_law(2, 1, 0.5, 1, 1.0),
               std::invalid_argument);
}

TEST(Validation, ReferenceModelPassesAllSix) {
  const auto rep = validate_hypotheses(oracle::reference_model(), 10000);
  ASSERT_EQ(rep.checks.size(), 6u);
  for (const auto& c : rep.checks)
    EXPECT_TRUE(c.passed()) << c.hypothesis << ": " << c.detail;
  EXPECT_TRUE(rep.all_passed());
  EXPECT_DOUBLE_EQ(rep.K, 1.0);
  EXPECT_FALSE(rep.degenerate);
  // limits are never reported as proved
  EXPECT_EQ(rep.check(4).status, CheckStatus::NumericallySupported);
  EXPECT_EQ(rep.check(5).status, CheckStatus::NumericallySupported);
}

TEST(Validation, ExponentialKernelFailsRatioLimitOnly) {
  const auto rep = validate_hypotheses(exp_decay_table(1200), 600);
  EXPECT_FALSE(rep.check(5).passed()) << rep.check(5).detail;
  EXPECT_TRUE(rep.check(6).passed()) << rep.check(6).detail;
}

TEST(Validation, FloorLogKernelFailsIncrementBoundOnly) {
  const auto rep = validate_hypotheses(floor_log_table(20000), 10000);
  EXPECT_TRUE(rep.check(5).passed()) << rep.check(5).detail;
  EXPECT_FALSE(rep.check(6).passed()) << rep.check(6).detail;
}

TEST(Validation, RequiresTwiceCutoff) {
  EXPECT_THROW(validate_hypotheses(oracle::reference_model(), 3),
               std::invalid_argument);
}

TEST(Validation, TextAndRecords) {
  const auto rep = validate_hypotheses(oracle::reference_model(), 200);
  const std::string kv = rep.to_kv();
  EXPECT_NE(kv.find("H2.status"), std::string::npos) << kv;
  EXPECT_NE(rep.to_text().find("numerically supported"), std::string::npos);
}

TEST(Validation, SubadditiveLogQFails) {
  auto m = CoefficientModel::tabulate(
      2, 100, [](std::size_t j, std::size_t k) { return double(j + k); }, 202,
      [](std::size_t j) { return -static_cast<double>(j - 1) * 0.1 - (j > 1) * 1.0; });
  const auto rep = validate_hypotheses(m, 100);
  EXPECT_FALSE(rep.check(4).passed()) << rep.check(4).detail;
}

TEST(TableFile, RoundTripsAndReportsLines) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "bdk_table_test";
  fs::create_directories(dir);
  const fs::path good = dir / "good.txt";
  {
    std::ofstream f(good);
    f << "# two-row table\nalpha 0.5\n";
    for (int j = 1; j <= 2; ++j)
      for (int k = 1; k <= 6; ++k) f << "a " << j << " " << k << " " << j + k << "\n";
    for (int j = 1; j <= 14; ++j) f << "logq " << j << " " << (j - 1) * 0.5 << "\n";
  }
  const auto m = load_custom_table(good.string(), 2);
  EXPECT_EQ(m.coag_rate(2, 5), 7.0);
  EXPECT_EQ(m.coag_rate(5, 2), 7.0);
  EXPECT_EQ(m.log_q(3), 1.0);
  EXPECT_THROW(m.coag_rate(1, 7), std::out_of_range);

  const fs::path bad = dir / "bad.txt";
  {
    std::ofstream f(bad);
    f << "a 1 1 2\nlogq 1 0\nbogus 3\n";
  }
  try {
    (void)load_custom_table(bad.string(), 2);
    FAIL() << "malformed table accepted";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_custom_table((dir / "missing.txt").string(), 2),
               std::runtime_error);
}
