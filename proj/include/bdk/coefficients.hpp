#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace bdk {

/// Power-law kernel family
///   a_jk = C1 (j^alpha + k^alpha),  log Q_j = C2 (j - j^delta)
/// for min{j,k} <= N, zero otherwise.
struct PowerLaw {
  double C1 = 1.0;
  double alpha = 0.5;
  double C2 = 1.0;
  double delta = 0.5;
};

/// Tabulated kernel family.
///
/// `a` holds a_jk for j = 1..N (rows) and k = 1..a_columns (columns);
/// entries with both indices <= N must be symmetric. `log_q` holds
/// log Q_j for j = 1..log_q.size() with log_q[0] == 0. Lookups outside the
/// tables throw std::out_of_range; nothing is interpolated.
struct CustomTable {
  std::size_t a_columns = 0;
  std::vector<double> a;  // row-major, N x a_columns
  std::vector<double> log_q;
  /// growth exponent used when checking a_jk <= K (j^alpha + k^alpha)
  double alpha = 0.5;
};

class CoefficientModel {
 public:
  using Family = std::variant<PowerLaw, CustomTable>;

  /// Throws std::invalid_argument if N < 2 or family parameters are out of
  /// range (PowerLaw: C1, C2 >= 0, alpha, delta in [0,1)).
  CoefficientModel(std::size_t N, Family family);

  static CoefficientModel power_law(std::size_t N, double C1, double alpha,
                                    double C2, double delta);

  /// Tabulates a(j,k) for j <= N, k <= a_columns and log_q(j) for j <= q_len.
  template <class AFn, class QFn>
  static CoefficientModel tabulate(std::size_t N, std::size_t a_columns,
                                   AFn&& a, std::size_t q_len, QFn&& log_q,
                                   double alpha = 0.5) {
    CustomTable t;
    t.a_columns = a_columns;
    t.alpha = alpha;
    t.a.resize(N * a_columns);
    for (std::size_t j = 1; j <= N; ++j)
      for (std::size_t k = 1; k <= a_columns; ++k)
        t.a[(j - 1) * a_columns + (k - 1)] = a(j, k);
    t.log_q.resize(q_len);
    for (std::size_t j = 1; j <= q_len; ++j) t.log_q[j - 1] = log_q(j);
    return CoefficientModel(N, std::move(t));
  }

  std::size_t N() const { return N_; }
  const Family& family() const { return family_; }
  bool is_power_law() const { return std::holds_alternative<PowerLaw>(family_); }

  /// Growth constants: for PowerLaw K = C1 and alpha is the family's; for
  /// tabulated families alpha comes from the table and K is estimated by
  /// validate_hypotheses.
  double growth_alpha() const;

  /// Largest k such that a_jk is defined for every j <= N (max for PowerLaw).
  std::size_t max_coag_index() const;
  /// Largest j with log Q_j defined.
  std::size_t max_log_q_index() const;

  double coag_rate(std::size_t j, std::size_t k) const;
  double log_q(std::size_t j) const;
  /// log Q_j in extended precision (tabulated families: the table value).
  long double log_q_extended(std::size_t j) const;
  /// log Q_j + log Q_k - log Q_{j+k}, without the cancellation of the
  /// naive difference where the family allows it.
  double log_balance(std::size_t j, std::size_t k) const;
  /// b_jk = a_jk exp(log Q_j + log Q_k - log Q_{j+k}).
  double frag_rate(std::size_t j, std::size_t k) const;

 private:
  std::size_t N_;
  Family family_;
};

double coag_rate(const CoefficientModel& model, std::size_t j, std::size_t k);
double log_q(const CoefficientModel& model, std::size_t j);
double frag_rate(const CoefficientModel& model, std::size_t j, std::size_t k);

enum class CheckStatus {
  Pass,
  /// a limit statement that a finite check supports but cannot certify
  NumericallySupported,
  Fail,
};

const char* to_string(CheckStatus s);

struct HypothesisCheck {
  int hypothesis = 0;  // 1..6
  std::string name;
  CheckStatus status = CheckStatus::Fail;
  std::string detail;
  /// worst observed value of the quantity checked (residual, constant, ...)
  double observed = 0.0;
  bool passed() const { return status != CheckStatus::Fail; }
};

struct ValidationReport {
  std::size_t j_max = 0;
  double tol = 0.0;
  std::vector<HypothesisCheck> checks;
  /// estimated constants (H3 / H6) and critical activity estimate
  double K = 0.0;
  double alpha = 0.0;
  double K_a = 0.0;
  double z_s_estimate = 0.0;
  bool degenerate = false;

  bool all_passed() const;
  const HypothesisCheck& check(int hypothesis) const;
  std::string to_text() const;
  /// one `key = value` record per line
  std::string to_kv() const;
};

/// Default tolerance for limit stabilisation checks.
inline constexpr double kLimitTolerance = 1e-3;

/// Checks Hypotheses 1-6 exhaustively for indices up to j_max (which must
/// be >= 2N). Limit statements are checked as stabilisation between
/// j_max / 2 and j_max.
ValidationReport validate_hypotheses(const CoefficientModel& model,
                                     std::size_t j_max,
                                     double tol = kLimitTolerance);

/// Reads a tabulated family: `#` comments, lines `a <j> <k> <value>` and
/// `logq <j> <value>`, optional `alpha <value>`. Throws std::runtime_error
/// with the offending line number on malformed input.
CoefficientModel load_custom_table(const std::string& path, std::size_t N);

}  // namespace bdk
