#include "bdk/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bdk {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_index(std::size_t j, const char* what) {
  if (j == 0)
    throw std::out_of_range(std::string(what) + ": cluster sizes start at 1");
}

}  // namespace

CoefficientModel::CoefficientModel(std::size_t N, Family family)
    : N_(N), family_(std::move(family)) {
  if (N_ < 2)
    throw std::invalid_argument("interaction cutoff N must be >= 2, got " +
                                std::to_string(N_));
  std::visit(
      overloaded{
          [](const PowerLaw& p) {
            auto unit = [](double v) { return v >= 0.0 && v < 1.0; };
            if (!(p.C1 >= 0.0) || !std::isfinite(p.C1))
              throw std::invalid_argument("C1 must be >= 0");
            if (!(p.C2 >= 0.0) || !std::isfinite(p.C2))
              throw std::invalid_argument("C2 must be >= 0");
            if (!unit(p.alpha))
              throw std::invalid_argument("alpha must lie in [0,1)");
            if (!unit(p.delta))
              throw std::invalid_argument("delta must lie in [0,1)");
          },
          [this](const CustomTable& t) {
            if (t.a_columns < N_ || t.a.size() != N_ * t.a_columns)
              throw std::invalid_argument(
                  "coagulation table must have N rows and >= N columns");
            if (t.log_q.empty() || t.log_q[0] != 0.0)
              throw std::invalid_argument("tabulated log Q_1 must be 0");
            if (!(t.alpha >= 0.0))
              throw std::invalid_argument("alpha must be >= 0");
          }},
      family_);
}

CoefficientModel CoefficientModel::power_law(std::size_t N, double C1,
                                             double alpha, double C2,
                                             double delta) {
  return CoefficientModel(N, PowerLaw{C1, alpha, C2, delta});
}

double CoefficientModel::growth_alpha() const {
  return std::visit(overloaded{[](const PowerLaw& p) { return p.alpha; },
                               [](const CustomTable& t) { return t.alpha; }},
                    family_);
}

std::size_t CoefficientModel::max_coag_index() const {
  return std::visit(
      overloaded{[](const PowerLaw&) {
                   return std::numeric_limits<std::size_t>::max();
                 },
                 [](const CustomTable& t) { return t.a_columns; }},
      family_);
}

std::size_t CoefficientModel::max_log_q_index() const {
  return std::visit(
      overloaded{[](const PowerLaw&) {
                   return std::numeric_limits<std::size_t>::max();
                 },
                 [](const CustomTable& t) { return t.log_q.size(); }},
      family_);
}

double CoefficientModel::coag_rate(std::size_t j, std::size_t k) const {
  check_index(j, "coag_rate");
  check_index(k, "coag_rate");
  const std::size_t lo = std::min(j, k);
  const std::size_t hi = std::max(j, k);
  if (lo > N_) return 0.0;
  return std::visit(
      overloaded{
          [&](const PowerLaw& p) {
            return p.C1 * (std::pow(static_cast<double>(j), p.alpha) +
                           std::pow(static_cast<double>(k), p.alpha));
          },
          [&](const CustomTable& t) {
            if (hi > t.a_columns)
              throw std::out_of_range("coagulation table has no entry a(" +
                                      std::to_string(lo) + "," +
                                      std::to_string(hi) + ")");
            return t.a[(lo - 1) * t.a_columns + (hi - 1)];
          }},
      family_);
}

double CoefficientModel::log_q(std::size_t j) const {
  check_index(j, "log_q");
  if (j == 1) return 0.0;
  return std::visit(
      overloaded{[&](const PowerLaw& p) {
                   const double x = static_cast<double>(j);
                   return p.C2 * (x - std::pow(x, p.delta));
                 },
                 [&](const CustomTable& t) {
                   if (j > t.log_q.size())
                     throw std::out_of_range("log Q table has no entry " +
                                             std::to_string(j));
                   return t.log_q[j - 1];
                 }},
      family_);
}

long double CoefficientModel::log_q_extended(std::size_t j) const {
  check_index(j, "log_q");
  if (j == 1) return 0.0L;
  if (const auto* p = std::get_if<PowerLaw>(&family_)) {
    const long double x = static_cast<long double>(j);
    return static_cast<long double>(p->C2) *
           (x - std::pow(x, static_cast<long double>(p->delta)));
  }
  return log_q(j);
}

double CoefficientModel::log_balance(std::size_t j, std::size_t k) const {
  if (const auto* p = std::get_if<PowerLaw>(&family_)) {
    // the linear parts of log Q cancel exactly
    check_index(j, "log_q");
    check_index(k, "log_q");
    // (x+y)^d - y^d = y^d expm1(d log1p(x/y)) with y the larger index
    const double x = static_cast<double>(std::min(j, k));
    const double y = static_cast<double>(std::max(j, k));
    const double d = p->delta;
    return p->C2 * (std::pow(y, d) * std::expm1(d * std::log1p(x / y)) -
                    std::pow(x, d));
  }
  return log_q(j) + log_q(k) - log_q(j + k);
}

double CoefficientModel::frag_rate(std::size_t j, std::size_t k) const {
  const double a = coag_rate(j, k);
  if (a == 0.0) return 0.0;
  return a * std::exp(log_balance(j, k));
}

double coag_rate(const CoefficientModel& model, std::size_t j, std::size_t k) {
  return model.coag_rate(j, k);
}
double log_q(const CoefficientModel& model, std::size_t j) {
  return model.log_q(j);
}
double frag_rate(const CoefficientModel& model, std::size_t j, std::size_t k) {
  return model.frag_rate(j, k);
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::NumericallySupported:
      return "numerically supported";
    case CheckStatus::Fail:
      return "fail";
  }
  return "?";
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const HypothesisCheck& c) { return c.passed(); });
}

const HypothesisCheck& ValidationReport::check(int hypothesis) const {
  for (const auto& c : checks)
    if (c.hypothesis == hypothesis) return c;
  throw std::out_of_range("no check for hypothesis " +
                          std::to_string(hypothesis));
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << "Hypothesis validation (indices up to " << j_max << ", limit tol "
     << tol << ")\n";
  for (const auto& c : checks) {
    os << "  H" << c.hypothesis << " " << c.name << ": " << to_string(c.status)
       << "  [" << c.detail << "]\n";
  }
  os << "  K = " << K << ", alpha = " << alpha << ", K_a = " << K_a
     << ", z_s estimate = " << z_s_estimate
     << (degenerate ? " (degenerate)" : "") << "\n";
  os << "  overall: " << (all_passed() ? "pass" : "fail") << "\n";
  return os.str();
}

std::string ValidationReport::to_kv() const {
  std::ostringstream os;
  os.precision(17);
  os << "validation.j_max = " << j_max << "\n";
  os << "validation.tol = " << tol << "\n";
  for (const auto& c : checks) {
    os << "validation.H" << c.hypothesis << ".status = " << to_string(c.status)
       << "\n";
    os << "validation.H" << c.hypothesis << ".observed = " << c.observed
       << "\n";
  }
  os << "validation.K = " << K << "\n";
  os << "validation.alpha = " << alpha << "\n";
  os << "validation.K_a = " << K_a << "\n";
  os << "validation.z_s_estimate = " << z_s_estimate << "\n";
  os << "validation.degenerate = " << (degenerate ? "true" : "false") << "\n";
  os << "validation.all_passed = " << (all_passed() ? "true" : "false")
     << "\n";
  return os.str();
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

HypothesisCheck check_cutoff(const CoefficientModel& m, std::size_t j_max) {
  HypothesisCheck c{1, "generalized Becker-Doring cutoff", CheckStatus::Pass,
                    "", 0.0};
  const std::size_t N = m.N();
  double min_rate = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j <= N; ++j) {
    for (std::size_t k = 1; k <= j_max; ++k) {
      const double a = m.coag_rate(j, k);
      const double b = m.frag_rate(j, k);
      min_rate = std::min({min_rate, a, b});
      if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        c.status = CheckStatus::Fail;
        c.detail = "non-positive rate at (j,k) = (" + std::to_string(j) +
                   "," + std::to_string(k) + "): a = " + fmt(a) +
                   ", b = " + fmt(b);
        c.observed = min_rate;
        return c;
      }
    }
  }
  for (std::size_t j = N + 1; j <= j_max; ++j)
    for (std::size_t k = j; k <= j_max; ++k)
      if (m.coag_rate(j, k) != 0.0 || m.frag_rate(j, k) != 0.0) {
        c.status = CheckStatus::Fail;
        c.detail = "nonzero rate beyond cutoff at (" + std::to_string(j) +
                   "," + std::to_string(k) + ")";
        return c;
      }
  c.observed = min_rate;
  c.detail = "N = " + std::to_string(N) + ", min rate " + fmt(min_rate);
  return c;
}

HypothesisCheck check_balance(const CoefficientModel& m, std::size_t j_max) {
  HypothesisCheck c{2, "detailed balance", CheckStatus::Pass, "", 0.0};
  if (m.log_q(1) != 0.0) {
    c.status = CheckStatus::Fail;
    c.detail = "log Q_1 != 0";
    return c;
  }
  double worst = 0.0;
  for (std::size_t j = 1; j <= m.N(); ++j) {
    for (std::size_t k = 1; k <= j_max; ++k) {
      const double a = m.coag_rate(j, k);
      const double b = m.frag_rate(j, k);
      if (a != m.coag_rate(k, j) || b != m.frag_rate(k, j)) {
        c.status = CheckStatus::Fail;
        c.detail = "asymmetric rates at (" + std::to_string(j) + "," +
                   std::to_string(k) + ")";
        return c;
      }
      // b Q_{j+k} / (Q_j Q_k) against a, with log Q in extended precision
      const long double lhs =
          static_cast<long double>(b) *
          std::exp(m.log_q_extended(j + k) - m.log_q_extended(j) -
                   m.log_q_extended(k));
      const double resid = static_cast<double>(
          a > 0.0 ? std::abs(lhs - a) / a : std::abs(lhs));
      worst = std::max(worst, resid);
    }
  }
  c.observed = worst;
  if (!(worst <= 1e-14)) c.status = CheckStatus::Fail;
  c.detail = "max relative residual " + fmt(worst);
  return c;
}

HypothesisCheck check_growth(const CoefficientModel& m, std::size_t j_max,
                             double tol, double& K_out) {
  HypothesisCheck c{3, "sublinear growth", CheckStatus::Pass, "", 0.0};
  const double alpha = m.growth_alpha();
  double k_low = 0.0, k_high = 0.0;
  for (std::size_t j = 1; j <= m.N(); ++j) {
    for (std::size_t k = 1; k <= j_max; ++k) {
      const double scale = std::pow(static_cast<double>(j), alpha) +
                           std::pow(static_cast<double>(k), alpha);
      const double r =
          std::max(m.coag_rate(j, k), m.frag_rate(j, k)) / scale;
      double& slot = 2 * k <= j_max ? k_low : k_high;
      slot = std::max(slot, r);
    }
  }
  const double K = std::max(k_low, k_high);
  K_out = K;
  c.observed = K;
  if (!(alpha < 1.0)) {
    c.status = CheckStatus::Fail;
    c.detail = "alpha = " + fmt(alpha) + " is not < 1";
    return c;
  }
  if (const auto* p = std::get_if<PowerLaw>(&m.family())) {
    // Analytic: a_jk = C1(j^a + k^a) and b_jk <= a_jk under H4.
    if (K > p->C1 * (1.0 + 1e-12)) {
      c.status = CheckStatus::Fail;
      c.detail = "observed K " + fmt(K) + " exceeds C1 " + fmt(p->C1);
    } else {
      K_out = p->C1;
      c.detail = "K = C1 = " + fmt(p->C1) + ", alpha = " + fmt(alpha);
    }
    return c;
  }
  c.status = CheckStatus::NumericallySupported;
  if (k_high > k_low * (1.0 + tol)) {
    c.status = CheckStatus::Fail;
    c.detail = "ratio a/(j^a+k^a) still growing: upper-half sup " +
               fmt(k_high) + " > lower-half sup " + fmt(k_low);
  } else {
    c.detail = "estimated K = " + fmt(K) + ", alpha = " + fmt(alpha);
  }
  return c;
}

HypothesisCheck check_q_structure(const CoefficientModel& m, std::size_t j_max,
                                  double tol, double& z_est, bool& degenerate) {
  HypothesisCheck c{4, "log Q superadditive, Q_j/Q_{j+1} -> z_s",
                    CheckStatus::NumericallySupported, "", 0.0};
  const std::size_t q_len =
      std::min<std::size_t>(m.max_log_q_index(), 2 * j_max);
  std::vector<double> lq(q_len + 1, 0.0);
  for (std::size_t j = 1; j <= q_len; ++j) lq[j] = m.log_q(j);

  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j <= j_max; ++j) {
    for (std::size_t k = j; k <= j_max && j + k <= q_len; ++k) {
      const double excess = lq[j] + lq[k] - lq[j + k];
      if (excess > worst) worst = excess;
      if (excess > 1e-12) {
        c.status = CheckStatus::Fail;
        c.observed = excess;
        c.detail = "log Q_j + log Q_k > log Q_{j+k} at (" +
                   std::to_string(j) + "," + std::to_string(k) + ")";
        return c;
      }
    }
  }
  if (q_len < j_max + 1) {
    c.status = CheckStatus::Fail;
    c.detail = "log Q table shorter than j_max + 1";
    return c;
  }
  const std::size_t half = j_max / 2;
  const double r_full = std::exp(lq[j_max] - lq[j_max + 1]);
  const double r_half = std::exp(lq[half] - lq[half + 1]);
  z_est = r_full;
  c.observed = std::abs(r_full - r_half);
  if (!std::isfinite(r_full) || r_full <= tol) {
    degenerate = true;
    c.status = CheckStatus::Fail;
    c.detail = "degenerate critical activity estimate " + fmt(r_full);
    return c;
  }
  if (c.observed > tol) {
    c.status = CheckStatus::Fail;
    c.detail = "Q_j/Q_{j+1} not stabilised: " + fmt(r_half) + " at j=" +
               std::to_string(half) + ", " + fmt(r_full) + " at j=" +
               std::to_string(j_max);
    return c;
  }
  c.detail = "superadditivity exact (worst excess " + fmt(worst) +
             "); Q_j/Q_{j+1} stabilised at " + fmt(r_full);
  return c;
}

HypothesisCheck check_ratio_limit(const CoefficientModel& m, std::size_t j_max,
                                  double tol) {
  HypothesisCheck c{5, "a_jk / a_{j,k+m} -> 1",
                    CheckStatus::NumericallySupported, "", 0.0};
  const std::size_t half = j_max / 2;
  double worst = 0.0;
  for (std::size_t j = 1; j <= m.N(); ++j) {
    for (std::size_t mm = 1; mm <= m.N(); ++mm) {
      const double r_full = m.coag_rate(j, j_max) / m.coag_rate(j, j_max + mm);
      const double r_half = m.coag_rate(j, half) / m.coag_rate(j, half + mm);
      const double dev = std::max(std::abs(r_full - r_half),
                                  std::abs(r_full - 1.0));
      // NaN (vanishing rates) fails as well
      if (!(dev <= tol)) {
        c.status = CheckStatus::Fail;
        c.observed = dev;
        c.detail = "j=" + std::to_string(j) + ", m=" + std::to_string(mm) +
                   ": ratio " + fmt(r_half) + " at k=" + std::to_string(half) +
                   ", " + fmt(r_full) + " at k=" + std::to_string(j_max);
        return c;
      }
      worst = std::max(worst, dev);
    }
  }
  c.observed = worst;
  c.detail = "max deviation " + fmt(worst);
  return c;
}

HypothesisCheck check_increment_bound(const CoefficientModel& m,
                                      std::size_t j_max, double tol,
                                      double& Ka_out) {
  HypothesisCheck c{6, "|a_jk - a_{j,k+m}| <= K_a",
                    CheckStatus::NumericallySupported, "", 0.0};
  double low = 0.0, high = 0.0;
  for (std::size_t j = 1; j <= m.N(); ++j) {
    for (std::size_t mm = 1; mm <= m.N(); ++mm) {
      for (std::size_t k = 1; k <= j_max; ++k) {
        const double d = std::abs(m.coag_rate(j, k) - m.coag_rate(j, k + mm));
        double& slot = 2 * k <= j_max ? low : high;
        if (!(d <= slot)) slot = d;
      }
    }
  }
  Ka_out = std::max(low, high);
  c.observed = Ka_out;
  if (!(high <= low + tol * std::max(1.0, low))) {
    c.status = CheckStatus::Fail;
    c.detail = "increments still growing: upper-half sup " + fmt(high) +
               " > lower-half sup " + fmt(low);
  } else {
    c.detail = "estimated K_a = " + fmt(Ka_out);
  }
  return c;
}

template <class F>
HypothesisCheck guarded(int h, const char* name, F&& f) {
  try {
    return f();
  } catch (const std::out_of_range& e) {
    return HypothesisCheck{h, name, CheckStatus::Fail,
                           std::string("table too short: ") + e.what(), 0.0};
  }
}

}  // namespace

ValidationReport validate_hypotheses(const CoefficientModel& model,
                                     std::size_t j_max, double tol) {
  if (j_max < 2 * model.N())
    throw std::invalid_argument("validate_hypotheses needs j_max >= 2N");
  ValidationReport rep;
  rep.j_max = j_max;
  rep.tol = tol;
  rep.alpha = model.growth_alpha();
  rep.checks.push_back(guarded(1, "generalized Becker-Doring cutoff",
                               [&] { return check_cutoff(model, j_max); }));
  rep.checks.push_back(guarded(2, "detailed balance",
                               [&] { return check_balance(model, j_max); }));
  rep.checks.push_back(guarded(3, "sublinear growth", [&] {
    return check_growth(model, j_max, tol, rep.K);
  }));
  rep.checks.push_back(
      guarded(4, "log Q superadditive, Q_j/Q_{j+1} -> z_s", [&] {
        return check_q_structure(model, j_max, tol, rep.z_s_estimate,
                                 rep.degenerate);
      }));
  rep.checks.push_back(guarded(5, "a_jk / a_{j,k+m} -> 1", [&] {
    return check_ratio_limit(model, j_max, tol);
  }));
  rep.checks.push_back(guarded(6, "|a_jk - a_{j,k+m}| <= K_a", [&] {
    return check_increment_bound(model, j_max, tol, rep.K_a);
  }));
  return rep;
}

CoefficientModel load_custom_table(const std::string& path, std::size_t N) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open coefficient table");
  struct Entry {
    std::size_t j, k;
    double v;
  };
  std::vector<Entry> a_entries;
  std::vector<std::pair<std::size_t, double>> q_entries;
  double alpha = 0.5;
  std::size_t max_k = 0, max_q = 0;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "a") {
      Entry e{};
      if (!(ls >> e.j >> e.k >> e.v)) fail("expected `a <j> <k> <value>`");
      if (e.j == 0 || e.k == 0) fail("indices start at 1");
      if (std::min(e.j, e.k) > N) fail("entry beyond the interaction cutoff");
      if (e.j > e.k) std::swap(e.j, e.k);
      max_k = std::max(max_k, e.k);
      a_entries.push_back(e);
    } else if (tag == "logq") {
      std::size_t j = 0;
      double v = 0;
      if (!(ls >> j >> v)) fail("expected `logq <j> <value>`");
      if (j == 0) fail("indices start at 1");
      max_q = std::max(max_q, j);
      q_entries.emplace_back(j, v);
    } else if (tag == "alpha") {
      if (!(ls >> alpha)) fail("expected `alpha <value>`");
    } else {
      fail("unknown record `" + tag + "`");
    }
    std::string extra;
    if (ls >> extra) fail("trailing text `" + extra + "`");
  }
  CustomTable t;
  t.alpha = alpha;
  t.a_columns = max_k;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  t.a.assign(N * max_k, nan);
  for (const auto& e : a_entries) t.a[(e.j - 1) * max_k + (e.k - 1)] = e.v;
  for (std::size_t j = 1; j <= N; ++j)
    for (std::size_t k = j; k <= max_k; ++k)
      if (std::isnan(t.a[(j - 1) * max_k + (k - 1)]))
        throw std::runtime_error(path + ": missing entry a " +
                                 std::to_string(j) + " " + std::to_string(k));
  t.log_q.assign(max_q, nan);
  for (const auto& [j, v] : q_entries) t.log_q[j - 1] = v;
  for (std::size_t j = 1; j <= max_q; ++j)
    if (std::isnan(t.log_q[j - 1]))
      throw std::runtime_error(path + ": missing entry logq " +
                               std::to_string(j));
  return CoefficientModel(N, std::move(t));
}

}  // namespace bdk
