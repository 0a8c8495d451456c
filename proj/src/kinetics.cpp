#include "bdk/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bdk/simd/kernels.hpp"

namespace bdk {

double State::density() const { return simd::index_weighted_sum(c); }

TruncatedSystem::TruncatedSystem(const CoefficientModel& model, std::size_t L)
    : model_(&model), L_(L), N_(model.N()) {
  if (L_ < 2 * N_ + 1)
    throw std::invalid_argument("truncation L = " + std::to_string(L_) +
                                " must be >= 2N + 1 = " +
                                std::to_string(2 * N_ + 1));
  a_.resize(N_);
  b_.resize(N_);
  flux_.resize(N_);
  for (std::size_t k = 1; k <= N_; ++k) {
    auto& ak = a_[k - 1];
    auto& bk = b_[k - 1];
    ak.assign(L_ + 1, 0.0);
    bk.assign(L_ + 1, 0.0);
    flux_[k - 1].assign(L_ + 1, 0.0);
    for (std::size_t j = 1; j + k <= L_; ++j) {
      ak[j] = model.coag_rate(j, k);
      bk[j] = model.frag_rate(j, k);
    }
  }
}

void TruncatedSystem::rhs(std::span<const double> c,
                          std::span<double> dcdt) const {
  if (c.size() != L_ || dcdt.size() != L_)
    throw std::invalid_argument("state length does not match truncation L");
  const auto& kern = simd::kernels();
  const std::size_t N = N_;
  const std::size_t L = L_;

  for (std::size_t k = 1; k <= N; ++k)
    kern.flux(a_[k - 1].data() + 1, b_[k - 1].data() + 1, c.data(), c[k - 1],
              c.data() + k, flux_[k - 1].data() + 1, L - k);

  // Sizes 1..2N mix the regimes: gains from pairs with both parts <= N
  // count half, and sizes <= N lose mass to every partner.
  const std::size_t head = std::min(2 * N, L);
  for (std::size_t j = 1; j <= head; ++j) {
    double gain = 0.0;
    for (std::size_t k = 1; k <= std::min(N, j - 1); ++k)
      gain += (j - k > N ? 1.0 : 0.5) * flux_[k - 1][j - k];
    double loss = 0.0;
    if (j <= N) {
      loss = kern.sum(flux_[j - 1].data() + 1, L - j);
    } else {
      for (std::size_t k = 1; k <= std::min(N, L - j); ++k)
        loss += flux_[k - 1][j];
    }
    dcdt[j - 1] = gain - loss;
  }

  // j >= 2N+1: dc_j/dt = sum_{k<=N} (W_{j-k,k} - W_{j,k}).
  const std::size_t lo = 2 * N + 1;
  if (lo <= L) std::fill(dcdt.begin() + (lo - 1), dcdt.end(), 0.0);
  for (std::size_t k = 1; k <= N; ++k) {
    const double* f = flux_[k - 1].data();
    if (L >= k + lo) {
      const std::size_t hi = L - k;
      kern.add_diff(dcdt.data() + (lo - 1), f + (lo - k), f + lo, hi - lo + 1);
    }
    for (std::size_t j = std::max(lo, L - k + 1); j <= L; ++j)
      dcdt[j - 1] += f[j - k];
  }
}

std::vector<double> TruncatedSystem::rhs(std::span<const double> c) const {
  std::vector<double> out(L_);
  rhs(c, out);
  return out;
}

double net_flux(const CoefficientModel& model, const State& s, std::size_t j,
                std::size_t k) {
  if (j < 1 || k < 1) throw std::out_of_range("net_flux: sizes start at 1");
  if (j + k > s.L())
    throw std::out_of_range("net_flux: cluster " + std::to_string(j + k) +
                            " exceeds truncation L = " +
                            std::to_string(s.L()));
  const double a = model.coag_rate(j, k);
  if (a == 0.0) return 0.0;
  return a * s.c[j - 1] * s.c[k - 1] -
         model.frag_rate(j, k) * s.c[j + k - 1];
}

std::vector<double> rhs(const CoefficientModel& model, const State& s) {
  return TruncatedSystem(model, s.L()).rhs(s.c);
}

State truncate_initial(std::span<const double> c0, std::size_t n,
                       std::size_t L) {
  if (n > L)
    throw std::invalid_argument("truncation index n = " + std::to_string(n) +
                                " exceeds L = " + std::to_string(L));
  State s;
  s.c.assign(L, 0.0);
  const std::size_t m = std::min(n, c0.size());
  std::copy_n(c0.begin(), m, s.c.begin());
  return s;
}

}  // namespace bdk
