#ifndef ECONORDER_COUNTING_HPP
#define ECONORDER_COUNTING_HPP

#include <cmath>
#include <span>
#include <vector>

#include "econorder/types.hpp"

namespace econorder {

struct OrderValidation {
  std::int64_t firm_residual = 0;     // sum a_k - N
  std::optional<Money> revenue_residual;  // sum a_k eps_k - Pi, absent when unconstrained
  bool feasible = false;
};

/// Checks the firm-count and revenue constraints. Both are exact integer
/// comparisons because revenue is held in money quanta.
inline OrderValidation validate_order(const EconomicOrder& order, const RevenueGrid& grid,
                                      const EconomyConfig& config) {
  require_matches(order, grid);
  OrderValidation v;
  v.firm_residual = order.firms() - config.firms;
  if (config.revenue) v.revenue_residual = order.revenue(grid) - *config.revenue;
  v.feasible = v.firm_residual == 0 && (!v.revenue_residual || *v.revenue_residual == 0);
  return v;
}

/// Firm revenues t_j * Pi.
inline std::vector<Rational> shares_to_revenues(const ShareVector& shares, const Rational& total) {
  std::vector<Rational> out;
  out.reserve(shares.size());
  for (const auto& t : shares.shares()) out.push_back(t * total);
  return out;
}

inline BigInt binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

/// N! / prod a_k!
inline BigInt multinomial(std::span<const std::int64_t> counts) {
  BigInt r = 1;
  std::int64_t running = 0;
  for (auto a : counts) {
    running += a;
    r *= binomial(running, a);
  }
  return r;
}

/// Exact number of equilibrium outcomes realizing `order`.
///
/// Monopolistic (distinguishable firms): N!/prod(a_k!) * prod(g_k^a_k).
/// Perfect (indistinguishable firms): prod C(a_k + g_k - 1, a_k).
inline BigInt multiplicity(const EconomicOrder& order, const RevenueGrid& grid, Regime regime) {
  require_matches(order, grid);
  if (regime == Regime::monopolistic) {
    BigInt omega = multinomial(order.occupancy());
    for (std::size_t k = 0; k < grid.size(); ++k) omega *= boost::multiprecision::pow(BigInt(grid.degeneracy(k)), static_cast<unsigned>(order[k]));
    return omega;
  }
  BigInt omega = 1;
  for (std::size_t k = 0; k < grid.size(); ++k) omega *= binomial(order[k] + grid.degeneracy(k) - 1, order[k]);
  return omega;
}

/// ln of multiplicity() through log-gamma; usable when the integer is too big
/// to be worth materializing.
inline double log_multiplicity(const EconomicOrder& order, const RevenueGrid& grid, Regime regime) {
  require_matches(order, grid);
  long double s = 0.0L;
  if (regime == Regime::monopolistic) {
    s = std::lgamma(static_cast<long double>(order.firms()) + 1.0L);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto a = static_cast<long double>(order[k]);
      s -= std::lgamma(a + 1.0L);
      s += a * std::log(static_cast<long double>(grid.degeneracy(k)));
    }
  } else {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto a = static_cast<long double>(order[k]);
      const auto g = static_cast<long double>(grid.degeneracy(k));
      s += std::lgamma(a + g) - std::lgamma(a + 1.0L) - std::lgamma(g);
    }
  }
  return static_cast<double>(s);
}

namespace detail {
// x ln x with the continuous extension 0 ln 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
}  // namespace detail

/// Stirling-approximate entropy U[Omega] for a real-valued occupancy.
///
/// Perfect: sum (a+g-1)ln(a+g-1) - a ln a - (g-1)ln(g-1).
/// Monopolistic: ln N! + sum a ln g - sum a ln a + sum a, with ln N! kept
/// exact (log-gamma) and N = sum a.
inline double stirling_log_multiplicity(std::span<const double> occupancy, const RevenueGrid& grid, Regime regime) {
  require(occupancy.size() == grid.size(), ErrorKind::structural, "occupancy length does not match grid");
  for (double a : occupancy) require(a >= 0.0, ErrorKind::domain, "occupancy entries must be non-negative");
  double u = 0.0;
  if (regime == Regime::perfect) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double a = occupancy[k];
      const double g = static_cast<double>(grid.degeneracy(k));
      u += detail::xlogx(a + g - 1.0) - detail::xlogx(a) - detail::xlogx(g - 1.0);
    }
    return u;
  }
  double n = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double a = occupancy[k];
    n += a;
    u += a * std::log(static_cast<double>(grid.degeneracy(k))) - detail::xlogx(a) + a;
  }
  return std::lgamma(n + 1.0) + u;
}

inline double stirling_log_multiplicity(const EconomicOrder& order, const RevenueGrid& grid, Regime regime) {
  require_matches(order, grid);
  std::vector<double> occ(order.occupancy().begin(), order.occupancy().end());
  return stirling_log_multiplicity(std::span<const double>(occ), grid, regime);
}

}  // namespace econorder

#endif  // ECONORDER_COUNTING_HPP
