#ifndef ECONORDER_MAXENT_HPP
#define ECONORDER_MAXENT_HPP

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "econorder/counting.hpp"

namespace econorder {

/// Most probable occupancy for multipliers (alpha, beta):
/// a_k = g_k / (exp(alpha + beta * eps_k) - I).
///
/// For the perfect regime every exponent alpha + beta * eps_k must be
/// positive; otherwise the level sits on the singularity.
inline std::vector<double> occupancy(double alpha, double beta, const RevenueGrid& grid, Regime regime) {
  std::vector<double> a(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = alpha + beta * grid.value(k);
    const auto g = static_cast<double>(grid.degeneracy(k));
    if (regime == Regime::perfect) {
      if (!(x > 0.0)) {
        fail(ErrorKind::singularity, "Bose-Einstein singularity at level " + std::to_string(k + 1) +
                                         ": alpha + beta*eps = " + std::to_string(x) + " <= 0");
      }
      a[k] = g / std::expm1(x);
    } else {
      a[k] = g * std::exp(-x);
    }
  }
  return a;
}

struct SolverOptions {
  double tolerance = 1e-10;  // relative, on both constraints
  int max_newton_iterations = 100;
  int max_bisection_iterations = 400;
  bool use_newton = true;  // false: go straight to nested bisection
};

enum class SolveMethod { newton, bisection, degenerate };

inline std::string to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::newton: return "newton";
    case SolveMethod::bisection: return "bisection";
    case SolveMethod::degenerate: return "degenerate";
  }
  return "unknown";
}

/// Solved multipliers with the occupancy they produce.
///
/// On a boundary economy (Pi/N equal to the lowest or highest level) every
/// firm sits on one level and the multipliers diverge; they are reported as
/// NaN with `boundary` set.
struct MultiplierSolution {
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> occupancy;
  double residual_firms = 0.0;    // sum a_k - N
  double residual_revenue = 0.0;  // sum a_k eps_k - Pi, money units
  int iterations = 0;
  bool converged = false;
  bool boundary = false;
  bool at_domain_wall = false;  // perfect regime pinned against alpha + beta*eps_1 = 0
  SolveMethod method = SolveMethod::newton;
};

namespace detail {

// Problem in normalized coordinates x_k = (eps_k - eps_1) / span in [0, 1].
// Exponents are u + v x_k, so alpha = u - v eps_1 / span and beta = v / span.
struct Normalized {
  std::vector<double> x;
  std::vector<double> g;  // degeneracy / N
  double target_mean = 0.0;
  double eps1 = 0.0;
  double span = 1.0;
  int indicator = 0;
};

inline Normalized normalize(const RevenueGrid& grid, const EconomyConfig& config) {
  Normalized p;
  const std::size_t n = grid.size();
  p.eps1 = grid.value(0);
  p.span = grid.value(n - 1) - p.eps1;
  p.indicator = indicator(config.regime);
  const auto firms = static_cast<double>(config.firms);
  for (std::size_t k = 0; k < n; ++k) {
    p.x.push_back(static_cast<double>(grid.level(k) - grid.level(0)) /
                  static_cast<double>(grid.level(n - 1) - grid.level(0)));
    p.g.push_back(static_cast<double>(grid.degeneracy(k)) / firms);
  }
  const Money excess = *config.revenue - config.firms * grid.level(0);
  p.target_mean = static_cast<double>(excess) /
                  (static_cast<double>(config.firms) * static_cast<double>(grid.level(n - 1) - grid.level(0)));
  return p;
}

inline bool in_domain(const Normalized& p, double u, double v) {
  return p.indicator == 0 || (u > 0.0 && u + v > 0.0);
}

// Per-firm occupancy a_k / N.
inline double share(const Normalized& p, std::size_t k, double u, double v) {
  const double z = u + v * p.x[k];
  return p.indicator == 1 ? p.g[k] / std::expm1(z) : p.g[k] * std::exp(-z);
}

inline MultiplierSolution finish(const RevenueGrid& grid, const EconomyConfig& config, const Normalized& p,
                                 double u, double v, int iterations, SolveMethod method, double tol) {
  MultiplierSolution sol;
  sol.alpha = u - v * p.eps1 / p.span;
  sol.beta = v / p.span;
  sol.iterations = iterations;
  sol.method = method;
  const auto firms = static_cast<double>(config.firms);
  const double pi = static_cast<double>(*config.revenue) * grid.quantum();
  double count = 0.0;
  double revenue = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double a = firms * share(p, k, u, v);
    sol.occupancy.push_back(a);
    count += a;
    revenue += a * grid.value(k);
  }
  sol.residual_firms = count - firms;
  sol.residual_revenue = revenue - pi;
  sol.converged = std::isfinite(count) && std::abs(sol.residual_firms) <= tol * firms &&
                  std::abs(sol.residual_revenue) <= tol * pi;
  sol.at_domain_wall = p.indicator == 1 && std::min(u, u + v) <= 1e-12;
  return sol;
}

struct Moments {
  double s = 0, m = 0, sd = 0, sdx = 0, sdxx = 0;
};

inline Moments moments(const Normalized& p, double u, double v) {
  Moments mo;
  for (std::size_t k = 0; k < p.x.size(); ++k) {
    const double a = share(p, k, u, v);
    const double d = -a * (1.0 + p.indicator * a / p.g[k]);  // d a / d u
    mo.s += a;
    mo.m += a * p.x[k];
    mo.sd += d;
    mo.sdx += d * p.x[k];
    mo.sdxx += d * p.x[k] * p.x[k];
  }
  return mo;
}

inline std::array<double, 2> residual(const Normalized& p, const Moments& mo) {
  return {std::log(mo.s), mo.m / mo.s - p.target_mean};
}

// Firm-count equation solved for u at fixed v (u decreases sum a_k).
inline long double inner_u(const Normalized& p, long double v, int max_iter) {
  const std::size_t n = p.x.size();
  if (p.indicator == 0) {
    long double zmax = -std::numeric_limits<long double>::infinity();
    for (std::size_t k = 0; k < n; ++k) zmax = std::max(zmax, std::log(static_cast<long double>(p.g[k])) - v * p.x[k]);
    long double acc = 0.0L;
    for (std::size_t k = 0; k < n; ++k) acc += std::exp(std::log(static_cast<long double>(p.g[k])) - v * p.x[k] - zmax);
    return zmax + std::log(acc);
  }
  const long double wall = std::max(0.0L, -v);
  auto count = [&](long double t) {
    long double s = 0.0L;
    for (std::size_t k = 0; k < n; ++k) s += p.g[k] / std::expm1(wall + t + v * p.x[k]);
    return s;
  };
  long double hi = 1.0L;
  while (count(hi) > 1.0L) hi *= 2.0L;
  long double lo = 0.0L;
  for (int i = 0; i < max_iter; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (mid == lo || mid == hi) break;
    (count(mid) > 1.0L ? lo : hi) = mid;
  }
  return wall + 0.5L * (lo + hi);
}

inline long double mean_at(const Normalized& p, long double v, int max_iter) {
  const long double u = inner_u(p, v, max_iter);
  long double s = 0.0L;
  long double m = 0.0L;
  for (std::size_t k = 0; k < p.x.size(); ++k) {
    const long double z = u + v * p.x[k];
    const long double a = p.indicator == 1 ? p.g[k] / std::expm1(z) : p.g[k] * std::exp(-z);
    s += a;
    m += a * p.x[k];
  }
  return m / s;
}

// Handles the economies with no interior solution. Returns true when `out`
// was filled.
inline bool solve_degenerate(const RevenueGrid& grid, const EconomyConfig& config, MultiplierSolution& out) {
  require(config.revenue.has_value(), ErrorKind::domain, "solving the multipliers needs a total revenue Pi");
  const Money pi = *config.revenue;
  const std::size_t n = grid.size();
  const Money lo = config.firms * grid.level(0);
  const Money hi = config.firms * grid.level(n - 1);
  if (pi < lo || pi > hi) {
    fail(ErrorKind::infeasible, "infeasible economy: Pi/N lies outside [eps_1, eps_n]");
  }
  if (pi != lo && pi != hi) return false;
  out = MultiplierSolution{};
  out.occupancy.assign(n, 0.0);
  out.occupancy[pi == lo ? 0 : n - 1] = static_cast<double>(config.firms);
  out.converged = true;
  out.boundary = true;
  out.method = SolveMethod::degenerate;
  out.at_domain_wall = config.regime == Regime::perfect && pi == lo;
  return true;
}

}  // namespace detail

/// Nested bisection: outer on v through the monotone mean revenue, inner on
/// u through the monotone firm count. Slow but bracketed; used as fallback
/// and as the reference solution.
inline MultiplierSolution solve_multipliers_bisection(const RevenueGrid& grid, const EconomyConfig& config,
                                                      const SolverOptions& options = {}) {
  MultiplierSolution degenerate;
  if (detail::solve_degenerate(grid, config, degenerate)) return degenerate;
  const detail::Normalized p = detail::normalize(grid, config);
  const int iters = options.max_bisection_iterations;
  const long double target = p.target_mean;
  long double lo = -1.0L;
  long double hi = 1.0L;
  // mean_at decreases in v.
  while (detail::mean_at(p, lo, iters) < target) lo *= 2.0L;
  while (detail::mean_at(p, hi, iters) > target) hi *= 2.0L;
  int it = 0;
  for (; it < iters; ++it) {
    const long double mid = 0.5L * (lo + hi);
    if (mid == lo || mid == hi) break;
    (detail::mean_at(p, mid, iters) > target ? lo : hi) = mid;
  }
  const long double v = 0.5L * (lo + hi);
  const long double u = detail::inner_u(p, v, iters);
  return detail::finish(grid, config, p, static_cast<double>(u), static_cast<double>(v), it, SolveMethod::bisection,
                        options.tolerance);
}

/// Solves the two constraints for (alpha, beta) by damped Newton with the
/// analytic Jacobian, falling back to nested bisection if Newton stalls.
inline MultiplierSolution solve_multipliers(const RevenueGrid& grid, const EconomyConfig& config,
                                            const SolverOptions& options = {}) {
  MultiplierSolution degenerate;
  if (detail::solve_degenerate(grid, config, degenerate)) return degenerate;
  if (!options.use_newton) return solve_multipliers_bisection(grid, config, options);

  const detail::Normalized p = detail::normalize(grid, config);
  double u = 0.0;
  double v = 0.0;
  if (p.indicator == 0) {
    double g_total = 0.0;
    for (double g : p.g) g_total += g;
    u = std::log(g_total);
  } else {
    u = 0.1;  // lowest-level gap at a tenth of the (unit) grid span
  }

  auto merit = [&](const std::array<double, 2>& f) { return f[0] * f[0] + f[1] * f[1]; };
  detail::Moments mo = detail::moments(p, u, v);
  std::array<double, 2> f = detail::residual(p, mo);
  int it = 0;
  bool stalled = false;
  for (; it < options.max_newton_iterations; ++it) {
    const double j11 = mo.sd / mo.s;
    const double j12 = mo.sdx / mo.s;
    const double j21 = mo.sdx / mo.s - mo.m * mo.sd / (mo.s * mo.s);
    const double j22 = mo.sdxx / mo.s - mo.m * mo.sdx / (mo.s * mo.s);
    const double det = j11 * j22 - j12 * j21;
    if (!std::isfinite(det) || det == 0.0) {
      stalled = true;
      break;
    }
    const double du = -(j22 * f[0] - j12 * f[1]) / det;
    const double dv = -(-j21 * f[0] + j11 * f[1]) / det;
    if (std::abs(du) <= 1e-15 * (1.0 + std::abs(u)) && std::abs(dv) <= 1e-15 * (1.0 + std::abs(v))) break;

    const double m0 = merit(f);
    double t = 1.0;
    bool accepted = false;
    for (; t > 1e-12; t *= 0.5) {
      const double un = u + t * du;
      const double vn = v + t * dv;
      if (!detail::in_domain(p, un, vn)) continue;
      const detail::Moments mn = detail::moments(p, un, vn);
      const auto fn = detail::residual(p, mn);
      if (!std::isfinite(fn[0]) || !std::isfinite(fn[1])) continue;
      if (merit(fn) < m0 || (t == 1.0 && merit(fn) <= m0)) {
        u = un;
        v = vn;
        mo = mn;
        f = fn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No decrease at machine precision means we are already at the root.
      stalled = merit(f) > 1e-24;
      break;
    }
  }
  MultiplierSolution sol = detail::finish(grid, config, p, u, v, it, SolveMethod::newton, options.tolerance);
  if (sol.converged && !stalled) return sol;
  MultiplierSolution fallback = solve_multipliers_bisection(grid, config, options);
  fallback.iterations += it;
  if (!fallback.converged && !sol.converged && sol.at_domain_wall) return sol;
  return fallback;
}

struct CondensationThresholds {
  double ground_fraction = 0.5;
  double gap = 1e-6;
};

struct CondensationReport {
  bool condensed = false;
  double ground_fraction = 0.0;  // a_1 / N
  double gap = std::numeric_limits<double>::quiet_NaN();  // alpha + beta * eps_1
  CondensationThresholds thresholds;
  std::string trigger = "none";  // which threshold fired
};

/// Flags Bose-Einstein condensation: too many firms on the lowest level, or
/// the lowest level's exponent close to the singularity. The monopolistic
/// regime has no singularity and never condenses.
inline CondensationReport detect_condensation(const MultiplierSolution& sol, const RevenueGrid& grid,
                                              const EconomyConfig& config,
                                              const CondensationThresholds& thresholds = {}) {
  require(sol.occupancy.size() == grid.size(), ErrorKind::structural, "solution does not match grid");
  CondensationReport r;
  r.thresholds = thresholds;
  r.ground_fraction = sol.occupancy[0] / static_cast<double>(config.firms);
  if (!sol.boundary) r.gap = sol.alpha + sol.beta * grid.value(0);
  if (config.regime == Regime::monopolistic) return r;
  if (r.ground_fraction >= thresholds.ground_fraction) {
    r.condensed = true;
    r.trigger = "ground_fraction";
  } else if (sol.at_domain_wall || (!std::isnan(r.gap) && r.gap <= thresholds.gap)) {
    r.condensed = true;
    r.trigger = "gap";
  }
  return r;
}

/// Stirling entropy of a (possibly real-valued) occupancy.
inline double entropy_of(std::span<const double> occupancy, const RevenueGrid& grid, Regime regime) {
  return stirling_log_multiplicity(occupancy, grid, regime);
}

inline double entropy_of(const EconomicOrder& order, const RevenueGrid& grid, Regime regime) {
  return stirling_log_multiplicity(order, grid, regime);
}

}  // namespace econorder

#endif  // ECONORDER_MAXENT_HPP
