#ifndef ECONORDER_MACRO_HPP
#define ECONORDER_MACRO_HPP

#include <cmath>
#include <utility>

#include "econorder/maxent.hpp"

namespace econorder {

/// Neoclassical side of the bridge: marginal labor-capital return mu,
/// marginal technology return theta, positive scale lambda and technology T.
struct MacroParams {
  double mu = 0.0;
  double theta = 1.0;
  double lambda = 1.0;
  double technology = std::numeric_limits<double>::quiet_NaN();
};

struct Multipliers {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Aggregate revenue Pi = L^x K^y T^z.
inline double macro_production(double labor, double capital, double technology, double x, double y, double z) {
  require(labor > 0.0 && capital > 0.0 && technology > 0.0, ErrorKind::domain,
          "production inputs L, K, T must be positive");
  return std::pow(labor, x) * std::pow(capital, y) * std::pow(technology, z);
}

/// alpha = -mu / (lambda theta), beta = 1 / (lambda theta).
inline Multipliers multipliers_from_macro(const MacroParams& m) {
  require(m.lambda > 0.0, ErrorKind::domain, "lambda must be positive");
  require(m.theta != 0.0, ErrorKind::domain, "theta must be non-zero");
  const double scale = m.lambda * m.theta;
  return {-m.mu / scale, 1.0 / scale};
}

/// Inverse of multipliers_from_macro: theta = 1/(lambda beta), mu = -alpha/beta.
inline MacroParams macro_from_multipliers(double alpha, double beta, double lambda) {
  require(beta != 0.0, ErrorKind::domain, "beta must be non-zero to recover mu and theta");
  require(lambda > 0.0, ErrorKind::domain, "lambda must be positive");
  MacroParams m;
  m.lambda = lambda;
  m.theta = 1.0 / (lambda * beta);
  m.mu = -alpha / beta;
  return m;
}

/// a_k = g_k / (exp((eps_k - mu) / (lambda theta)) - I).
inline std::vector<double> occupancy_from_macro(const MacroParams& m, const RevenueGrid& grid, Regime regime) {
  require(m.lambda > 0.0, ErrorKind::domain, "lambda must be positive");
  require(m.theta != 0.0, ErrorKind::domain, "theta must be non-zero");
  const double scale = m.lambda * m.theta;
  std::vector<double> a(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = (grid.value(k) - m.mu) / scale;
    const auto g = static_cast<double>(grid.degeneracy(k));
    if (regime == Regime::perfect) {
      if (!(x > 0.0)) {
        fail(ErrorKind::singularity, "Bose-Einstein singularity at level " + std::to_string(k + 1) +
                                         ": revenue " + std::to_string(grid.value(k)) + " does not exceed mu = " +
                                         std::to_string(m.mu));
      }
      a[k] = g / std::expm1(x);
    } else {
      a[k] = g * std::exp(-x);
    }
  }
  return a;
}

namespace detail {
inline void require_in_domain(double alpha, double beta, const RevenueGrid& grid, Regime regime) {
  if (regime != Regime::perfect) return;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(alpha + beta * grid.value(k) > 0.0))
      fail(ErrorKind::singularity, "ln W undefined: alpha + beta*eps <= 0 at level " + std::to_string(k + 1));
  }
}
}  // namespace detail

/// ln W(alpha, beta).
///
/// Perfect: sum g_k ln(1 - exp(-alpha - beta eps_k)). Monopolistic: the
/// I -> 0 limit of (1 - I exp(-x))^(g/I), i.e. -sum g_k exp(-alpha - beta eps_k).
inline double log_W(double alpha, double beta, const RevenueGrid& grid, Regime regime) {
  detail::require_in_domain(alpha, beta, grid, regime);
  double s = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = alpha + beta * grid.value(k);
    const auto g = static_cast<double>(grid.degeneracy(k));
    s += regime == Regime::perfect ? g * std::log(-std::expm1(-x)) : -g * std::exp(-x);
  }
  return s;
}

struct Gradient {
  double d_alpha = 0.0;
  double d_beta = 0.0;
};

/// Analytic partials of ln W. In both regimes d/d alpha = sum a_k and
/// d/d beta = sum a_k eps_k, with a_k the occupancy at (alpha, beta).
inline Gradient log_W_gradient(double alpha, double beta, const RevenueGrid& grid, Regime regime) {
  detail::require_in_domain(alpha, beta, grid, regime);
  Gradient grad;
  const auto a = occupancy(alpha, beta, grid, regime);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grad.d_alpha += a[k];
    grad.d_beta += a[k] * grid.value(k);
  }
  return grad;
}

/// Central-difference partials of ln W; step sizes are relative to the
/// argument (alpha) and to 1/eps_n (beta).
inline Gradient log_W_gradient_fd(double alpha, double beta, const RevenueGrid& grid, Regime regime,
                                  double h = 1e-6) {
  const double ha = h * std::max(1.0, std::abs(alpha));
  const double hb = h * std::max(std::abs(beta), 1.0 / grid.value(grid.size() - 1));
  Gradient grad;
  grad.d_alpha = (log_W(alpha + ha, beta, grid, regime) - log_W(alpha - ha, beta, grid, regime)) / (2.0 * ha);
  grad.d_beta = (log_W(alpha, beta + hb, grid, regime) - log_W(alpha, beta - hb, grid, regime)) / (2.0 * hb);
  return grad;
}

struct IdentityReport {
  double entropy = 0.0;   // Stirling U[Omega] of occupancy(alpha, beta)
  double legendre = 0.0;  // ln W - alpha dlnW/dalpha - beta dlnW/dbeta
  double residual_plus = 0.0;   // entropy - legendre
  double residual_minus = 0.0;  // entropy + legendre
  int best_sign = 1;
  double residual = 0.0;           // the smaller of the two in magnitude
  double relative_residual = 0.0;  // |residual| / |entropy|
  double derivative_mismatch = 0.0;  // max relative gap analytic vs finite difference
};

/// Compares the Stirling entropy of the most probable occupancy against
/// s * (ln W - alpha dlnW/dalpha - beta dlnW/dbeta) for s = +1 and s = -1,
/// reporting the sign that fits better.
inline IdentityReport entropy_identity_residual(double alpha, double beta, const RevenueGrid& grid, Regime regime) {
  IdentityReport r;
  const auto a = occupancy(alpha, beta, grid, regime);
  r.entropy = stirling_log_multiplicity(a, grid, regime);
  const Gradient g = log_W_gradient(alpha, beta, grid, regime);
  const Gradient fd = log_W_gradient_fd(alpha, beta, grid, regime);
  auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(x), 1e-300); };
  r.derivative_mismatch = std::max(rel(g.d_alpha, fd.d_alpha), rel(g.d_beta, fd.d_beta));
  r.legendre = log_W(alpha, beta, grid, regime) - alpha * g.d_alpha - beta * g.d_beta;
  r.residual_plus = r.entropy - r.legendre;
  r.residual_minus = r.entropy + r.legendre;
  if (std::abs(r.residual_minus) < std::abs(r.residual_plus)) {
    r.best_sign = -1;
    r.residual = r.residual_minus;
  } else {
    r.best_sign = 1;
    r.residual = r.residual_plus;
  }
  r.relative_residual = std::abs(r.residual) / std::max(std::abs(r.entropy), 1e-300);
  return r;
}

/// Technology level T = lambda ln Omega.
inline double technology(double log_omega, double lambda) {
  require(lambda > 0.0, ErrorKind::domain, "lambda must be positive");
  return lambda * log_omega;
}

}  // namespace econorder

#endif  // ECONORDER_MACRO_HPP
