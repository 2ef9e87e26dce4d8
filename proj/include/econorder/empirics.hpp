#ifndef ECONORDER_EMPIRICS_HPP
#define ECONORDER_EMPIRICS_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "econorder/error.hpp"

namespace econorder {

/// Observed revenues or incomes, in money units.
struct SampleSet {
  std::vector<double> values;
  std::string source;
};

enum class SampleFormat {
  automatic,  // two columns if the first data row has a comma
  values,     // one value per line
  counts,     // value,count per line
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Reads samples from CSV text. Blank lines and lines starting with '#' are
/// skipped, as is a non-numeric header on the first data line.
inline SampleSet parse_samples(std::istream& in, SampleFormat format = SampleFormat::automatic,
                               std::string source = "<stream>") {
  SampleSet set;
  set.source = std::move(source);
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string row = detail::trim(line);
    if (row.empty() || row[0] == '#') continue;
    const auto comma = row.find(',');
    if (format == SampleFormat::automatic) format = comma == std::string::npos ? SampleFormat::values : SampleFormat::counts;
    const std::string where = set.source + ":" + std::to_string(lineno);
    std::optional<double> value;
    double count = 1.0;
    if (format == SampleFormat::values) {
      value = detail::parse_number(row);
    } else {
      if (comma == std::string::npos) fail(ErrorKind::parse, where + ": expected 'value,count'");
      value = detail::parse_number(detail::trim(row.substr(0, comma)));
      const auto c = detail::parse_number(detail::trim(row.substr(comma + 1)));
      if (value && (!c || *c < 1.0 || *c != std::floor(*c)))
        fail(ErrorKind::parse, where + ": count must be a positive integer");
      if (c) count = *c;
    }
    if (!value) {
      if (!seen_data) {
        seen_data = true;  // header row
        continue;
      }
      fail(ErrorKind::parse, where + ": malformed row '" + row + "'");
    }
    seen_data = true;
    if (*value < 0.0) fail(ErrorKind::parse, where + ": negative value " + row + " rejected");
    set.values.insert(set.values.end(), static_cast<std::size_t>(count), *value);
  }
  if (set.values.empty()) fail(ErrorKind::parse, set.source + ": no samples");
  return set;
}

inline SampleSet load_samples(const std::string& path, SampleFormat format = SampleFormat::automatic) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot open sample file '" + path + "'");
  return parse_samples(in, format, path);
}

enum class FitModel { boltzmann, bose_einstein };

inline std::string to_string(FitModel m) { return m == FitModel::boltzmann ? "boltzmann" : "bose_einstein"; }

/// Fitted revenue law. `temperature` is lambda*theta for both models.
///
/// Boltzmann fits keep the retained body's truncation point in `cutoff`;
/// Bose-Einstein fits keep the histogram they were fitted to.
struct FitResult {
  FitModel model = FitModel::boltzmann;
  double mu = 0.0;
  double temperature = 0.0;
  double scale = 1.0;  // Bose-Einstein amplitude c
  double ks_statistic = 1.0;
  std::optional<double> log_likelihood;
  std::size_t n_used = 0;
  double tail_truncated_fraction = 0.0;
  double cutoff = std::numeric_limits<double>::infinity();
  bool converged = true;
  std::string note;
  std::vector<double> bin_edges;
  std::vector<double> observed;
  std::vector<double> fitted;
};

/// One-sample Kolmogorov-Smirnov statistic of sorted data against a CDF.
template <class Cdf>
double ks_statistic(std::span<const double> sorted, Cdf&& cdf) {
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Critical value of the KS statistic at significance 0.01: exact quantiles
/// for n <= 40, the asymptotic sqrt(-ln(0.005)/2 / n) beyond.
inline double ks_critical_value_01(std::size_t n) {
  static constexpr std::array<double, 40> table = {
      0.995,   0.92929, 0.829,   0.73424, 0.66853, 0.61661, 0.57581, 0.54179, 0.51332, 0.48893,
      0.4677,  0.44905, 0.43247, 0.41762, 0.4042,  0.39201, 0.38086, 0.37062, 0.36117, 0.35241,
      0.34426, 0.33666, 0.32954, 0.32286, 0.31657, 0.31063, 0.30502, 0.29971, 0.29466, 0.28986,
      0.28529, 0.28094, 0.27677, 0.27279, 0.26897, 0.26532, 0.2618,  0.25843, 0.25518, 0.25205};
  require(n >= 1, ErrorKind::domain, "KS critical value needs n >= 1");
  if (n <= table.size()) return table[n - 1];
  return std::sqrt(-0.5 * std::log(0.005) / static_cast<double>(n));
}

namespace detail {

inline std::vector<double> sorted_copy(const SampleSet& s) {
  std::vector<double> v = s.values;
  std::sort(v.begin(), v.end());
  return v;
}

// Exponential with location mu and scale t, right-truncated at cutoff.
inline double truncated_exp_cdf(double x, double mu, double t, double cutoff) {
  if (x <= mu) return 0.0;
  if (x >= cutoff) return 1.0;
  const double num = -std::expm1(-(x - mu) / t);
  const double den = std::isinf(cutoff) ? 1.0 : -std::expm1(-(cutoff - mu) / t);
  return num / den;
}

// Piecewise-linear CDF of a histogram with bin masses proportional to `weights`.
inline double histogram_cdf(double x, std::span<const double> edges, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (x <= edges.front()) return 0.0;
  if (x >= edges.back()) return 1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (x < edges[i + 1]) return (acc + weights[i] * (x - edges[i]) / (edges[i + 1] - edges[i])) / total;
    acc += weights[i];
  }
  return 1.0;
}

inline std::vector<double> be_shape(std::span<const double> centers, double mu, double t) {
  std::vector<double> f(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) f[i] = 1.0 / std::expm1((centers[i] - mu) / t);
  return f;
}

}  // namespace detail

/// Maximum-likelihood exponential fit of the sample body.
///
/// The top `tail_quantile` of the sample is cut away (a Pareto tail the
/// exponential body does not describe). Location is the sample minimum; the
/// temperature maximizes the right-truncated exponential likelihood of the
/// retained values, which reduces to their mean excess when nothing is cut.
inline FitResult fit_boltzmann(const SampleSet& samples, double tail_quantile = 0.03) {
  require(tail_quantile >= 0.0 && tail_quantile <= 0.2, ErrorKind::domain, "tail_quantile must lie in [0, 0.2]");
  const std::vector<double> v = detail::sorted_copy(samples);
  require(!v.empty(), ErrorKind::domain, "no samples");
  if (v.front() == v.back()) fail(ErrorKind::domain, "zero temperature: all samples are equal");
  const std::size_t n = v.size();
  const auto dropped = static_cast<std::size_t>(std::floor(tail_quantile * static_cast<double>(n)));
  const std::size_t keep = n - dropped;
  require(keep >= 10, ErrorKind::domain, "Boltzmann fit needs at least 10 samples after truncation");

  FitResult fit;
  fit.model = FitModel::boltzmann;
  fit.n_used = keep;
  fit.tail_truncated_fraction = static_cast<double>(dropped) / static_cast<double>(n);
  fit.mu = v.front();
  fit.cutoff = dropped > 0 ? v[keep] : std::numeric_limits<double>::infinity();

  double mean_excess = 0.0;
  for (std::size_t i = 0; i < keep; ++i) mean_excess += v[i] - fit.mu;
  mean_excess /= static_cast<double>(keep);
  if (mean_excess <= 0.0) fail(ErrorKind::domain, "zero temperature: retained samples are all equal");

  if (std::isinf(fit.cutoff)) {
    fit.temperature = mean_excess;
  } else {
    // Mean excess of the truncated law, increasing in t from 0 to width/2.
    const double width = fit.cutoff - fit.mu;
    auto truncated_mean = [&](double t) { return t - width / std::expm1(width / t); };
    if (mean_excess >= 0.5 * width)
      fail(ErrorKind::nonconvergence, "no finite maximum-likelihood temperature: body is flatter than exponential");
    double lo = 0.0;
    double hi = mean_excess;
    while (truncated_mean(hi) < mean_excess) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (truncated_mean(mid) < mean_excess ? lo : hi) = mid;
    }
    fit.temperature = 0.5 * (lo + hi);
  }

  const double t = fit.temperature;
  const double log_norm = std::isinf(fit.cutoff) ? 0.0 : std::log(-std::expm1(-(fit.cutoff - fit.mu) / t));
  double ll = 0.0;
  for (std::size_t i = 0; i < keep; ++i) ll += -std::log(t) - (v[i] - fit.mu) / t - log_norm;
  fit.log_likelihood = ll;
  fit.ks_statistic = ks_statistic(std::span<const double>(v.data(), keep), [&](double x) {
    return detail::truncated_exp_cdf(x, fit.mu, t, fit.cutoff);
  });
  return fit;
}

/// Least-squares fit of histogram counts to c / (exp((eps - mu)/t) - 1) with
/// mu below the first bin center.
///
/// The search runs over log(center_0 - mu) and log(t); a coarse grid picks
/// the basin, nested Brent minimization refines it. If the best point lies
/// on the search boundary there is no interior minimum: the result carries
/// converged = false and the boundary parameters.
inline FitResult fit_bose_einstein(const SampleSet& samples, int bins = 50) {
  require(samples.values.size() >= 100, ErrorKind::domain, "Bose-Einstein fit needs at least 100 samples");
  require(bins >= 5, ErrorKind::domain, "Bose-Einstein fit needs at least 5 bins");
  const std::vector<double> v = detail::sorted_copy(samples);
  const double lo = v.front();
  const double hi = v.back();
  if (lo == hi) fail(ErrorKind::domain, "zero temperature: all samples are equal");

  FitResult fit;
  fit.model = FitModel::bose_einstein;
  fit.n_used = v.size();
  const auto nb = static_cast<std::size_t>(bins);
  const double width = (hi - lo) / static_cast<double>(bins);
  fit.bin_edges.resize(nb + 1);
  for (std::size_t i = 0; i <= nb; ++i) fit.bin_edges[i] = lo + width * static_cast<double>(i);
  fit.bin_edges.back() = hi;
  fit.observed.assign(nb, 0.0);
  for (double x : v) {
    auto i = static_cast<std::size_t>((x - lo) / width);
    fit.observed[std::min(i, nb - 1)] += 1.0;
  }
  std::vector<double> centers(nb);
  for (std::size_t i = 0; i < nb; ++i) centers[i] = lo + width * (static_cast<double>(i) + 0.5);

  const double span = hi - lo;
  const double p_min = std::log(1e-4 * width);
  const double p_max = std::log(100.0 * span);
  const double q_min = std::log(1e-3 * width);
  const double q_max = std::log(100.0 * span);

  // Sum of squared residuals with the amplitude profiled out.
  auto sse = [&](double p, double q) {
    const auto f = detail::be_shape(centers, centers[0] - std::exp(p), std::exp(q));
    double fy = 0.0;
    double ff = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      fy += f[i] * fit.observed[i];
      ff += f[i] * f[i];
    }
    if (!(ff > 0.0) || !std::isfinite(ff)) return std::numeric_limits<double>::infinity();
    const double c = fy / ff;
    double s = 0.0;
    for (std::size_t i = 0; i < nb; ++i) s += (fit.observed[i] - c * f[i]) * (fit.observed[i] - c * f[i]);
    return s;
  };

  constexpr int grid = 60;
  const double dp = (p_max - p_min) / grid;
  const double dq = (q_max - q_min) / grid;
  double best = std::numeric_limits<double>::infinity();
  double bp = p_min;
  double bq = q_min;
  for (int i = 0; i <= grid; ++i) {
    for (int j = 0; j <= grid; ++j) {
      const double p = p_min + dp * i;
      const double q = q_min + dq * j;
      const double s = sse(p, q);
      if (s < best) {
        best = s;
        bp = p;
        bq = q;
      }
    }
  }
  const double pa = std::max(p_min, bp - dp);
  const double pb = std::min(p_max, bp + dp);
  const double qa = std::max(q_min, bq - dq);
  const double qb = std::min(q_max, bq + dq);
  constexpr int bits = 40;
  auto profile_p = [&](double q) {
    return boost::math::tools::brent_find_minima([&](double p) { return sse(p, q); }, pa, pb, bits);
  };
  const auto q_opt = boost::math::tools::brent_find_minima([&](double q) { return profile_p(q).second; }, qa, qb, bits);
  const double q = q_opt.first;
  const double p = profile_p(q).first;

  fit.mu = centers[0] - std::exp(p);
  fit.temperature = std::exp(q);
  const auto f = detail::be_shape(centers, fit.mu, fit.temperature);
  double fy = 0.0;
  double ff = 0.0;
  for (std::size_t i = 0; i < nb; ++i) {
    fy += f[i] * fit.observed[i];
    ff += f[i] * f[i];
  }
  fit.scale = fy / ff;
  fit.fitted.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) fit.fitted[i] = fit.scale * f[i];

  const double edge_tol = 1e-3 * dp;
  if (p >= p_max - edge_tol || p <= p_min + edge_tol || q >= q_max - 1e-3 * dq || q <= q_min + 1e-3 * dq) {
    fit.converged = false;
    fit.note = "no interior minimum: parameters pinned at the search boundary";
  }
  fit.ks_statistic = ks_statistic(std::span<const double>(v), [&](double x) {
    return detail::histogram_cdf(x, fit.bin_edges, fit.fitted);
  });
  return fit;
}

struct GoodnessOfFit {
  double statistic = 0.0;
  double critical = 0.0;
  std::size_t n = 0;
  bool pass = false;
};

/// One-sample KS test of the samples the fit used against the fitted law,
/// at significance 0.01.
inline GoodnessOfFit goodness_of_fit(const SampleSet& samples, const FitResult& fit) {
  const std::vector<double> v = detail::sorted_copy(samples);
  GoodnessOfFit g;
  if (fit.model == FitModel::boltzmann) {
    const std::size_t keep = std::min(fit.n_used, v.size());
    g.statistic = ks_statistic(std::span<const double>(v.data(), keep), [&](double x) {
      return detail::truncated_exp_cdf(x, fit.mu, fit.temperature, fit.cutoff);
    });
    g.n = keep;
  } else {
    g.statistic = ks_statistic(std::span<const double>(v), [&](double x) {
      return detail::histogram_cdf(x, fit.bin_edges, fit.fitted);
    });
    g.n = v.size();
  }
  g.critical = ks_critical_value_01(g.n);
  g.pass = g.statistic < g.critical;
  return g;
}

/// Exponential draws with location mu and temperature t.
inline SampleSet synthetic_exponential(std::size_t n, double t, double mu, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> dist(1.0 / t);
  SampleSet s;
  s.source = "synthetic-exponential";
  s.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.values.push_back(mu + dist(rng));
  return s;
}

/// Draws levels with probability proportional to `weights`, then spreads
/// each draw uniformly over [level - jitter/2, level + jitter/2).
inline SampleSet synthetic_from_weights(std::span<const double> levels, std::span<const double> weights,
                                        std::size_t n, std::uint64_t seed, double jitter = 1.0) {
  require(levels.size() == weights.size(), ErrorKind::structural, "levels and weights differ in length");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::uniform_real_distribution<double> spread(-0.5 * jitter, 0.5 * jitter);
  SampleSet s;
  s.source = "synthetic-weights";
  s.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.values.push_back(std::max(0.0, levels[pick(rng)] + spread(rng)));
  return s;
}

}  // namespace econorder

#endif  // ECONORDER_EMPIRICS_HPP
