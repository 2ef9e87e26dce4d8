#ifndef ECONORDER_SAMPLER_HPP
#define ECONORDER_SAMPLER_HPP

#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "econorder/enumerate.hpp"

namespace econorder {

enum class SamplingMethod {
  automatic,  // exact when the outcome space fits under the cap, chain otherwise
  exact,
  chain,
};

struct SamplerOptions {
  std::uint64_t seed = 1;
  std::uint64_t burn_in = 1000;
  std::uint64_t thinning = 10;
  std::uint64_t cap = kDefaultOutcomeCap;
  SamplingMethod method = SamplingMethod::automatic;
};

/// Finds one feasible order by depth-first search, stopping at the first hit.
inline std::optional<EconomicOrder> find_feasible_order(const RevenueGrid& grid, const EconomyConfig& config) {
  const std::size_t n = grid.size();
  std::vector<std::int64_t> occ(n, 0);
  std::function<bool(std::size_t, std::int64_t, Money)> dfs = [&](std::size_t k, std::int64_t left, Money rev) {
    if (k + 1 == n) {
      if (config.revenue && left * grid.level(k) != rev) return false;
      occ[k] = left;
      return true;
    }
    for (std::int64_t c = left; c >= 0; --c) {
      const std::int64_t rest = left - c;
      Money r = 0;
      if (config.revenue) {
        r = rev - c * grid.level(k);
        if (r > rest * grid.level(n - 1)) continue;
        if (r < rest * grid.level(k + 1)) break;
      }
      occ[k] = c;
      if (dfs(k + 1, rest, r)) return true;
    }
    occ[k] = 0;
    return false;
  };
  if (config.revenue) {
    const Money pi = *config.revenue;
    if (pi < config.firms * grid.level(0) || pi > config.firms * grid.level(n - 1)) return std::nullopt;
  }
  if (!dfs(0, config.firms, config.revenue.value_or(0))) return std::nullopt;
  return EconomicOrder(occ);
}

/// Stream of equilibrium outcomes drawn uniformly at random.
///
/// When the feasible outcome space is at most `cap`, each draw is an index
/// chosen uniformly in [0, total) and decoded into its outcome, so draws are
/// exactly uniform and independent. Otherwise a Metropolis-Hastings chain
/// with revenue-conserving pair moves and in-level slot moves is run; its
/// stationary distribution is uniform over outcomes reachable from the start.
class OutcomeSampler {
 public:
  OutcomeSampler(RevenueGrid grid, EconomyConfig config, SamplerOptions options = {})
      : grid_(std::move(grid)), config_(config), options_(options), rng_(options.seed) {
    require(options_.thinning >= 1, ErrorKind::domain, "thinning must be >= 1");
    bool use_exact = options_.method == SamplingMethod::exact;
    if (options_.method == SamplingMethod::automatic) use_exact = total_outcomes(grid_, config_) <= options_.cap;
    if (use_exact) {
      init_exact();
    } else {
      init_chain();
    }
  }

  bool exact() const { return exact_; }

  /// Fraction of accepted chain proposals so far (1 for the exact path).
  double acceptance_rate() const {
    return proposals_ == 0 ? 1.0 : static_cast<double>(accepted_) / static_cast<double>(proposals_);
  }

  MicroOutcome next() {
    if (exact_) return draw_exact();
    if (!burned_in_) {
      for (std::uint64_t i = 0; i < options_.burn_in; ++i) step();
      burned_in_ = true;
    }
    for (std::uint64_t i = 0; i < options_.thinning; ++i) step();
    return current();
  }

 private:
  // ---- exact path -------------------------------------------------------
  void init_exact() {
    const OrderCatalog cat = catalog(grid_, config_);
    require(cat.total_outcomes <= options_.cap, ErrorKind::cap_exceeded,
            "exact sampling needs at most " + std::to_string(options_.cap) + " outcomes, economy has " +
                cat.total_outcomes.str());
    exact_ = true;
    // Ascending occupancy keeps the index layout independent of Omega ties.
    std::vector<CatalogEntry> entries = cat.entries;
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.order < b.order; });
    std::uint64_t running = 0;
    for (const auto& e : entries) {
      running += e.multiplicity.convert_to<std::uint64_t>();
      orders_.push_back(e.order);
      cumulative_.push_back(running);
    }
    total_ = running;
  }

  MicroOutcome draw_exact() {
    std::uniform_int_distribution<std::uint64_t> pick(0, total_ - 1);
    std::uint64_t r = pick(rng_);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    if (idx > 0) r -= cumulative_[idx - 1];
    return unrank(orders_[idx], r);
  }

  MicroOutcome unrank(const EconomicOrder& order, std::uint64_t r) const {
    const std::size_t n = grid_.size();
    if (config_.regime == Regime::monopolistic) {
      std::uint64_t slot_space = 1;
      for (std::size_t k = 0; k < n; ++k)
        for (std::int64_t i = 0; i < order[k]; ++i) slot_space *= static_cast<std::uint64_t>(grid_.degeneracy(k));
      std::uint64_t perm = r / slot_space;
      std::uint64_t slots = r % slot_space;
      // Multiset permutation of level labels, lexicographic rank `perm`.
      std::vector<std::int64_t> left = order.occupancy();
      std::int64_t remaining = order.firms();
      std::uint64_t count = multinomial(left).convert_to<std::uint64_t>();
      std::vector<Placement> firms;
      firms.reserve(static_cast<std::size_t>(remaining));
      while (remaining > 0) {
        for (std::size_t k = 0; k < n; ++k) {
          if (left[k] == 0) continue;
          const auto sub = static_cast<std::uint64_t>(static_cast<unsigned __int128>(count) *
                                                      static_cast<std::uint64_t>(left[k]) /
                                                      static_cast<std::uint64_t>(remaining));
          if (perm < sub) {
            firms.push_back(Placement{k, 0});
            --left[k];
            --remaining;
            count = sub;
            break;
          }
          perm -= sub;
        }
      }
      for (auto& p : firms) {
        const auto g = static_cast<std::uint64_t>(grid_.degeneracy(p.level));
        p.slot = static_cast<std::int64_t>(slots % g);
        slots /= g;
      }
      return MicroOutcome::labeled(std::move(firms), n);
    }
    std::vector<std::vector<std::int64_t>> cells(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::int64_t g = grid_.degeneracy(k);
      const auto ways = binomial(order[k] + g - 1, g - 1).convert_to<std::uint64_t>();
      std::uint64_t rk = r % ways;
      r /= ways;
      cells[k].assign(static_cast<std::size_t>(g), 0);
      std::int64_t m = order[k];
      for (std::int64_t s = 0; s + 1 < g; ++s) {
        const std::int64_t parts_after = g - s - 1;
        for (std::int64_t x = 0; x <= m; ++x) {
          const auto c = binomial(m - x + parts_after - 1, parts_after - 1).convert_to<std::uint64_t>();
          if (rk < c) {
            cells[k][static_cast<std::size_t>(s)] = x;
            m -= x;
            break;
          }
          rk -= c;
        }
      }
      cells[k][static_cast<std::size_t>(g - 1)] = m;
    }
    return MicroOutcome::unlabeled(std::move(cells));
  }

  // ---- chain path -------------------------------------------------------
  void init_chain() {
    const auto start = find_feasible_order(grid_, config_);
    if (!start) fail(ErrorKind::infeasible, "infeasible economy: no feasible outcome to start the chain from");
    exact_ = false;
    const std::size_t n = grid_.size();
    for (std::size_t k = 0; k < n; ++k)
      for (std::int64_t s = 0; s < grid_.degeneracy(k); ++s) cell_list_.push_back(Placement{k, s});
    if (config_.regime == Regime::monopolistic) {
      for (std::size_t k = 0; k < n; ++k)
        for (std::int64_t i = 0; i < (*start)[k]; ++i) firms_.push_back(Placement{k, 0});
    } else {
      cells_.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        cells_[k].assign(static_cast<std::size_t>(grid_.degeneracy(k)), 0);
        cells_[k][0] = (*start)[k];
      }
    }
  }

  MicroOutcome current() const {
    if (config_.regime == Regime::monopolistic) return MicroOutcome::labeled(firms_, grid_.size());
    return MicroOutcome::unlabeled(cells_);
  }

  // Level whose revenue equals `target`, if any.
  std::optional<std::size_t> level_of(Money target) const {
    const auto& lv = grid_.levels();
    const auto it = std::lower_bound(lv.begin(), lv.end(), target);
    if (it == lv.end() || *it != target) return std::nullopt;
    return static_cast<std::size_t>(it - lv.begin());
  }

  std::size_t uniform_index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  bool accept_ratio(double ratio) {
    if (ratio >= 1.0) return true;
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < ratio;
  }

  void step() {
    ++proposals_;
    const bool slot_move = std::uniform_int_distribution<int>(0, 1)(rng_) == 0;
    const bool moved = config_.regime == Regime::monopolistic ? step_labeled(slot_move) : step_unlabeled(slot_move);
    if (moved) ++accepted_;
  }

  // Pair moves: firm i leaves its level for a different one, partner j
  // absorbs the revenue change, both draw fresh slots. The reverse path
  // picks the same pair and sends both back, so path-wise detailed balance
  // needs only the slot-count ratio below.
  std::optional<std::size_t> propose_levels(std::size_t from_i, std::size_t from_j, std::size_t& to_i) {
    const std::size_t n = grid_.size();
    if (n < 2) return std::nullopt;
    to_i = uniform_index(n - 1);
    if (to_i >= from_i) ++to_i;
    return level_of(grid_.level(from_j) - (grid_.level(to_i) - grid_.level(from_i)));
  }

  std::int64_t random_slot(std::size_t level) {
    return static_cast<std::int64_t>(uniform_index(static_cast<std::size_t>(grid_.degeneracy(level))));
  }

  double slot_ratio(std::size_t new_i, std::size_t new_j, std::size_t old_i, std::size_t old_j) const {
    return static_cast<double>(grid_.degeneracy(new_i)) * static_cast<double>(grid_.degeneracy(new_j)) /
           (static_cast<double>(grid_.degeneracy(old_i)) * static_cast<double>(grid_.degeneracy(old_j)));
  }

  bool step_labeled(bool slot_move) {
    const std::size_t nf = firms_.size();
    if (slot_move) {
      Placement& f = firms_[uniform_index(nf)];
      f.slot = random_slot(f.level);
      return true;
    }
    const std::size_t i = uniform_index(nf);
    if (!config_.revenue) {
      firms_[i] = cell_list_[uniform_index(cell_list_.size())];
      return true;
    }
    if (nf < 2) return false;
    std::size_t j = uniform_index(nf - 1);
    if (j >= i) ++j;
    std::size_t to_i = 0;
    const auto to_j = propose_levels(firms_[i].level, firms_[j].level, to_i);
    if (!to_j) return false;
    const Placement pi{to_i, random_slot(to_i)};
    const Placement pj{*to_j, random_slot(*to_j)};
    if (!accept_ratio(slot_ratio(to_i, *to_j, firms_[i].level, firms_[j].level))) return false;
    firms_[i] = pi;
    firms_[j] = pj;
    return true;
  }

  std::int64_t& count(const Placement& c) { return cells_[c.level][static_cast<std::size_t>(c.slot)]; }

  // Same moves on occupation counts: cells are picked uniformly from the
  // cell list (not by firm), so every proposal path has a count-free
  // probability.
  bool step_unlabeled(bool slot_move) {
    const Placement c1 = cell_list_[uniform_index(cell_list_.size())];
    if (slot_move) {
      if (count(c1) == 0) return false;
      const Placement to{c1.level, random_slot(c1.level)};
      --count(c1);
      ++count(to);
      return true;
    }
    if (!config_.revenue) {
      const Placement d1 = cell_list_[uniform_index(cell_list_.size())];
      if (count(c1) == 0) return false;
      --count(c1);
      ++count(d1);
      return true;
    }
    const Placement c2 = cell_list_[uniform_index(cell_list_.size())];
    std::size_t to_1 = 0;
    const auto to_2 = propose_levels(c1.level, c2.level, to_1);
    if (!to_2) return false;
    if (count(c1) == 0 || count(c2) == 0 || (c1 == c2 && count(c1) < 2)) return false;
    const Placement d1{to_1, random_slot(to_1)};
    const Placement d2{*to_2, random_slot(*to_2)};
    if (!accept_ratio(slot_ratio(to_1, *to_2, c1.level, c2.level))) return false;
    --count(c1);
    --count(c2);
    ++count(d1);
    ++count(d2);
    return true;
  }

  RevenueGrid grid_;
  EconomyConfig config_;
  SamplerOptions options_;
  std::mt19937_64 rng_;
  bool exact_ = false;

  std::vector<EconomicOrder> orders_;
  std::vector<std::uint64_t> cumulative_;
  std::uint64_t total_ = 0;

  bool burned_in_ = false;
  std::uint64_t proposals_ = 0;
  std::uint64_t accepted_ = 0;
  std::vector<Placement> cell_list_;
  std::vector<Placement> firms_;
  std::vector<std::vector<std::int64_t>> cells_;
};

inline std::vector<MicroOutcome> sample_outcomes(const RevenueGrid& grid, const EconomyConfig& config,
                                                 const SamplerOptions& options, std::size_t draws) {
  OutcomeSampler sampler(grid, config, options);
  std::vector<MicroOutcome> out;
  out.reserve(draws);
  for (std::size_t i = 0; i < draws; ++i) out.push_back(sampler.next());
  return out;
}

/// Order counts of an outcome stream.
class FrequencyTable {
 public:
  void add(const EconomicOrder& order) {
    ++counts_[order];
    ++total_;
  }
  void add(const MicroOutcome& outcome) { add(outcome.order()); }

  std::uint64_t total() const { return total_; }
  const std::map<EconomicOrder, std::uint64_t>& counts() const { return counts_; }

  std::uint64_t count(const EconomicOrder& order) const {
    const auto it = counts_.find(order);
    return it == counts_.end() ? 0 : it->second;
  }

  double frequency(const EconomicOrder& order) const {
    return total_ == 0 ? 0.0 : static_cast<double>(count(order)) / static_cast<double>(total_);
  }

 private:
  std::map<EconomicOrder, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Relative frequency of each order in the stream.
inline std::map<EconomicOrder, double> empirical_frequencies(std::span<const MicroOutcome> outcomes) {
  require(!outcomes.empty(), ErrorKind::domain, "empty outcome stream");
  FrequencyTable table;
  for (const auto& o : outcomes) table.add(o);
  std::map<EconomicOrder, double> out;
  for (const auto& [order, c] : table.counts()) out[order] = table.frequency(order);
  return out;
}

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  bool pass = true;  // p_value >= significance
  bool support_ok = true;  // no draws landed outside the catalog
};

/// Pearson chi-square of observed order counts against exact catalog
/// probabilities.
inline ChiSquareResult chi_square_against(const FrequencyTable& table, const OrderCatalog& cat,
                                          double significance = 0.01) {
  ChiSquareResult res;
  const double n = static_cast<double>(table.total());
  std::uint64_t matched = 0;
  for (const auto& e : cat.entries) {
    const double expected = n * e.probability.convert_to<double>();
    const auto observed = table.count(e.order);
    matched += observed;
    const double d = static_cast<double>(observed) - expected;
    res.statistic += d * d / expected;
  }
  res.support_ok = matched == table.total();
  res.dof = cat.entries.size() - 1;
  if (res.dof > 0) {
    boost::math::chi_squared dist(static_cast<double>(res.dof));
    res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
  }
  res.pass = res.support_ok && res.p_value >= significance;
  return res;
}

}  // namespace econorder

#endif  // ECONORDER_SAMPLER_HPP
