#ifndef ECONORDER_ENUMERATE_HPP
#define ECONORDER_ENUMERATE_HPP

#include <functional>
#include <map>
#include <sstream>

#include "econorder/counting.hpp"

namespace econorder {

inline constexpr std::uint64_t kDefaultOutcomeCap = 10'000'000;

namespace detail {

// Depth-first walk over compositions of the remaining firms into levels
// [k, n), pruned so the remaining revenue stays reachable.
template <class Visit>
void walk_orders(const RevenueGrid& grid, const EconomyConfig& config, std::size_t k, std::int64_t firms_left,
                 Money revenue_left, std::vector<std::int64_t>& occ, Visit& visit) {
  const std::size_t n = grid.size();
  if (k + 1 == n) {
    if (config.revenue && firms_left * grid.level(k) != revenue_left) return;
    occ[k] = firms_left;
    visit(occ);
    occ[k] = 0;
    return;
  }
  for (std::int64_t c = firms_left; c >= 0; --c) {
    const std::int64_t rest = firms_left - c;
    if (config.revenue) {
      const Money r = revenue_left - c * grid.level(k);
      // Both slacks shrink as c decreases.
      if (r > rest * grid.level(n - 1)) continue;
      if (r < rest * grid.level(k + 1)) break;
    }
    occ[k] = c;
    walk_orders(grid, config, k + 1, rest, config.revenue ? revenue_left - c * grid.level(k) : 0, occ, visit);
  }
  occ[k] = 0;
}

}  // namespace detail

/// Calls `visit(occupancy)` for every feasible order, in lexicographically
/// descending order of occupancy.
template <class Visit>
void for_each_order(const RevenueGrid& grid, const EconomyConfig& config, Visit&& visit) {
  if (config.revenue) {
    const Money pi = *config.revenue;
    if (pi < config.firms * grid.level(0) || pi > config.firms * grid.level(grid.size() - 1)) return;
  }
  std::vector<std::int64_t> occ(grid.size(), 0);
  detail::walk_orders(grid, config, 0, config.firms, config.revenue.value_or(0), occ, visit);
}

/// All feasible economic orders (compositions of N with the right revenue).
inline std::vector<EconomicOrder> enumerate_orders(const RevenueGrid& grid, const EconomyConfig& config) {
  std::vector<EconomicOrder> out;
  for_each_order(grid, config, [&](const std::vector<std::int64_t>& occ) { out.emplace_back(occ); });
  return out;
}

/// Where one labeled firm sits: revenue level and industry slot (0-based).
struct Placement {
  std::size_t level = 0;
  std::int64_t slot = 0;
  auto operator<=>(const Placement&) const = default;
};

/// One equilibrium outcome.
///
/// Monopolistic: a (level, slot) placement per labeled firm. Perfect: the
/// number of firms in each (level, slot) cell, since firms carry no labels.
class MicroOutcome {
 public:
  static MicroOutcome labeled(std::vector<Placement> firms, std::size_t levels) {
    MicroOutcome m;
    m.regime_ = Regime::monopolistic;
    m.levels_ = levels;
    m.placements_ = std::move(firms);
    return m;
  }

  static MicroOutcome unlabeled(std::vector<std::vector<std::int64_t>> cells) {
    MicroOutcome m;
    m.regime_ = Regime::perfect;
    m.levels_ = cells.size();
    m.cells_ = std::move(cells);
    return m;
  }

  Regime regime() const { return regime_; }
  const std::vector<Placement>& placements() const { return placements_; }
  const std::vector<std::vector<std::int64_t>>& cells() const { return cells_; }

  EconomicOrder order() const {
    std::vector<std::int64_t> occ(levels_, 0);
    if (regime_ == Regime::monopolistic) {
      for (const auto& p : placements_) ++occ[p.level];
    } else {
      for (std::size_t k = 0; k < levels_; ++k)
        for (auto c : cells_[k]) occ[k] += c;
    }
    return EconomicOrder(std::move(occ));
  }

  bool operator==(const MicroOutcome&) const = default;
  auto operator<=>(const MicroOutcome&) const = default;

 private:
  Regime regime_ = Regime::monopolistic;
  std::size_t levels_ = 0;
  std::vector<Placement> placements_;
  std::vector<std::vector<std::int64_t>> cells_;
};

/// Compact text form: "1.1 2.1" (level.slot per firm, 1-based) for labeled
/// outcomes, "1:0,1|2:1" (per-level slot counts) for unlabeled ones.
inline std::string to_string(const MicroOutcome& m) {
  std::ostringstream os;
  if (m.regime() == Regime::monopolistic) {
    bool first = true;
    for (const auto& p : m.placements()) {
      if (!first) os << ' ';
      first = false;
      os << p.level + 1 << '.' << p.slot + 1;
    }
  } else {
    for (std::size_t k = 0; k < m.cells().size(); ++k) {
      if (k) os << '|';
      os << k + 1 << ':';
      for (std::size_t s = 0; s < m.cells()[k].size(); ++s) os << (s ? "," : "") << m.cells()[k][s];
    }
  }
  return os.str();
}

namespace detail {

template <class Leaf>
void walk_labeled(const RevenueGrid& grid, const EconomyConfig& config, std::int64_t firm, Money revenue_left,
                  std::vector<Placement>& firms, std::vector<std::int64_t>& occ, Leaf& leaf) {
  const std::size_t n = grid.size();
  if (firm == config.firms) {
    if (!config.revenue || revenue_left == 0) leaf(firms, occ);
    return;
  }
  const std::int64_t rest = config.firms - firm - 1;
  for (std::size_t k = 0; k < n; ++k) {
    Money r = 0;
    if (config.revenue) {
      r = revenue_left - grid.level(k);
      if (r < rest * grid.level(0) || r > rest * grid.level(n - 1)) continue;
    }
    ++occ[k];
    for (std::int64_t s = 0; s < grid.degeneracy(k); ++s) {
      firms[firm] = Placement{k, s};
      walk_labeled(grid, config, firm + 1, r, firms, occ, leaf);
    }
    --occ[k];
  }
}

// Cells are visited in (level, slot) order; each cell receives a count.
template <class Leaf>
void walk_unlabeled(const RevenueGrid& grid, const EconomyConfig& config, std::size_t level, std::int64_t slot,
                    std::int64_t firms_left, Money revenue_left, std::vector<std::vector<std::int64_t>>& cells,
                    std::vector<std::int64_t>& occ, Leaf& leaf) {
  const std::size_t n = grid.size();
  if (level == n) {
    if (firms_left == 0 && (!config.revenue || revenue_left == 0)) leaf(cells, occ);
    return;
  }
  const bool last_slot = slot + 1 == grid.degeneracy(level);
  const std::size_t next_level = last_slot ? level + 1 : level;
  const std::int64_t next_slot = last_slot ? 0 : slot + 1;
  for (std::int64_t c = 0; c <= firms_left; ++c) {
    const std::int64_t rest = firms_left - c;
    Money r = 0;
    if (config.revenue) {
      r = revenue_left - c * grid.level(level);
      if (r < 0) break;
      // Remaining firms must land on levels >= next_level.
      if (next_level == n) {
        if (rest != 0 || r != 0) continue;
      } else if (r < rest * grid.level(next_level) || r > rest * grid.level(n - 1)) {
        continue;
      }
    }
    cells[level][slot] = c;
    occ[level] += c;
    walk_unlabeled(grid, config, next_level, next_slot, rest, r, cells, occ, leaf);
    occ[level] -= c;
  }
  cells[level][slot] = 0;
}

}  // namespace detail

/// Brute-force walk over every feasible micro-outcome, classifying nothing:
/// `leaf(state, occupancy)` receives the raw assignment (placements for
/// monopolistic, cell counts for perfect) and the order it realizes.
template <class Leaf>
void for_each_outcome(const RevenueGrid& grid, const EconomyConfig& config, Leaf&& leaf) {
  std::vector<std::int64_t> occ(grid.size(), 0);
  if (config.regime == Regime::monopolistic) {
    std::vector<Placement> firms(static_cast<std::size_t>(config.firms));
    detail::walk_labeled(grid, config, 0, config.revenue.value_or(0), firms, occ, leaf);
  } else {
    std::vector<std::vector<std::int64_t>> cells(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) cells[k].assign(static_cast<std::size_t>(grid.degeneracy(k)), 0);
    detail::walk_unlabeled(grid, config, 0, 0, config.firms, config.revenue.value_or(0), cells, occ, leaf);
  }
}

/// Total outcomes of all feasible orders, from the closed-form counts.
inline BigInt total_outcomes(const RevenueGrid& grid, const EconomyConfig& config) {
  BigInt total = 0;
  for_each_order(grid, config, [&](const std::vector<std::int64_t>& occ) {
    total += multiplicity(EconomicOrder(occ), grid, config.regime);
  });
  return total;
}

inline void check_outcome_cap(const RevenueGrid& grid, const EconomyConfig& config, std::uint64_t cap) {
  const BigInt total = total_outcomes(grid, config);
  if (total > cap) {
    fail(ErrorKind::cap_exceeded, "economy has " + total.str() + " equilibrium outcomes, above the cap of " +
                                      std::to_string(cap));
  }
}

/// Micro-outcome counts per order obtained by exhaustive listing.
inline std::map<EconomicOrder, std::uint64_t> count_outcomes_by_order(const RevenueGrid& grid,
                                                                      const EconomyConfig& config,
                                                                      std::uint64_t cap = kDefaultOutcomeCap) {
  check_outcome_cap(grid, config, cap);
  std::map<EconomicOrder, std::uint64_t> counts;
  for_each_outcome(grid, config, [&](const auto&, const std::vector<std::int64_t>& occ) { ++counts[EconomicOrder(occ)]; });
  return counts;
}

struct OutcomeGroup {
  EconomicOrder order;
  std::vector<MicroOutcome> outcomes;
};

/// Every feasible micro-outcome, grouped by the order it realizes; groups in
/// ascending order of occupancy, outcomes in generation order.
inline std::vector<OutcomeGroup> enumerate_outcomes(const RevenueGrid& grid, const EconomyConfig& config,
                                                    std::uint64_t cap = kDefaultOutcomeCap) {
  check_outcome_cap(grid, config, cap);
  std::map<EconomicOrder, std::vector<MicroOutcome>> groups;
  for_each_outcome(grid, config, [&](const auto& state, const std::vector<std::int64_t>& occ) {
    using State = std::decay_t<decltype(state)>;
    if constexpr (std::is_same_v<State, std::vector<Placement>>)
      groups[EconomicOrder(occ)].push_back(MicroOutcome::labeled(state, grid.size()));
    else
      groups[EconomicOrder(occ)].push_back(MicroOutcome::unlabeled(state));
  });
  std::vector<OutcomeGroup> out;
  out.reserve(groups.size());
  for (auto& [order, outcomes] : groups) out.push_back(OutcomeGroup{order, std::move(outcomes)});
  return out;
}

struct CatalogEntry {
  EconomicOrder order;
  BigInt multiplicity;
  Rational probability;
};

/// Feasible orders with exact counts and probabilities Omega / sum Omega,
/// sorted by descending Omega, ties by ascending occupancy.
struct OrderCatalog {
  std::vector<CatalogEntry> entries;
  BigInt total_outcomes = 0;
};

inline OrderCatalog catalog(const RevenueGrid& grid, const EconomyConfig& config) {
  OrderCatalog cat;
  for_each_order(grid, config, [&](const std::vector<std::int64_t>& occ) {
    EconomicOrder order(occ);
    BigInt omega = multiplicity(order, grid, config.regime);
    cat.total_outcomes += omega;
    cat.entries.push_back(CatalogEntry{std::move(order), std::move(omega), 0});
  });
  if (cat.entries.empty()) fail(ErrorKind::infeasible, "infeasible economy: no economic order meets the constraints");
  for (auto& e : cat.entries) e.probability = Rational(e.multiplicity, cat.total_outcomes);
  std::sort(cat.entries.begin(), cat.entries.end(), [](const CatalogEntry& a, const CatalogEntry& b) {
    if (a.multiplicity != b.multiplicity) return a.multiplicity > b.multiplicity;
    return a.order < b.order;
  });
  return cat;
}

/// Orders sharing the maximal multiplicity, ascending by occupancy.
inline std::vector<EconomicOrder> spontaneous_ties(const OrderCatalog& cat) {
  require(!cat.entries.empty(), ErrorKind::domain, "empty catalog");
  BigInt best = 0;
  for (const auto& e : cat.entries) best = std::max(best, e.multiplicity);
  std::vector<EconomicOrder> ties;
  for (const auto& e : cat.entries)
    if (e.multiplicity == best) ties.push_back(e.order);
  std::sort(ties.begin(), ties.end());
  return ties;
}

/// Most probable order; lexicographically smallest occupancy among ties.
inline EconomicOrder spontaneous_order_exact(const OrderCatalog& cat) { return spontaneous_ties(cat).front(); }

/// Degree of freedom of an order: the number of outcomes it admits.
inline BigInt freedom_degree(const EconomicOrder& order, const RevenueGrid& grid, Regime regime) {
  return multiplicity(order, grid, regime);
}

}  // namespace econorder

#endif  // ECONORDER_ENUMERATE_HPP
