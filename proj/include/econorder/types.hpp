#ifndef ECONORDER_TYPES_HPP
#define ECONORDER_TYPES_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "econorder/error.hpp"

namespace econorder {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Amount of money counted in integer multiples of a grid's money quantum.
using Money = std::int64_t;

/// Competition regime. The numeric value is the statistics indicator I.
enum class Regime : int {
  monopolistic = 0,  // distinguishable firms, Boltzmann counting
  perfect = 1,       // indistinguishable firms, Bose-Einstein counting
};

inline int indicator(Regime r) { return static_cast<int>(r); }

inline std::string to_string(Regime r) { return r == Regime::perfect ? "per" : "mon"; }

inline Regime parse_regime(const std::string& s) {
  if (s == "mon" || s == "monopolistic" || s == "0") return Regime::monopolistic;
  if (s == "per" || s == "perfect" || s == "1") return Regime::perfect;
  fail(ErrorKind::parse, "unknown regime '" + s + "' (expected mon or per)");
}

/// Ladder of revenue levels with the number of industries paying each level.
///
/// Levels are integer multiples of `quantum`, so revenue sums compare exactly.
class RevenueGrid {
 public:
  RevenueGrid(std::vector<Money> levels, std::vector<std::int64_t> degeneracies, double quantum = 1.0)
      : levels_(std::move(levels)), degeneracies_(std::move(degeneracies)), quantum_(quantum) {
    require(!levels_.empty(), ErrorKind::domain, "grid needs at least one revenue level");
    require(levels_.size() == degeneracies_.size(), ErrorKind::structural,
            "grid has " + std::to_string(levels_.size()) + " levels but " +
                std::to_string(degeneracies_.size()) + " degeneracies");
    require(quantum_ > 0.0, ErrorKind::domain, "money quantum must be positive");
    for (std::size_t k = 0; k < levels_.size(); ++k) {
      require(levels_[k] >= 0, ErrorKind::domain, "revenue level " + std::to_string(k + 1) + " is negative");
      require(degeneracies_[k] >= 1, ErrorKind::domain,
              "degeneracy of level " + std::to_string(k + 1) + " must be >= 1");
      if (k > 0)
        require(levels_[k - 1] < levels_[k], ErrorKind::domain, "revenue levels must be strictly increasing");
    }
  }

  /// Grid with every degeneracy equal to one.
  explicit RevenueGrid(std::vector<Money> levels)
      : RevenueGrid(levels, std::vector<std::int64_t>(levels.size(), 1)) {}

  std::size_t size() const { return levels_.size(); }
  Money level(std::size_t k) const { return levels_[k]; }
  std::int64_t degeneracy(std::size_t k) const { return degeneracies_[k]; }
  const std::vector<Money>& levels() const { return levels_; }
  const std::vector<std::int64_t>& degeneracies() const { return degeneracies_; }
  double quantum() const { return quantum_; }

  /// Revenue of level k in money units.
  double value(std::size_t k) const { return static_cast<double>(levels_[k]) * quantum_; }

  std::vector<double> values() const {
    std::vector<double> v(size());
    for (std::size_t k = 0; k < size(); ++k) v[k] = value(k);
    return v;
  }

  std::int64_t total_slots() const { return std::accumulate(degeneracies_.begin(), degeneracies_.end(), std::int64_t{0}); }

  /// Same grid with every level multiplied by c (money quantum unchanged).
  RevenueGrid scaled(Money c) const {
    std::vector<Money> lv(levels_);
    for (auto& l : lv) l *= c;
    return RevenueGrid(std::move(lv), degeneracies_, quantum_);
  }

  bool operator==(const RevenueGrid&) const = default;

 private:
  std::vector<Money> levels_;
  std::vector<std::int64_t> degeneracies_;
  double quantum_;
};

/// Number of firms, total equilibrium revenue and regime.
///
/// `revenue` is in money quanta; an empty value drops the revenue constraint,
/// leaving only the firm count (the setting of the two-firm toy economy).
struct EconomyConfig {
  std::int64_t firms = 1;
  std::optional<Money> revenue;
  Regime regime = Regime::monopolistic;

  EconomyConfig() = default;
  EconomyConfig(std::int64_t n, std::optional<Money> pi, Regime r) : firms(n), revenue(pi), regime(r) {
    require(firms >= 1, ErrorKind::domain, "economy needs at least one firm");
    require(!revenue || *revenue >= 0, ErrorKind::domain, "total revenue must be non-negative");
  }
};

/// Occupancy a_k: how many firms earn revenue level k.
class EconomicOrder {
 public:
  EconomicOrder() = default;
  explicit EconomicOrder(std::vector<std::int64_t> occupancy) : occupancy_(std::move(occupancy)) {
    for (auto a : occupancy_) require(a >= 0, ErrorKind::domain, "occupancy entries must be non-negative");
  }
  EconomicOrder(std::initializer_list<std::int64_t> occ) : EconomicOrder(std::vector<std::int64_t>(occ)) {}

  std::size_t size() const { return occupancy_.size(); }
  std::int64_t operator[](std::size_t k) const { return occupancy_[k]; }
  const std::vector<std::int64_t>& occupancy() const { return occupancy_; }

  std::int64_t firms() const { return std::accumulate(occupancy_.begin(), occupancy_.end(), std::int64_t{0}); }

  Money revenue(const RevenueGrid& grid) const {
    Money r = 0;
    for (std::size_t k = 0; k < size(); ++k) r += occupancy_[k] * grid.level(k);
    return r;
  }

  auto operator<=>(const EconomicOrder&) const = default;

 private:
  std::vector<std::int64_t> occupancy_;
};

inline std::string to_string(const EconomicOrder& order, char sep = ';') {
  std::ostringstream os;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k) os << sep;
    os << order[k];
  }
  return os.str();
}

inline void require_matches(const EconomicOrder& order, const RevenueGrid& grid) {
  require(order.size() == grid.size(), ErrorKind::structural,
          "order has " + std::to_string(order.size()) + " entries but grid has " + std::to_string(grid.size()) +
              " levels");
}

/// Revenue shares t_j of the N firms; non-negative and summing to one exactly.
class ShareVector {
 public:
  explicit ShareVector(std::vector<Rational> shares) : shares_(std::move(shares)) {
    require(!shares_.empty(), ErrorKind::domain, "share vector is empty");
    Rational sum = 0;
    for (const auto& t : shares_) {
      require(t >= 0, ErrorKind::domain, "shares must be non-negative");
      sum += t;
    }
    require(sum == 1, ErrorKind::domain, "shares must sum to exactly 1");
  }

  std::size_t size() const { return shares_.size(); }
  const Rational& operator[](std::size_t j) const { return shares_[j]; }
  const std::vector<Rational>& shares() const { return shares_; }

 private:
  std::vector<Rational> shares_;
};

}  // namespace econorder

#endif  // ECONORDER_TYPES_HPP
