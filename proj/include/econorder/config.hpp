#ifndef ECONORDER_CONFIG_HPP
#define ECONORDER_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "econorder/enumerate.hpp"
#include "econorder/maxent.hpp"
#include "econorder/types.hpp"

namespace econorder {

struct SamplingConfig {
  std::uint64_t draws = 100'000;
  std::uint64_t burn_in = 1000;
  std::uint64_t thinning = 10;
  std::vector<std::uint64_t> seeds{1};
};

/// Everything a CLI run needs, validated on load.
struct RunConfig {
  EconomyConfig economy;
  RevenueGrid grid{std::vector<Money>{1}};
  double lambda = 1.0;
  SamplingConfig sampling;
  CondensationThresholds thresholds;
  std::uint64_t outcome_cap = kDefaultOutcomeCap;
  std::filesystem::path output_dir = ".";
};

namespace detail {

namespace pt = boost::property_tree;

// Known keys per section; anything else is rejected so typos do not pass
// silently.
inline const std::vector<std::pair<std::string, std::vector<std::string>>>& known_keys() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> keys = {
      {"economy", {"N", "Pi", "regime", "quantum", "lambda"}},
      {"grid", {"levels", "degeneracies"}},
      {"thresholds", {"ground_fraction", "gap"}},
      {"caps", {"outcomes"}},
      {"sampling", {"draws", "burn_in", "thinning", "seeds"}},
      {"output", {"dir"}},
  };
  return keys;
}

inline void check_keys(const pt::ptree& tree) {
  const auto& known = known_keys();
  for (const auto& [section, body] : tree) {
    auto it = std::find_if(known.begin(), known.end(), [&](const auto& s) { return s.first == section; });
    if (it == known.end()) fail(ErrorKind::parse, "[" + section + "]: unknown section");
    for (const auto& [key, value] : body) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        fail(ErrorKind::parse, section + "." + key + ": unknown key");
    }
  }
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  for (char c : s + ",") {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item += c;
    }
  }
  return out;
}

template <class T>
T parse_scalar(const std::string& field, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (!in || !(in >> std::ws).eof()) fail(ErrorKind::parse, field + ": cannot parse '" + text + "'");
  return value;
}

template <class T>
std::optional<T> get(const pt::ptree& tree, const std::string& field) {
  const auto node = tree.get_optional<std::string>(pt::ptree::path_type(field, '.'));
  if (!node) return std::nullopt;
  return parse_scalar<T>(field, *node);
}

template <class T>
T require_field(const pt::ptree& tree, const std::string& field) {
  auto v = get<T>(tree, field);
  if (!v) fail(ErrorKind::parse, field + ": missing required field");
  return *v;
}

// Money amount -> integer number of quanta, exact up to rounding noise.
inline Money to_quanta(const std::string& field, double amount, double quantum) {
  const double q = amount / quantum;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
    fail(ErrorKind::parse, field + ": " + std::to_string(amount) + " is not a multiple of the money quantum");
  return static_cast<Money>(r);
}

}  // namespace detail

/// Parses an INI-style run configuration.
///
/// \code
/// [economy]
/// N = 10
/// ; Pi is optional; without it only the firm count is constrained
/// Pi = 14
/// regime = mon
/// [grid]
/// levels = 1, 2
/// degeneracies = 1, 1
/// \endcode
///
/// Comments take a whole line. Missing degeneracies default to one.
inline RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::parse, "config line " + std::to_string(e.line()) + ": " + e.message());
  }
  detail::check_keys(tree);

  RunConfig rc;
  const double quantum = detail::get<double>(tree, "economy.quantum").value_or(1.0);
  if (!(quantum > 0.0)) fail(ErrorKind::parse, "economy.quantum: must be positive");

  const auto firms = detail::require_field<std::int64_t>(tree, "economy.N");
  if (firms < 1) fail(ErrorKind::parse, "economy.N: must be >= 1");
  std::optional<Money> pi;
  if (auto p = detail::get<double>(tree, "economy.Pi")) {
    if (*p < 0.0) fail(ErrorKind::parse, "economy.Pi: must be >= 0");
    pi = detail::to_quanta("economy.Pi", *p, quantum);
  }
  Regime regime = Regime::monopolistic;
  if (auto r = tree.get_optional<std::string>("economy.regime")) {
    try {
      regime = parse_regime(*r);
    } catch (const Error& e) {
      fail(ErrorKind::parse, std::string("economy.regime: ") + e.what());
    }
  }
  rc.economy = EconomyConfig(firms, pi, regime);
  rc.lambda = detail::get<double>(tree, "economy.lambda").value_or(1.0);
  if (!(rc.lambda > 0.0)) fail(ErrorKind::parse, "economy.lambda: must be positive");

  const auto level_text = tree.get_optional<std::string>("grid.levels");
  if (!level_text) fail(ErrorKind::parse, "grid.levels: missing required field");
  std::vector<Money> levels;
  for (const auto& item : detail::split_list(*level_text)) {
    const auto v = detail::parse_scalar<double>("grid.levels", item);
    if (v < 0.0) fail(ErrorKind::parse, "grid.levels: negative level " + item);
    levels.push_back(detail::to_quanta("grid.levels", v, quantum));
  }
  if (levels.empty()) fail(ErrorKind::parse, "grid.levels: needs at least one level");
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (levels[k] <= levels[k - 1]) fail(ErrorKind::parse, "grid.levels: must be strictly increasing");

  std::vector<std::int64_t> degeneracies(levels.size(), 1);
  if (auto d = tree.get_optional<std::string>("grid.degeneracies")) {
    degeneracies.clear();
    for (const auto& item : detail::split_list(*d)) {
      const auto g = detail::parse_scalar<std::int64_t>("grid.degeneracies", item);
      if (g < 1) fail(ErrorKind::parse, "grid.degeneracies: entries must be >= 1");
      degeneracies.push_back(g);
    }
    if (degeneracies.size() != levels.size())
      fail(ErrorKind::parse, "grid.degeneracies: " + std::to_string(degeneracies.size()) + " entries for " +
                                 std::to_string(levels.size()) + " levels");
  }
  rc.grid = RevenueGrid(std::move(levels), std::move(degeneracies), quantum);

  rc.thresholds.ground_fraction =
      detail::get<double>(tree, "thresholds.ground_fraction").value_or(rc.thresholds.ground_fraction);
  rc.thresholds.gap = detail::get<double>(tree, "thresholds.gap").value_or(rc.thresholds.gap);
  if (!(rc.thresholds.ground_fraction > 0.0 && rc.thresholds.ground_fraction <= 1.0))
    fail(ErrorKind::parse, "thresholds.ground_fraction: must lie in (0, 1]");
  if (!(rc.thresholds.gap >= 0.0)) fail(ErrorKind::parse, "thresholds.gap: must be >= 0");

  if (auto cap = detail::get<double>(tree, "caps.outcomes")) {
    if (!(*cap >= 1.0) || *cap != std::floor(*cap)) fail(ErrorKind::parse, "caps.outcomes: must be a positive integer");
    rc.outcome_cap = static_cast<std::uint64_t>(*cap);
  }

  auto positive = [&](const std::string& field, std::uint64_t fallback) {
    const auto v = detail::get<std::int64_t>(tree, field);
    if (!v) return fallback;
    if (*v < 0) fail(ErrorKind::parse, field + ": must be non-negative");
    return static_cast<std::uint64_t>(*v);
  };
  rc.sampling.draws = positive("sampling.draws", rc.sampling.draws);
  rc.sampling.burn_in = positive("sampling.burn_in", rc.sampling.burn_in);
  rc.sampling.thinning = positive("sampling.thinning", rc.sampling.thinning);
  if (rc.sampling.draws == 0) fail(ErrorKind::parse, "sampling.draws: must be >= 1");
  if (rc.sampling.thinning == 0) fail(ErrorKind::parse, "sampling.thinning: must be >= 1");
  if (auto s = tree.get_optional<std::string>("sampling.seeds")) {
    rc.sampling.seeds.clear();
    for (const auto& item : detail::split_list(*s)) {
      const auto v = detail::parse_scalar<std::int64_t>("sampling.seeds", item);
      if (v < 0) fail(ErrorKind::parse, "sampling.seeds: must be non-negative");
      rc.sampling.seeds.push_back(static_cast<std::uint64_t>(v));
    }
    if (rc.sampling.seeds.empty()) fail(ErrorKind::parse, "sampling.seeds: needs at least one seed");
  }
  if (auto dir = tree.get_optional<std::string>("output.dir")) rc.output_dir = *dir;
  return rc;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot open config '" + path.string() + "'");
  return parse_config(in);
}

}  // namespace econorder

#endif  // ECONORDER_CONFIG_HPP
