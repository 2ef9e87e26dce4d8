#ifndef ECONORDER_REPORT_HPP
#define ECONORDER_REPORT_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "econorder/empirics.hpp"
#include "econorder/enumerate.hpp"
#include "econorder/macro.hpp"
#include "econorder/maxent.hpp"
#include "econorder/sampler.hpp"

namespace econorder {

using Json = nlohmann::ordered_json;

/// Shortest decimal that round-trips, so reports are stable byte for byte.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

// NaN and infinities become null in JSON.
inline Json json_number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const EconomicOrder& order) { return Json(order.occupancy()); }

inline Json to_json(const RevenueGrid& grid) {
  return Json{{"levels", grid.values()}, {"degeneracies", grid.degeneracies()}, {"quantum", grid.quantum()}};
}

inline Json to_json(const EconomyConfig& e) {
  Json j{{"N", e.firms}, {"Pi", nullptr}, {"regime", to_string(e.regime)}};
  if (e.revenue) j["Pi"] = *e.revenue;
  return j;
}

inline Json to_json(const Rational& r) {
  return Json{{"num", numerator(r).str()}, {"den", denominator(r).str()}, {"float", json_number(r.convert_to<double>())}};
}

/// occupancy,multiplicity,probability_num,probability_den,probability_float
inline std::string orders_csv(const OrderCatalog& cat) {
  std::ostringstream os;
  os << "occupancy,multiplicity,probability_num,probability_den,probability_float\n";
  for (const auto& e : cat.entries) {
    os << to_string(e.order) << ',' << e.multiplicity.str() << ',' << numerator(e.probability).str() << ','
       << denominator(e.probability).str() << ',' << format_double(e.probability.convert_to<double>()) << '\n';
  }
  return os.str();
}

inline Json spontaneous_json(const OrderCatalog& cat, const RevenueGrid& grid, const EconomyConfig& config) {
  const auto ties = spontaneous_ties(cat);
  const EconomicOrder best = ties.front();
  const BigInt omega = multiplicity(best, grid, config.regime);
  Json tie_list = Json::array();
  for (const auto& t : ties) tie_list.push_back(to_json(t));
  return Json{{"economy", to_json(config)},
              {"grid", to_json(grid)},
              {"spontaneous_order", to_json(best)},
              {"multiplicity", omega.str()},
              {"log_multiplicity", json_number(log_multiplicity(best, grid, config.regime))},
              {"probability", to_json(Rational(omega, cat.total_outcomes))},
              {"ties", tie_list},
              {"tie_count", ties.size()},
              {"feasible_orders", cat.entries.size()},
              {"total_outcomes", cat.total_outcomes.str()}};
}

inline Json to_json(const MultiplierSolution& s) {
  return Json{{"alpha", json_number(s.alpha)},
              {"beta", json_number(s.beta)},
              {"occupancy", s.occupancy},
              {"residual_N", s.residual_firms},
              {"residual_Pi", s.residual_revenue},
              {"iterations", s.iterations},
              {"converged", s.converged},
              {"boundary", s.boundary},
              {"at_domain_wall", s.at_domain_wall},
              {"method", to_string(s.method)}};
}

inline Json to_json(const CondensationReport& r) {
  return Json{{"condensed", r.condensed},
              {"ground_fraction", json_number(r.ground_fraction)},
              {"gap", json_number(r.gap)},
              {"ground_fraction_threshold", r.thresholds.ground_fraction},
              {"gap_threshold", r.thresholds.gap},
              {"trigger", r.trigger}};
}

inline Json to_json(const IdentityReport& r) {
  return Json{{"entropy", json_number(r.entropy)},
              {"legendre", json_number(r.legendre)},
              {"residual_plus", json_number(r.residual_plus)},
              {"residual_minus", json_number(r.residual_minus)},
              {"best_sign", r.best_sign},
              {"identity_residual", json_number(r.residual)},
              {"relative_residual", json_number(r.relative_residual)},
              {"derivative_mismatch", json_number(r.derivative_mismatch)}};
}

/// level,revenue,degeneracy,occupancy
inline std::string occupancy_csv(const RevenueGrid& grid, std::span<const double> occupancy) {
  std::ostringstream os;
  os << "level,revenue,degeneracy,occupancy\n";
  for (std::size_t k = 0; k < grid.size(); ++k)
    os << k + 1 << ',' << format_double(grid.value(k)) << ',' << grid.degeneracy(k) << ','
       << format_double(occupancy[k]) << '\n';
  return os.str();
}

/// occupancy,count,frequency[,probability_float]
inline std::string frequencies_csv(const FrequencyTable& table, const OrderCatalog* cat = nullptr) {
  std::ostringstream os;
  os << "occupancy,count,frequency" << (cat ? ",probability_float" : "") << '\n';
  if (cat) {
    // Catalog order, including orders never drawn.
    for (const auto& e : cat->entries)
      os << to_string(e.order) << ',' << table.count(e.order) << ',' << format_double(table.frequency(e.order)) << ','
         << format_double(e.probability.convert_to<double>()) << '\n';
    return os.str();
  }
  for (const auto& [order, c] : table.counts())
    os << to_string(order) << ',' << c << ',' << format_double(table.frequency(order)) << '\n';
  return os.str();
}

inline Json to_json(const FitResult& f) {
  Json j{{"model", to_string(f.model)},
         {"mu", json_number(f.mu)},
         {"temperature", json_number(f.temperature)},
         {"ks_statistic", json_number(f.ks_statistic)},
         {"n_used", f.n_used},
         {"converged", f.converged}};
  if (f.model == FitModel::boltzmann) {
    j["log_likelihood"] = f.log_likelihood ? json_number(*f.log_likelihood) : Json(nullptr);
    j["tail_truncated_fraction"] = f.tail_truncated_fraction;
    j["cutoff"] = json_number(f.cutoff);
  } else {
    j["scale"] = json_number(f.scale);
    j["bins"] = f.observed.size();
  }
  if (!f.note.empty()) j["note"] = f.note;
  return j;
}

inline Json to_json(const GoodnessOfFit& g) {
  return Json{{"statistic", json_number(g.statistic)}, {"critical_0_01", g.critical}, {"n", g.n}, {"pass", g.pass}};
}

/// bin_center,observed,fitted_bose_einstein
inline std::string bins_csv(const FitResult& be) {
  std::ostringstream os;
  os << "bin_center,observed,fitted_bose_einstein\n";
  for (std::size_t i = 0; i < be.observed.size(); ++i)
    os << format_double(0.5 * (be.bin_edges[i] + be.bin_edges[i + 1])) << ',' << format_double(be.observed[i]) << ','
       << format_double(be.fitted[i]) << '\n';
  return os.str();
}

inline Json error_json(ErrorKind kind, const std::string& message) {
  return Json{{"error", {{"kind", to_string(kind)}, {"message", message}, {"exit_code", exit_code(kind)}}}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::parse, "cannot write '" + path.string() + "'");
  out << text;
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace econorder

#endif  // ECONORDER_REPORT_HPP
