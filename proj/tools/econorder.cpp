// Command-line front end: enumerate | solve | sample | fit | macro | check.
//
// Every command prints one JSON document on stdout (a summary on success, an
// error object on failure) and writes its files under --out.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "econorder/checks.hpp"
#include "econorder/config.hpp"
#include "econorder/empirics.hpp"
#include "econorder/enumerate.hpp"
#include "econorder/macro.hpp"
#include "econorder/maxent.hpp"
#include "econorder/report.hpp"
#include "econorder/sampler.hpp"

namespace fs = std::filesystem;
using namespace econorder;

namespace {

struct Flags {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::string regime;
  std::optional<double> lambda;
  double tail_quantile = 0.03;
  std::string data;
  int bins = 50;
  std::string format = "auto";
  std::optional<double> alpha;
  std::optional<double> beta;
  std::string fault;
};

RunConfig load(const Flags& f) {
  RunConfig rc = load_config(f.config);
  if (!f.regime.empty()) rc.economy.regime = parse_regime(f.regime);
  if (f.lambda) {
    require(*f.lambda > 0.0, ErrorKind::domain, "--lambda must be positive");
    rc.lambda = *f.lambda;
  }
  if (!f.seeds.empty()) rc.sampling.seeds = f.seeds;
  if (!f.out.empty()) rc.output_dir = f.out;
  return rc;
}

fs::path out_dir(const Flags& f) { return f.out.empty() ? fs::path(".") : fs::path(f.out); }

Json cmd_enumerate(const RunConfig& rc) {
  check_outcome_cap(rc.grid, rc.economy, rc.outcome_cap);
  const auto cat = catalog(rc.grid, rc.economy);
  write_text(rc.output_dir / "orders.csv", orders_csv(cat));
  const Json spont = spontaneous_json(cat, rc.grid, rc.economy);
  write_json(rc.output_dir / "spontaneous.json", spont);
  return Json{{"command", "enumerate"},
              {"feasible_orders", cat.entries.size()},
              {"total_outcomes", cat.total_outcomes.str()},
              {"spontaneous_order", spont["spontaneous_order"]},
              {"tie_count", spont["tie_count"]}};
}

Json macro_report(const RunConfig& rc, double alpha, double beta, std::span<const double> occ) {
  const Regime regime = rc.economy.regime;
  const MacroParams m = macro_from_multipliers(alpha, beta, rc.lambda);
  const double ln_omega = entropy_of(occ, rc.grid, regime);
  const auto id = entropy_identity_residual(alpha, beta, rc.grid, regime);
  return Json{{"mu", m.mu},
              {"theta", m.theta},
              {"lambda", m.lambda},
              {"alpha", alpha},
              {"beta", beta},
              {"T", technology(ln_omega, rc.lambda)},
              {"lnOmega", ln_omega},
              {"identity_residual", json_number(id.residual)},
              {"best_sign", id.best_sign},
              {"identity", to_json(id)}};
}

Json cmd_solve(const RunConfig& rc) {
  const auto sol = solve_multipliers(rc.grid, rc.economy);
  if (!sol.converged) fail(ErrorKind::nonconvergence, "maxent solver did not converge: residuals " +
                                                          format_double(sol.residual_firms) + ", " +
                                                          format_double(sol.residual_revenue));
  const auto cond = detect_condensation(sol, rc.grid, rc.economy, rc.thresholds);
  Json report{{"economy", to_json(rc.economy)},
              {"grid", to_json(rc.grid)},
              {"solution", to_json(sol)},
              {"condensation", to_json(cond)},
              {"entropy", entropy_of(sol.occupancy, rc.grid, rc.economy.regime)},
              {"macro", nullptr}};
  if (!sol.boundary) report["macro"] = macro_report(rc, sol.alpha, sol.beta, sol.occupancy);
  write_json(rc.output_dir / "solution.json", report);
  write_text(rc.output_dir / "occupancy.csv", occupancy_csv(rc.grid, sol.occupancy));
  return Json{{"command", "solve"},
              {"converged", sol.converged},
              {"boundary", sol.boundary},
              {"condensed", cond.condensed},
              {"occupancy", sol.occupancy}};
}

Json cmd_sample(const RunConfig& rc) {
  std::optional<OrderCatalog> cat;
  if (total_outcomes(rc.grid, rc.economy) <= rc.outcome_cap) cat = catalog(rc.grid, rc.economy);
  Json runs = Json::array();
  for (auto seed : rc.sampling.seeds) {
    SamplerOptions so;
    so.seed = seed;
    so.burn_in = rc.sampling.burn_in;
    so.thinning = rc.sampling.thinning;
    so.cap = rc.outcome_cap;
    OutcomeSampler sampler(rc.grid, rc.economy, so);
    FrequencyTable table;
    for (std::uint64_t i = 0; i < rc.sampling.draws; ++i) table.add(sampler.next());
    const std::string name = "frequencies_seed" + std::to_string(seed) + ".csv";
    write_text(rc.output_dir / name, frequencies_csv(table, cat ? &*cat : nullptr));
    Json run{{"seed", seed},
             {"method", sampler.exact() ? "exact" : "chain"},
             {"draws", table.total()},
             {"orders_visited", table.counts().size()},
             {"file", name}};
    if (!sampler.exact()) run["acceptance_rate"] = sampler.acceptance_rate();
    if (cat) {
      const auto chi = chi_square_against(table, *cat);
      run["chi_square"] = Json{{"statistic", chi.statistic},
                               {"dof", chi.dof},
                               {"p_value", chi.p_value},
                               {"pass_0_01", chi.pass},
                               {"support_ok", chi.support_ok}};
    }
    runs.push_back(run);
  }
  const Json report{{"economy", to_json(rc.economy)}, {"grid", to_json(rc.grid)}, {"runs", runs}};
  write_json(rc.output_dir / "sample.json", report);
  return Json{{"command", "sample"}, {"runs", runs}};
}

Json cmd_fit(const Flags& f) {
  require(!f.data.empty(), ErrorKind::parse, "fit needs --data PATH");
  SampleFormat fmt = SampleFormat::automatic;
  if (f.format == "values") fmt = SampleFormat::values;
  else if (f.format == "counts") fmt = SampleFormat::counts;
  const SampleSet samples = load_samples(f.data, fmt);
  const fs::path out = out_dir(f);
  Json report{{"source", samples.source}, {"n", samples.values.size()}};
  const auto expo = fit_boltzmann(samples, f.tail_quantile);
  report["boltzmann"] = to_json(expo);
  report["boltzmann"]["goodness_of_fit"] = to_json(goodness_of_fit(samples, expo));
  if (samples.values.size() >= 100) {
    const auto be = fit_bose_einstein(samples, f.bins);
    report["bose_einstein"] = to_json(be);
    report["bose_einstein"]["goodness_of_fit"] = to_json(goodness_of_fit(samples, be));
    write_text(out / "bins.csv", bins_csv(be));
    report["preferred"] = be.ks_statistic < expo.ks_statistic ? "bose_einstein" : "boltzmann";
  } else {
    report["bose_einstein"] = Json{{"skipped", "needs at least 100 samples"}};
    report["preferred"] = "boltzmann";
  }
  write_json(out / "fit.json", report);
  return Json{{"command", "fit"}, {"preferred", report["preferred"]}, {"n", samples.values.size()}};
}

Json cmd_macro(const RunConfig& rc, const Flags& f) {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> occ;
  if (f.alpha || f.beta) {
    require(f.alpha && f.beta, ErrorKind::parse, "--alpha and --beta go together");
    alpha = *f.alpha;
    beta = *f.beta;
    occ = occupancy(alpha, beta, rc.grid, rc.economy.regime);
  } else {
    const auto sol = solve_multipliers(rc.grid, rc.economy);
    if (sol.boundary) fail(ErrorKind::domain, "boundary economy has no finite multipliers to map");
    if (!sol.converged) fail(ErrorKind::nonconvergence, "maxent solver did not converge");
    alpha = sol.alpha;
    beta = sol.beta;
    occ = sol.occupancy;
  }
  Json report = macro_report(rc, alpha, beta, occ);
  report["occupancy"] = occ;
  const auto grad = log_W_gradient(alpha, beta, rc.grid, rc.economy.regime);
  report["lnW"] = log_W(alpha, beta, rc.grid, rc.economy.regime);
  report["dlnW_dalpha"] = grad.d_alpha;
  report["dlnW_dbeta"] = grad.d_beta;
  write_json(rc.output_dir / "macro.json", report);
  return Json{{"command", "macro"}, {"mu", report["mu"]}, {"theta", report["theta"]}, {"T", report["T"]}};
}

int cmd_check(const RunConfig& rc, const Flags& f, Json& summary) {
  CheckOptions opt;
  opt.seed = rc.sampling.seeds.front();
  opt.draws = rc.sampling.draws;
  opt.outcome_cap = rc.outcome_cap;
  opt.fault = f.fault;
  const auto results = run_checks(rc, opt);
  Json list = Json::array();
  std::vector<std::string> failed;
  for (const auto& r : results) {
    write_json(rc.output_dir / "checks" / (r.name + ".json"), to_json(r));
    list.push_back(Json{{"name", r.name}, {"passed", r.passed}, {"informational", r.informational}});
    if (!r.passed && !r.informational)
      for (const auto& why : r.failures) failed.push_back(r.name + ": " + why);
  }
  summary = Json{{"command", "check"}, {"passed", failed.empty()}, {"checks", list}, {"failures", failed}};
  write_json(rc.output_dir / "check.json", summary);
  for (const auto& why : failed) std::cerr << "FAILED " << why << '\n';
  return failed.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spontaneous economic order: counting, maxent solving, sampling and fitting"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", f.out, "Output directory");
  };
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--regime", f.regime, "Override regime: mon | per")->check(CLI::IsMember({"mon", "per"}));
    add_common(sub);
  };

  auto* enumerate = app.add_subcommand("enumerate", "Catalog feasible orders with exact probabilities");
  add_config(enumerate);
  auto* solve = app.add_subcommand("solve", "Solve the maxent multipliers and check for condensation");
  add_config(solve);
  solve->add_option("--lambda", f.lambda, "Scale constant lambda (default from config, else 1)");
  auto* sample = app.add_subcommand("sample", "Draw equilibrium outcomes uniformly");
  add_config(sample);
  sample->add_option("--seed", f.seeds, "Seed; repeat for several runs");
  auto* fit = app.add_subcommand("fit", "Fit exponential and Bose-Einstein laws to samples");
  fit->add_option("--data", f.data, "CSV with one value per row, or value,count")->required();
  fit->add_option("--tail-quantile", f.tail_quantile, "Upper tail fraction dropped before the exponential fit")
      ->check(CLI::Range(0.0, 0.2));
  fit->add_option("--bins", f.bins, "Histogram bins for the Bose-Einstein fit")->check(CLI::PositiveNumber);
  fit->add_option("--format", f.format, "auto | values | counts")->check(CLI::IsMember({"auto", "values", "counts"}));
  add_common(fit);
  auto* macro = app.add_subcommand("macro", "Map multipliers to (mu, theta, T)");
  add_config(macro);
  macro->add_option("--lambda", f.lambda, "Scale constant lambda");
  macro->add_option("--alpha", f.alpha, "Use these multipliers instead of solving");
  macro->add_option("--beta", f.beta, "Use these multipliers instead of solving");
  auto* check = app.add_subcommand("check", "Run the invariant suites end to end");
  add_config(check);
  check->add_option("--seed", f.seeds, "Seed for the randomized suites");
  check->add_option("--fault-inject", f.fault, "Test hook")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << error_json(ErrorKind::parse, e.what()).dump(2) << '\n';
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    Json summary;
    int code = 0;
    if (*fit) {
      summary = cmd_fit(f);
    } else {
      const RunConfig rc = load(f);
      if (*enumerate) summary = cmd_enumerate(rc);
      if (*solve) summary = cmd_solve(rc);
      if (*sample) summary = cmd_sample(rc);
      if (*macro) summary = cmd_macro(rc, f);
      if (*check) code = cmd_check(rc, f, summary);
    }
    std::cout << summary.dump(2) << '\n';
    return code;
  } catch (const Error& e) {
    std::cout << error_json(e.kind(), e.what()).dump(2) << '\n';
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cout << Json{{"error", {{"kind", "internal"}, {"message", e.what()}, {"exit_code", 1}}}}.dump(2) << '\n';
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
