// Runs the econorder executable end to end.
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = ECONORDER_CLI;
const fs::path kConfigs = ECONORDER_CONFIGS;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh scratch directory named after the running test.
fs::path scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() / ("econorder_cli_" + std::string(info->name()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run run(const fs::path& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "'" + kCli + "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string config(const std::string& name) { return "--config '" + (kConfigs / name).string() + "'"; }

std::string out_dir(const fs::path& p) { return "--out '" + p.string() + "'"; }

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

// Every regular file under `root`, relative path -> bytes.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST(Cli, enumerate_two_firm_economy) {
  const auto dir = scratch();
  const auto r = run(dir, "enumerate " + config("example4_1.ini") + " " + out_dir(dir / "o"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "o" / "orders.csv"),
            "occupancy,multiplicity,probability_num,probability_den,probability_float\n"
            "1;1,2,1,2,0.5\n"
            "0;2,1,1,4,0.25\n"
            "2;0,1,1,4,0.25\n");
  const auto s = read_json(dir / "o" / "spontaneous.json");
  EXPECT_EQ(s["spontaneous_order"], nlohmann::json::array({1, 1}));
  EXPECT_EQ(nlohmann::json::parse(r.out)["total_outcomes"], "4");
}

TEST(Cli, enumerate_constrained_and_single_firm) {
  const auto dir = scratch();
  auto r = run(dir, "enumerate " + config("example4_1_constrained.ini") + " " + out_dir(dir / "a"));
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = lines(slurp(dir / "a" / "orders.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], "1;1,2,1,1,1");

  r = run(dir, "enumerate " + config("single_firm.ini") + " " + out_dir(dir / "b"));
  ASSERT_EQ(r.code, 0) << r.err;
  rows = lines(slurp(dir / "b" / "orders.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], "0;1;0,1,1,1,1");
}

TEST(Cli, regime_flag_overrides_config) {
  const auto dir = scratch();
  const auto r = run(dir, "enumerate " + config("example4_1.ini") + " --regime per " + out_dir(dir / "o"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(slurp(dir / "o" / "orders.csv"));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NE(rows[i].find(",1,1,3,"), std::string::npos) << rows[i];
}

TEST(Cli, solve_examples) {
  const auto dir = scratch();
  auto r = run(dir, "solve " + config("two_level.ini") + " " + out_dir(dir / "a"));
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = read_json(dir / "a" / "solution.json");
  auto sol = report["solution"];
  ASSERT_EQ(sol["occupancy"].size(), 2u);
  EXPECT_NEAR(sol["occupancy"][0].get<double>(), 6.0, 1e-9);
  EXPECT_NEAR(sol["occupancy"][1].get<double>(), 4.0, 1e-9);
  const auto csv = lines(slurp(dir / "a" / "occupancy.csv"));
  EXPECT_EQ(csv.size(), 3u);
  for (const char* key : {"mu", "theta", "lambda", "alpha", "beta", "T", "lnOmega", "identity_residual", "best_sign"})
    EXPECT_TRUE(report["macro"].contains(key)) << key;

  r = run(dir, "solve " + config("near_condensation.ini") + " " + out_dir(dir / "b"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(read_json(dir / "b" / "solution.json")["condensation"]["condensed"].get<bool>());

  r = run(dir, "solve " + config("boundary.ini") + " " + out_dir(dir / "c"));
  ASSERT_EQ(r.code, 0) << r.err;
  sol = read_json(dir / "c" / "solution.json")["solution"];
  EXPECT_TRUE(sol["boundary"].get<bool>());
  EXPECT_TRUE(sol["alpha"].is_null());
  EXPECT_EQ(sol["occupancy"], nlohmann::json::array({5.0, 0.0, 0.0}));
}

TEST(Cli, sample_writes_one_table_per_seed) {
  const auto dir = scratch();
  const auto r = run(dir, "sample " + config("sampling.ini") + " --seed 5 --seed 9 " + out_dir(dir / "o"));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"frequencies_seed5.csv", "frequencies_seed9.csv", "sample.json"})
    EXPECT_TRUE(fs::exists(dir / "o" / f)) << f;
  EXPECT_FALSE(fs::exists(dir / "o" / "frequencies_seed1.csv"));
  const auto report = read_json(dir / "o" / "sample.json");
  for (const auto& run : report["runs"]) EXPECT_TRUE(run["chi_square"]["support_ok"].get<bool>());
}

TEST(Cli, sample_constrained_two_firm_economy_hits_one_order) {
  const auto dir = scratch();
  const auto r = run(dir, "sample " + config("example4_1_constrained.ini") + " --seed 3 " + out_dir(dir / "o"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(slurp(dir / "o" / "frequencies_seed3.csv"));
  int visited = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].rfind("1;1,", 0) == 0) {
      ++visited;
      continue;
    }
    // Other rows, if listed, were never drawn.
    EXPECT_NE(rows[i].find(",0,"), std::string::npos) << rows[i];
  }
  EXPECT_EQ(visited, 1);
}

TEST(Cli, fit_recovers_exponential_temperature) {
  const auto dir = scratch();
  std::mt19937_64 rng(17);
  std::exponential_distribution<double> d(0.1);
  std::ostringstream data;
  data << "revenue\n";
  for (int i = 0; i < 20'000; ++i) data << d(rng) << '\n';
  const auto path = write_file(dir / "data.csv", data.str());
  const auto r = run(dir, "fit --data '" + path.string() + "' " + out_dir(dir / "o"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fit = read_json(dir / "o" / "fit.json");
  EXPECT_NEAR(fit["boltzmann"]["temperature"].get<double>(), 10.0, 0.3);
  EXPECT_TRUE(fit["bose_einstein"].contains("mu"));
  EXPECT_TRUE(fs::exists(dir / "o" / "bins.csv"));
}

TEST(Cli, macro_maps_multipliers) {
  const auto dir = scratch();
  const auto r = run(dir, "macro " + config("two_level.ini") + " --alpha -2.197225 --beta 0.405465 " +
                              out_dir(dir / "o"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = read_json(dir / "o" / "macro.json");
  EXPECT_NEAR(m["mu"].get<double>(), 5.419, 5e-4);
  EXPECT_NEAR(m["theta"].get<double>(), 2.466, 5e-4);
}

TEST(Cli, exit_codes) {
  const auto dir = scratch();
  const auto infeasible = write_file(dir / "infeasible.ini", "[economy]\nN = 3\nPi = 7\n[grid]\nlevels = 2, 4\n");
  auto r = run(dir, "enumerate --config '" + infeasible.string() + "' " + out_dir(dir / "a"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(nlohmann::json::parse(r.out)["error"]["kind"], "infeasible");
  // Pi/N = 7/3 admits a continuous maxent solution; outside [eps_1, eps_n] it does not.
  const auto outside = write_file(dir / "outside.ini", "[economy]\nN = 3\nPi = 13\n[grid]\nlevels = 2, 4\n");
  r = run(dir, "solve --config '" + outside.string() + "' " + out_dir(dir / "a"));
  EXPECT_EQ(r.code, 2);

  const auto big =
      write_file(dir / "big.ini", "[economy]\nN = 12\n[grid]\nlevels = 1, 2, 3\ndegeneracies = 3, 3, 3\n"
                                  "[caps]\noutcomes = 100\n");
  r = run(dir, "enumerate --config '" + big.string() + "' " + out_dir(dir / "b"));
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("282429536481"), std::string::npos) << r.err;

  std::string flat = "0\n";
  for (int i = 0; i < 20; ++i) flat += "10\n";
  const auto body = write_file(dir / "flat.csv", flat);
  r = run(dir, "fit --data '" + body.string() + "' --tail-quantile 0.05 " + out_dir(dir / "c"));
  EXPECT_EQ(r.code, 3);

  const auto same = write_file(dir / "same.csv", "4\n4\n");
  r = run(dir, "fit --data '" + same.string() + "' " + out_dir(dir / "d"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("zero temperature"), std::string::npos);

  const auto bad = write_file(dir / "bad.ini", "[economy]\nN = 2\n[grid]\nlevels = 1, 2\ndegeneracies = 1\n");
  r = run(dir, "solve --config '" + bad.string() + "'");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("grid.degeneracies"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "solution.json"));

  EXPECT_EQ(run(dir, "solve --config '" + (dir / "missing.ini").string() + "'").code, 1);
  EXPECT_EQ(run(dir, "enumerate").code, 1);
  EXPECT_EQ(run(dir, "fit --data x.csv --tail-quantile 0.5").code, 1);
}

TEST(Cli, check_fault_injection_names_the_order) {
  const auto dir = scratch();
  const auto r = run(dir, "check " + config("check.ini") + " --fault-inject multiplicity " + out_dir(dir / "o"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("FAILED counting_oracle"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("order "), std::string::npos) << r.err;
  EXPECT_FALSE(read_json(dir / "o" / "check.json")["passed"].get<bool>());
}

TEST(Cli, reruns_are_byte_identical) {
  const auto dir = scratch();
  const std::vector<std::string> commands{
      "enumerate " + config("example4_1.ini"),
      "solve " + config("near_condensation.ini"),
      "sample " + config("sampling.ini"),
      "macro " + config("centered.ini"),
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const auto a = dir / ("a" + std::to_string(i));
    const auto b = dir / ("b" + std::to_string(i));
    const auto ra = run(dir, commands[i] + " " + out_dir(a));
    const auto rb = run(dir, commands[i] + " " + out_dir(b));
    ASSERT_EQ(ra.code, 0) << commands[i] << "\n" << ra.err;
    EXPECT_EQ(ra.out, rb.out) << commands[i];
    const auto ta = tree(a);
    EXPECT_FALSE(ta.empty());
    EXPECT_EQ(ta, tree(b)) << commands[i];
  }
}
