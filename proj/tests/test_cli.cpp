#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "kz/io.hpp"

using namespace kz;
namespace fs = std::filesystem;

namespace {

const std::string bin = KZL1_BIN;
const std::string configs = KZL1_CONFIGS;

fs::path scratch() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("kzl1_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& env = {}) {
  std::string cmd = env + (env.empty() ? "" : " ") + bin + " " + args + " 2>" + (scratch() / "stderr.txt").string();
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

const json* find_check(const json& rep, const std::string& name) {
  for (auto& c : rep["checks"])
    if (c["name"] == name) return &c;
  return nullptr;
}

}  // namespace

TEST(Cli, SolveLeadingCoefficientSample) {
  auto out = scratch() / "lead.json";
  ASSERT_EQ(run("solve --config " + configs + "/leading_coefficient.json --json " + out.string()), 0);
  auto rep = load(out);
  EXPECT_EQ(rep["schema"], "kzl1.report/1");
  auto& M = rep["results"]["solution"]["M"];
  EXPECT_NEAR(M["value"].get<double>(), 0.25, 1e-3);
  EXPECT_TRUE(M.contains("tolerance"));
  EXPECT_TRUE(M.contains("grid_level"));
  EXPECT_TRUE(rep["pass"].get<bool>());
}

TEST(Cli, IdenticalConfigGivesIdenticalReport) {
  auto a = scratch() / "det_a.json", b = scratch() / "det_b.json";
  std::string cfg = configs + "/halfline_truncation.json";
  ASSERT_EQ(run("solve --config " + cfg + " --json " + a.string(), "KZ_THREADS=1"), 0);
  ASSERT_EQ(run("solve --config " + cfg + " --json " + b.string(), "KZ_THREADS=4"), 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, VerifyAcceptsStoredSolution) {
  auto sol = scratch() / "trunc.json", ver = scratch() / "trunc_verify.json";
  ASSERT_EQ(run("solve --config " + configs + "/halfline_truncation.json --json " + sol.string()), 0);
  ASSERT_EQ(run("verify --solution " + sol.string() + " --json " + ver.string()), 0);
  auto rep = load(ver);
  for (auto name : {"zero_condition_residual", "max_zeros_per_gap", "representation_residual", "error_identity_residual"})
    ASSERT_NE(find_check(rep, name), nullptr) << name;
}

TEST(Cli, VerifyRejectsInjectedGapZeros) {
  auto sol = scratch() / "inj.json", bad = scratch() / "inj_bad.json";
  ASSERT_EQ(run("solve --config " + configs + "/two_band_dual.json --json " + sol.string()), 0);
  auto rep = load(sol);
  // Two extra zeros in the gap (-0.3, 0.3).
  auto& s = rep["results"]["solution"];
  auto z = s["zeros"].get<std::vector<double>>();
  auto m = s["zero_multiplicities"].get<std::vector<int>>();
  z.push_back(-0.1);
  z.push_back(0.1);
  m.push_back(1);
  m.push_back(1);
  std::sort(z.begin(), z.end());
  s["zeros"] = z;
  s["zero_multiplicities"] = m;
  std::ofstream(bad) << rep.dump(2);
  auto ver = scratch() / "inj_verify.json";
  EXPECT_EQ(run("verify --solution " + bad.string() + " --json " + ver.string()), 1);
  auto v = load(ver);
  EXPECT_FALSE(v["pass"].get<bool>());
  EXPECT_FALSE((*find_check(v, "max_zeros_per_gap"))["pass"].get<bool>());
}

TEST(Cli, MalformedConfigIsAUsageError) {
  auto cfg = scratch() / "bad.json";
  std::ofstream(cfg) << R"({"schema": "kzl1.config/1", "problem": {"bands": [[1, -1]], "degree": -2, "mode": "x"},
                          "solver": {"tolerance": -1}, "colour": 3})";
  EXPECT_EQ(run("solve --config " + cfg.string()), 2);
  auto err = slurp(scratch() / "stderr.txt");
  EXPECT_NE(err.find("problem.degree"), std::string::npos);
  EXPECT_NE(err.find("problem.mode"), std::string::npos);
  EXPECT_NE(err.find("solver.tolerance"), std::string::npos);
  EXPECT_NE(err.find("config.colour"), std::string::npos);
  std::ofstream(cfg) << "{ not json";
  EXPECT_EQ(run("solve --config " + cfg.string()), 2);
  EXPECT_EQ(run("solve"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Cli, FailedAssertionExitsOne) {
  auto cfg = scratch() / "wrong.json";
  auto j = load(configs + "/leading_coefficient.json");
  j["assertions"]["M"]["expected"] = 0.3;
  std::ofstream(cfg) << j.dump();
  EXPECT_EQ(run("solve --config " + cfg.string() + " --json " + (scratch() / "wrong_out.json").string()), 1);
}

TEST(Cli, DualCrossCheck) {
  auto out = scratch() / "dual.json";
  ASSERT_EQ(run("dual --config " + configs + "/two_band_dual.json --json " + out.string()), 0);
  auto rep = load(out);
  EXPECT_NEAR(rep["results"]["M_times_L"]["value"].get<double>(), 1.0, 2e-2);
}

TEST(Cli, TablesColumn) {
  auto out = scratch() / "tables.json", csv = scratch() / "tables.csv";
  ASSERT_EQ(run("tables --lambda 0.25 0.5 1 --json " + out.string() + " --csv " + csv.string()), 0);
  auto rep = load(out);
  std::vector<double> expect{2.0 * std::log(1.0 / std::tanh(0.25)), 2.0 * std::log(1.0 / std::tanh(0.5)),
                             2.0 * std::log(1.0 / std::tanh(1.0))};
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(rep["results"]["halfline"][i]["M_2lambda"].get<double>(), expect[i], 1e-12);
  auto text = slurp(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), "lambda,M_2lambda");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(Cli, GreenTable) {
  auto out = scratch() / "green.json", csv = scratch() / "green.csv";
  ASSERT_EQ(run("green --config " + configs + "/green_two_band.json --json " + out.string() + " --csv " + csv.string()), 0);
  auto rep = load(out);
  EXPECT_LE(rep["results"]["data"]["gap_residuals"][0].get<double>(), 1e-10);
  EXPECT_NEAR(rep["results"]["data"]["critical_points"][0].get<double>(), 0.0, 1e-10);
  EXPECT_EQ(slurp(csv).substr(0, 11), "re_z,im_z,G");
}

TEST(Config, EchoRoundTrips) {
  for (auto name : {"leading_coefficient", "two_band_dual", "halfline_truncation", "green_two_band"}) {
    auto c = parse_config(load(configs + "/" + name + ".json"));
    auto echo = config_echo(c);
    EXPECT_EQ(config_echo(parse_config(echo)), echo) << name;
  }
}

TEST(Config, CollectsAllProblems) {
  try {
    parse_config(json{{"schema", "other"}, {"problem", {{"bands", json::array()}}}, {"threads", -1}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_GE(e.problems.size(), 3u);
  }
}
