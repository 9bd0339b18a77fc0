#include "resdet/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "resdet/csv.hpp"
#include "resdet/errors.hpp"
#include "resdet/scenario_io.hpp"

namespace resdet {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "resdet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string reactor_json() { return std::string(RESDET_SOURCE_DIR) + "/data/reactor.json"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("resdet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_scenario(const std::string& name, const json& doc) const {
    std::ofstream(path(name)) << doc.dump();
    return path(name);
  }

  fs::path dir_;
};

json reactor_doc() { return read_json_file(reactor_json()); }

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(0.1 + 0.2), "0.3");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(892709.6184812459), "892709.618481");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(-2.5e-20), "-2.5e-20");
  EXPECT_EQ(format_number(7.0), "7");
}

TEST(CliTune, PrintsThresholdJson) {
  Result r = cli({"tune", "--detector", "windowed", "--sensors", "3", "--window", "4", "--far", "0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  json doc = json::parse(r.out);
  EXPECT_NEAR(doc["threshold"].get<double>(), 21.03, 0.005);
  EXPECT_EQ(doc["detector"], "windowed");
  EXPECT_EQ(doc["params"]["window"], 4);
  EXPECT_EQ(doc["far"], 0.05);

  r = cli({"tune", "--detector", "chi2", "--sensors", "3", "--far", "0.05"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(json::parse(r.out)["threshold"].get<double>(), 7.81, 0.005);
}

TEST(CliTune, UsageErrors) {
  Result r = cli({"tune", "--detector", "windowed", "--sensors", "3", "--window", "0", "--far", "0.05"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("window must be >= 1"), std::string::npos);
  EXPECT_EQ(cli({"tune", "--detector", "chi2", "--sensors", "3", "--far", "1.5"}).code, 2);
  EXPECT_EQ(cli({"tune", "--detector", "median", "--sensors", "3", "--far", "0.05"}).code, 2);
  EXPECT_EQ(cli({"tune", "--detector", "cusum", "--sensors", "3", "--far", "0.05"}).code, 2);
  EXPECT_EQ(cli({"tune", "--bogus"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(CliFiles, TuneCusumNeedsScenario) {
  Result r = cli({"tune", "--detector", "cusum", "--far", "0.05", "--bias", "3", "--scenario",
                  reactor_json(), "--mc", "100000", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  json doc = json::parse(r.out);
  EXPECT_GT(doc["threshold"].get<double>(), 0.0);
  EXPECT_EQ(doc["params"]["seed"], 5);
  EXPECT_NEAR(doc["achieved_rate"].get<double>(), 0.05, 0.003);
}

TEST_F(CliFiles, SimulateReactorChiSquared) {
  json doc = reactor_doc();
  doc["sim"]["mc_runs"] = 50;
  const std::string scenario = write_scenario("s.json", doc);
  Result r = cli({"simulate", "--scenario", scenario, "--out", path("t.csv"), "--summary",
                  path("sum.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json summary = json::parse(slurp(path("sum.json")));
  EXPECT_LE(summary["relative_error"].get<double>(), 0.05);
  EXPECT_EQ(summary["alarms_steady_phase"], 0);
  ASSERT_EQ(summary["adjustments"].size(), 1u);
  const std::string csv = slurp(path("t.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,norm_x,z,stat,alarm,attack_active");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1001);

  // Same seed, same bytes.
  ASSERT_EQ(cli({"simulate", "--scenario", scenario, "--out", path("t2.csv"), "--summary",
                 path("sum2.json")}).code, 0);
  EXPECT_EQ(csv, slurp(path("t2.csv")));
  ASSERT_EQ(cli({"simulate", "--scenario", scenario, "--out", path("t3.csv"), "--summary",
                 path("sum3.json"), "--seed", "99"}).code, 0);
  EXPECT_NE(csv, slurp(path("t3.csv")));
}

TEST_F(CliFiles, SimulateWithoutAttack) {
  json doc = reactor_doc();
  doc["attack"] = {{"kind", "none"}};
  doc["sim"]["steps"] = 20000;
  Result r = cli({"simulate", "--scenario", write_scenario("s.json", doc), "--out", path("t.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json summary = json::parse(r.out);
  EXPECT_TRUE(summary["predicted_gamma"].is_null());
  EXPECT_NEAR(summary["alarms"].get<double>(), 0.05 * 20000, 150);
}

TEST_F(CliFiles, SimulateErrors) {
  std::ofstream(path("bad.json")) << "{\"plant\": [1, 2";
  EXPECT_EQ(cli({"simulate", "--scenario", path("bad.json"), "--out", path("t.csv")}).code, 2);
  EXPECT_EQ(cli({"simulate", "--scenario", path("missing.json"), "--out", path("t.csv")}).code, 2);

  json doc = reactor_doc();
  doc["plant"]["F"] = json::array({json::array({1.0, 2.0})});
  EXPECT_EQ(cli({"simulate", "--scenario", write_scenario("dims.json", doc), "--out", path("t.csv")}).code, 2);

  doc = reactor_doc();
  doc["controller"]["K"][2][3] = 500.0;
  Result r = cli({"simulate", "--scenario", write_scenario("unstable.json", doc), "--out", path("t.csv")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("unstable closed loop"), std::string::npos);

  doc = reactor_doc();
  doc["detector"]["colour"] = "red";
  EXPECT_EQ(cli({"simulate", "--scenario", write_scenario("extra.json", doc), "--out", path("t.csv")}).code, 2);
}

TEST_F(CliFiles, SweepContours) {
  Result r = cli({"sweep", "--sensors", "3", "--far", "0.05", "--ell-max", "60", "--out", path("c.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("c.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "far,ell,beta,beta_over_ell");
  EXPECT_NE(csv.find("\n0.05,50,179.580634154,"), std::string::npos);
  EXPECT_EQ(cli({"sweep", "--far", "1.5", "--out", path("c.csv")}).code, 2);
  EXPECT_EQ(cli({"sweep", "--far", "0.05,abc", "--out", path("c.csv")}).code, 2);
}

TEST(ScenarioLoader, DirectionsAndModes) {
  json doc = reactor_doc();
  LoadedScenario s = load_scenario(doc, 1);
  EXPECT_EQ(s.direction_label, "worst");
  EXPECT_EQ(s.scenario.seed, 1u);
  EXPECT_TRUE(s.seed_in_file);
  EXPECT_NEAR(s.scenario.detector.threshold, 7.8147, 1e-4);

  EXPECT_EQ(load_scenario(doc, 1, 42).scenario.seed, 42u);
  doc["sim"].erase("seed");
  EXPECT_EQ(load_scenario(doc, 7).scenario.seed, 7u);

  doc["attack"]["direction"] = "ones";
  s = load_scenario(doc, 1);
  ASSERT_TRUE(s.scenario.attack->fixed_offset);
  EXPECT_EQ(*s.scenario.attack->fixed_offset, Vector::Ones(3));

  doc["attack"]["direction"] = json::array({0.0, 3.0, 4.0});
  s = load_scenario(doc, 1);
  EXPECT_NEAR(s.scenario.attack->direction(2), 0.8, 1e-15);

  doc = reactor_doc();
  doc["detector"] = {{"kind", "windowed"}, {"window", 4}, {"beta", 21.03}};
  doc["attack"] = {{"kind", "matched"}, {"mode", "pulse"}};
  s = load_scenario(doc, 1);
  EXPECT_EQ(s.scenario.attack->kind, AttackKind::windowed_pulse);

  doc["attack"] = {{"mode", "exact"}};
  EXPECT_THROW(load_scenario(doc, 1), ScenarioError);

  doc = reactor_doc();
  doc["attack"]["k_star"] = 20;
  EXPECT_THROW(load_scenario(doc, 1), ScenarioError);
  doc["sim"].erase("burn_in");
  EXPECT_EQ(load_scenario(doc, 1).scenario.burn_in, 19);
}

}  // namespace
}  // namespace resdet
