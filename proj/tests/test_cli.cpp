#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcs/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  args.insert(args.begin(), "rcs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = rcs::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args) {
  Invocation r = run(std::move(args));
  EXPECT_EQ(r.code, 0) << r.err;
  return json::parse(r.out);
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("rcs_cli_" + name); }

}  // namespace

TEST(Cli, SurvivalReport) {
  json j = run_json({"survival", "--k", "2", "--ell", "1", "--depth", "8", "--trials", "20000", "--seed", "7"});
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["command"], "survival");
  EXPECT_EQ(j["status"], "OK");
  EXPECT_TRUE(j.contains("timestamp"));
  EXPECT_EQ(j["result"]["reports"].size(), 8u);
  EXPECT_NEAR(j["result"]["limit"].get<double>(), 0.91262, 5e-4);
}

TEST(Cli, ArgsVerbatim) {
  json j = run_json({"pairprob", "--k", "2", "--ell", "2/2", "--sigma", "3,2,1", "--tau", "3,0,1", "--trials",
                     "1000", "--seed", "0x10", "--no-timestamp"});
  EXPECT_EQ(j["args"]["--ell"], "2/2");
  EXPECT_EQ(j["args"]["--sigma"], "3,2,1");
  EXPECT_EQ(j["args"]["--seed"], "0x10");
  EXPECT_EQ(j["args"]["--trials"], "1000");
  EXPECT_FALSE(j["args"].contains("--depth"));
  EXPECT_EQ(j["result"]["exact"]["exponent"], "-5/1");
}

TEST(Cli, ByteIdenticalWithoutTimestamp) {
  std::vector<std::string> args{"hitprob", "--k", "2", "--depth", "4", "--trials", "5000", "--seed", "3",
                                "--target", "01,110", "--no-timestamp"};
  Invocation a = run(args);
  args.push_back("--threads");
  args.push_back("3");
  Invocation b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, run({"hitprob", "--k", "2", "--depth", "4", "--trials", "5000", "--seed", "3", "--target",
                        "01,110", "--no-timestamp"})
                       .out);
  EXPECT_EQ(json::parse(a.out)["result"], json::parse(b.out)["result"]);
  EXPECT_EQ(a.out.find("runtime"), std::string::npos);
}

TEST(Cli, EnergyUniform) {
  json j = run_json({"energy", "--measure", "uniform", "--gamma", "1/2"});
  EXPECT_NEAR(j["result"]["energy"]["total"].get<double>(), 1.7071067811865475, 1e-9);
  json b = run_json({"energy", "--measure", "diluted", "--measure-depth", "16", "--gamma", "1/4", "--beta", "1/2",
                     "--c-r", "1"});
  EXPECT_LE(b["result"]["energy"]["total"].get<double>(), b["result"]["energy"]["bound"].get<double>());
}

TEST(Cli, MeasureAndTargetFiles) {
  fs::path m = temp_file("measure.json"), t = temp_file("target.json");
  std::ofstream(m) << R"({"depth": 2, "masses": {"00": "1/4", "01": "1/4", "10": "1/2"}})";
  std::ofstream(t) << R"({"cylinders": ["10"]})";
  json cap = run_json({"capacity", "--measure", m.string(), "--gamma", "1"});
  EXPECT_DOUBLE_EQ(cap["result"]["c_r"].get<double>(), 2.0);
  json mom = run_json({"moments", "--k", "1", "--depth", "2", "--measure", m.string(), "--target-file", t.string()});
  EXPECT_EQ(mom["result"]["moments"]["mu_A"]["exact"], "1/2");
  fs::remove(m);
  fs::remove(t);
}

TEST(Cli, MomentsWorkedCase) {
  json j = run_json({"moments", "--k", "2", "--ell", "1", "--n", "2", "--measure", "uniform", "--measure-depth", "2"});
  EXPECT_EQ(j["result"]["moments"]["first_moment"]["exact"], "1/1");
  EXPECT_EQ(j["result"]["moments"]["second_moment"]["exact"], "5/4");
  EXPECT_DOUBLE_EQ(j["result"]["moments"]["pz_bound"].get<double>(), 0.8);
}

TEST(Cli, SampleExtractReconstruct) {
  fs::path tree = temp_file("tree.json"), tree_only = temp_file("tree_only.json");
  Invocation s = run({"sample", "--k", "2", "--depth", "4", "--seed", "5", "--output", tree.string()});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_TRUE(s.out.empty());
  json report = json::parse(std::ifstream(tree));
  std::ofstream(tree_only) << report["result"]["tree"].dump();
  json e = run_json({"extract", "--k", "2", "--depth", "4", "--seed", "5", "--x", "00000000"});
  json f = run_json({"extract", "--k", "2", "--tree-file", tree_only.string(), "--x", "00000000"});
  EXPECT_EQ(e["result"]["Y"], f["result"]["Y"]);
  json r = run_json({"reconstruct", "--k", "2", "--subset", "1", "--length", "2"});
  EXPECT_EQ(r["result"]["x"], "01");
  fs::remove(tree);
  fs::remove(tree_only);
}

TEST(Cli, ReconstructWorkedExample) {
  json r = run_json({"reconstruct", "--k", "2", "--subset", "3;3,2", "--length", "4"});
  EXPECT_EQ(r["result"]["x"], "1110");
}

TEST(Cli, CsvOutput) {
  Invocation r = run({"survival", "--depth", "3", "--trials", "1000", "--format", "csv", "--no-timestamp"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("name,depth,trials,successes,", 0), 0u);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
  Invocation s = run({"sample", "--k", "1", "--depth", "2", "--seed", "1", "--format", "csv"});
  EXPECT_EQ(s.out.rfind("level,string\n", 0), 0u);
  Invocation e = run({"energy", "--format", "csv"});
  EXPECT_EQ(e.out.rfind("key,value\n", 0), 0u);
}

TEST(Cli, PipelineAndBeamSplitter) {
  json p = run_json({"pipeline", "--k", "4", "--depth", "2", "--trials", "2000", "--seed", "1", "--no-timestamp"});
  EXPECT_TRUE(p["result"]["round_trip_ok"].get<bool>());
  json b = run_json({"beamsplitter", "--eta", "1", "--photons", "50", "--max-listed", "50"});
  EXPECT_EQ(b["result"]["detected"], 50);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, rcs::cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, rcs::cli::kExitUsage);
  EXPECT_EQ(run({"survival", "--trials", "0"}).code, rcs::cli::kExitUsage);
  EXPECT_EQ(run({"pairprob", "--sigma", "1,2"}).code, rcs::cli::kExitUsage);
  EXPECT_EQ(run({"pairprob", "--sigma", "1,2", "--tau", "1"}).code, rcs::cli::kExitUsage);
  EXPECT_EQ(run({"sample", "--ell", "0"}).code, rcs::cli::kExitUsage);
  EXPECT_EQ(run({"energy", "--measure", "/nonexistent/measure.json"}).code, rcs::cli::kExitUsage);
  EXPECT_EQ(run({"energy", "--gamma", "1/2", "--beta", "1/4"}).code, rcs::cli::kExitUsage);
  EXPECT_EQ(run({"beamsplitter", "--eta", "0"}).code, rcs::cli::kExitUsage);
  EXPECT_EQ(run({"reconstruct", "--subset", "3;2", "--length", "2"}).code, rcs::cli::kExitUsage);
  EXPECT_EQ(run({"survival", "--format", "xml"}).code, rcs::cli::kExitUsage);
  Invocation bad = run({"survival", "--k", "99"});
  EXPECT_EQ(bad.code, rcs::cli::kExitUsage);
  EXPECT_NE(bad.err.find("k must be"), std::string::npos);
}

TEST(Cli, Help) {
  Invocation h = run({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("interval_low"), std::string::npos);
  EXPECT_EQ(run({"survival", "--help"}).code, 0);
}

TEST(Cli, ViolationExitCode) {
  // 200 trials, six 3-sigma checks: this seed lands one estimate outside its interval.
  Invocation r = run({"survival", "--k", "2", "--ell", "1", "--depth", "6", "--trials", "200", "--seed", "318"});
  EXPECT_EQ(r.code, rcs::cli::kExitViolation);
  EXPECT_EQ(json::parse(r.out)["status"], "VIOLATION");
}
