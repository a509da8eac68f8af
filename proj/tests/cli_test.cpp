#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixture_path.hpp"
#include "ksync/json_io.hpp"

using namespace ksync;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ksync");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json invoke_json(std::vector<std::string> args, int expected_code) {
  Outcome o = invoke(std::move(args));
  EXPECT_EQ(o.code, expected_code) << o.err;
  return json::parse(o.out);
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ksync_cli_test_" + name)).string();
}

}  // namespace

TEST(Cli, AnalyzeFiveCycle) {
  json j = invoke_json({"analyze-msc", fixture("msc/fig2c.json"), "--k", "5", "--json"}, cli::kHolds);
  EXPECT_EQ(j["causal"], true);
  EXPECT_EQ(j["causalGraph"], true);
  EXPECT_EQ(j["minK"], 5);
  EXPECT_EQ(j["maxScc"], 5);
  EXPECT_EQ(j["rsCycle"], false);

  json four = invoke_json({"analyze-msc", fixture("msc/fig2c.json"), "--k", "4", "--json"}, cli::kFails);
  EXPECT_TRUE(four["minK"].is_null());
}

TEST(Cli, AnalyzeCrossingMessages) {
  json j = invoke_json({"analyze-msc", fixture("msc/fig2a.json"), "--k", "5", "--json"}, cli::kFails);
  EXPECT_EQ(j["causal"], true);
  EXPECT_TRUE(j["minK"].is_null());
  EXPECT_EQ(j["rsCycle"], true);
}

TEST(Cli, AnalyzeEmptyAndNonCausal) {
  json e = invoke_json({"analyze-msc", fixture("msc/empty.json"), "--k", "1", "--json"}, cli::kHolds);
  EXPECT_EQ(e["causal"], true);
  EXPECT_EQ(e["minK"], 1);
  json a = invoke_json({"analyze-msc", fixture("msc/fig1a.json"), "--k", "3", "--json"}, cli::kFails);
  EXPECT_EQ(a["causal"], false);
  EXPECT_TRUE(a["minK"].is_null());
}

TEST(Cli, AnalyzeWritesDot) {
  std::string dot = temp_path("graph.dot");
  Outcome o = invoke({"analyze-msc", fixture("msc/fig1c.json"), "--k", "2", "--dot", dot});
  EXPECT_EQ(o.code, cli::kHolds);
  std::ifstream in(dot);
  std::string first;
  std::getline(in, first);
  EXPECT_NE(first.find("digraph"), std::string::npos);
  std::remove(dot.c_str());
}

TEST(Cli, DecideVerdicts) {
  json sync = invoke_json({"decide", fixture("systems/fig2b.json"), "--k", "1", "--json"}, cli::kHolds);
  Verdict v = verdict_from_json(sync);
  EXPECT_TRUE(v.synchronizable);
  EXPECT_EQ(v.command, "decide");

  std::string cex = temp_path("cex.json");
  json not_sync = invoke_json(
      {"decide", fixture("systems/fig2a.json"), "--k", "2", "--json", "--out", cex}, cli::kFails);
  EXPECT_FALSE(verdict_from_json(not_sync).synchronizable);
  std::ifstream in(cex);
  std::stringstream buf;
  buf << in.rdbuf();
  Msc msc = parse_msc(buf.str());
  EXPECT_FALSE(k_synchronous_oracle(msc, 2));
  std::remove(cex.c_str());
}

TEST(Cli, DecideIsDeterministic) {
  Outcome a = invoke({"decide", fixture("systems/fig2a.json"), "--k", "1", "--json"});
  Outcome b = invoke({"decide", fixture("systems/fig2a.json"), "--k", "1", "--json"});
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, ReachHonoursFileComm) {
  std::vector<std::string> args = {"reach", fixture("systems/divergence.json"), "--k", "1",
                                   "--goal", "p=l2", "--goal", "q=l2", "--goal", "r=l1", "--json"};
  json j = invoke_json(args, cli::kHolds);
  EXPECT_EQ(j["reachable"], true);
  EXPECT_FALSE(j["witness"].is_null());
}

TEST(Cli, ReachUnknownState) {
  Outcome o = invoke({"reach", fixture("systems/fig2b.json"), "--k", "1", "--goal", "p=nowhere"});
  EXPECT_EQ(o.code, cli::kInputError);
  EXPECT_NE(o.err.find("nowhere"), std::string::npos);
}

TEST(Cli, ExploreSummary) {
  json j = invoke_json({"explore", fixture("systems/example4.json"), "--k", "2"}, cli::kHolds);
  EXPECT_TRUE(j.contains("states"));
  EXPECT_TRUE(j.contains("transitions"));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(invoke({"decide", "no-such-file.json", "--k", "1"}).code, cli::kInputError);
  EXPECT_EQ(invoke({"decide", fixture("systems/fig2b.json")}).code, cli::kInputError);
  EXPECT_EQ(invoke({"decide", fixture("systems/fig2a.json"), "--k", "3", "--limit-states", "10"}).code,
            cli::kResourceLimit);
  EXPECT_EQ(invoke({"analyze-msc", fixture("systems/fig2b.json"), "--k", "1"}).code,
            cli::kInputError);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kInputError);
}

TEST(Cli, OracleSuiteFlags) {
  EXPECT_EQ(invoke({"oracle-suite", "--none"}).code, cli::kHolds);
  Outcome o = invoke({"oracle-suite", "--none", "--graph-mscs", "300", "--drop-rule", "4"});
  EXPECT_EQ(o.code, cli::kFails);
  EXPECT_NE(o.out.find("FAIL"), std::string::npos);
}
