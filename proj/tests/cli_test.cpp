#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bnsl/cli.hpp"
#include "test_support.hpp"

namespace bnsl {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "bnsl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("bnsl_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(tmp(name), std::ios::binary) << text;
    return tmp(name);
  }

  const std::string fixture = testing::data_path("fixture4.csv");

 private:
  fs::path dir_;
};

TEST_F(Cli, ScoreMatchesGoldenFile) {
  const Outcome r = invoke({"score", fixture});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(testing::data_path("fixture4.scores")));
  EXPECT_NE(r.err.find("parent limit: 2"), std::string::npos);
}

TEST_F(Cli, ScoreToFile) {
  ASSERT_EQ(invoke({"score", fixture, "-o", tmp("s.txt")}).code, 0);
  EXPECT_EQ(slurp(tmp("s.txt")), slurp(testing::data_path("fixture4.scores")));
}

TEST_F(Cli, MaxParentsZeroLeavesOnlyEmptySets) {
  const Outcome r = invoke({"score", fixture, "--max-parents", "0"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out,
            "n 4\nvar X1 1\n9.5 0\nvar X2 1\n9.5 0\nvar X3 1\n9.5 0\nvar X4 1\n9.1354720233997213 0\n");
}

TEST_F(Cli, RaisingTheLimitIsRejected) {
  const Outcome r = invoke({"score", fixture, "--max-parents", "3"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("limit of 2"), std::string::npos) << r.err;
}

TEST_F(Cli, LearnDynamicProgramming) {
  const Outcome r = invoke({"learn", fixture, "--algorithm", "dp", "--dot", tmp("net.dot")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["total_score"].get<double>(), 30.0);
  EXPECT_EQ(j["total_score_text"], "30");
  EXPECT_EQ(j["config"]["heuristic"], "none");
  EXPECT_EQ(j["network"].size(), 4u);
  EXPECT_EQ(slurp(tmp("net.dot")), slurp(testing::data_path("fixture4_optimum.dot")));
}

TEST_F(Cli, LearnEveryConfiguration) {
  for (const char* algorithm : {"astar", "bfbnb"}) {
    for (const std::vector<std::string>& h : std::vector<std::vector<std::string>>{
             {"--heuristic", "simple"}, {"--heuristic", "dynamic", "--k", "3"}, {"--heuristic", "static", "--groups", "1-2,3-4"}}) {
      std::vector<std::string> args{"learn", fixture, "--algorithm", algorithm};
      args.insert(args.end(), h.begin(), h.end());
      const Outcome r = invoke(args);
      ASSERT_EQ(r.code, 0) << r.err;
      const auto j = nlohmann::json::parse(r.out);
      EXPECT_NEAR(j["total_score"].get<double>(), 30.0, 1e-9) << algorithm << " " << h[1];
      EXPECT_FALSE(j["stats"].contains("search_seconds"));
    }
  }
}

TEST_F(Cli, LearnFromScoreFile) {
  const Outcome r = invoke({"learn", testing::data_path("fixture4.scores"), "--heuristic", "dynamic", "--k", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["total_score"].get<double>(), 30.0, 1e-9);
  EXPECT_TRUE(j["dataset"]["records"].is_null());
  EXPECT_EQ(j["pdb_size"], 6u);
}

TEST_F(Cli, TimingsOnRequest) {
  const Outcome r = invoke({"learn", fixture, "--timings"});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(r.out)["stats"].contains("search_seconds"));
}

TEST_F(Cli, IncoherentFlagsExitThree) {
  EXPECT_EQ(invoke({"learn", fixture, "--heuristic", "simple", "--k", "3"}).code, 3);
  EXPECT_EQ(invoke({"learn", fixture, "--heuristic", "dynamic", "--groups", "1-2,3-4"}).code, 3);
  EXPECT_EQ(invoke({"learn", fixture, "--algorithm", "dp", "--heuristic", "dynamic", "--k", "2"}).code, 3);
  EXPECT_EQ(invoke({"learn", fixture, "--algorithm", "greedy"}).code, 3);
  EXPECT_EQ(invoke({"learn", fixture, "--heuristic", "static", "--groups", "1-3"}).code, 3);
  EXPECT_EQ(invoke({"learn", fixture, "--heuristic", "dynamic", "--k", "9"}).code, 3);
  EXPECT_EQ(invoke({}).code, 3);
}

TEST_F(Cli, BadInputExitsTwo) {
  EXPECT_EQ(invoke({"learn", tmp("missing.csv")}).code, 2);
  EXPECT_EQ(invoke({"score", write("ragged.csv", "a,b\n1,2\n3\n")}).code, 2);
  EXPECT_EQ(invoke({"learn", write("bad.scores", "n 1\nvar A 1\nxyz 0\n")}).code, 2);
}

TEST_F(Cli, MemoryBudgetExitsFour) {
  std::string text;
  const Dataset d = testing::random_dataset(12, 200, 8);
  for (std::size_t v = 0; v < 12; ++v) text += (v ? "," : "") + d.names[v];
  text += "\n";
  for (std::size_t r = 0; r < d.num_records(); ++r) {
    for (std::size_t v = 0; v < 12; ++v) text += (v ? "," : "") + std::to_string(d.at(r, v));
    text += "\n";
  }
  const Outcome r = invoke({"learn", write("d12.csv", text), "--heuristic", "simple", "--mem-budget", "0"});
  EXPECT_EQ(r.code, 4);
  EXPECT_TRUE(nlohmann::json::parse(r.err.substr(r.err.find('{'))).contains("stats"));
}

TEST_F(Cli, VerifyFixturePasses) {
  const Outcome r = invoke({"verify", fixture});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("PASS cursor-equivalence"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, VerifyCatchesCorruptScores) {
  const std::string path = write("bad.scores", "n 2\nvar A 2\n5 0\n1 1 B\nvar B 1\n2 0\n");
  const Outcome r = invoke({"verify", path});
  EXPECT_EQ(r.code, 5);
  EXPECT_NE(r.out.find("FAIL sorted-score-lists"), std::string::npos);
}

TEST_F(Cli, VerifyRefusesLargeProblems) {
  std::string text = "n 15\n";
  for (int v = 0; v < 15; ++v) text += "var V" + std::to_string(v) + " 1\n1 0\n";
  const std::string path = write("big.scores", text);
  EXPECT_EQ(invoke({"verify", path}).code, 3);
  EXPECT_EQ(invoke({"verify", path, "--max-n", "15"}).code, 0);
}

TEST(Dot, EmptyAndSingleEdge) {
  LearnedNetwork empty;
  empty.parents = {VariableSet{}, VariableSet{}};
  EXPECT_EQ(emit_dot(empty, {"A", "B"}), "digraph network {\n  \"A\";\n  \"B\";\n}\n");
  LearnedNetwork edge = empty;
  edge.parents[1] = VariableSet::single(0);
  EXPECT_EQ(emit_dot(edge, {"A", "B"}), "digraph network {\n  \"A\";\n  \"B\";\n  \"A\" -> \"B\";\n}\n");
}

TEST_F(Cli, ReportsAreByteIdentical) {
  for (const std::vector<std::string>& args : std::vector<std::vector<std::string>>{
           {"learn", fixture, "--algorithm", "bfbnb", "--heuristic", "dynamic", "--seed", "7"},
           {"learn", fixture, "--algorithm", "astar"},
           {"score", fixture},
           {"verify", fixture}}) {
    const Outcome a = invoke(args);
    const Outcome b = invoke(args);
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
  }
}

#ifdef BNSL_CLI_PATH
TEST_F(Cli, InstalledBinaryMatchesInProcessRun) {
  const std::string cmd = std::string(BNSL_CLI_PATH) + " learn " + fixture + " --out " + tmp("a.json") + " 2>/dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(slurp(tmp("a.json")), invoke({"learn", fixture}).out);
  const std::string bad = std::string(BNSL_CLI_PATH) + " learn " + fixture + " --heuristic simple --k 3 2>/dev/null";
  const int status = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 3);
}
#endif

}  // namespace
}  // namespace bnsl
