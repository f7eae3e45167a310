#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lbemc/lbemc.hpp"

namespace lbemc {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("lbemc_cli_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  // Runs the CLI with `args`; stdout lands in `out`.
  int run(const std::string& args) {
    const std::string cmd = std::string(LBEMC_CLI_PATH) + " " + args + " > " + (dir / "stdout").string() +
                            " 2> " + (dir / "stderr").string();
    const int status = std::system(cmd.c_str());
    out = slurp(dir / "stdout");
    err = slurp(dir / "stderr");
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }

  std::string sample(const std::string& name) { return std::string(LBEMC_SAMPLES_DIR) + "/" + name; }

  fs::path dir;
  std::string out, err;
};

TEST_F(CliTest, LargeBlocksProveTestLocks5WithoutRefinement) {
  const std::string stats = (dir / "out.json").string();
  ASSERT_EQ(run("--encoding lbe --abstraction boolean " + sample("test_locks_5.imp") + " --stats " + stats), 0);
  EXPECT_NE(out.find("verdict: safe"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(stats));
  EXPECT_EQ(j["verdict"], "safe");
  EXPECT_EQ(j["refinement_steps"], 0);
  EXPECT_LE(j["art_size"].get<int>(), 5);
}

TEST_F(CliTest, SingleBlocksNeedRefinement) {
  const std::string stats = (dir / "out.json").string();
  ASSERT_EQ(run("--encoding sbe --abstraction cartesian " + sample("test_locks_5.imp") + " --stats " + stats), 0);
  EXPECT_GT(nlohmann::json::parse(slurp(stats))["refinement_steps"].get<int>(), 0);
}

TEST_F(CliTest, BugGivesCounterexample) {
  EXPECT_EQ(run(sample("test_locks_3_bug.imp")), 1);
  EXPECT_NE(out.find("verdict: unsafe"), std::string::npos);
  EXPECT_NE(out.find("counterexample:"), std::string::npos);
  EXPECT_NE(out.find("witness:"), std::string::npos);
  EXPECT_EQ(run("--encoding sbe " + sample("test_locks_3_bug.imp")), 1);
}

TEST_F(CliTest, UnknownAndUsageErrors) {
  EXPECT_EQ(run("--encoding lbe --abstraction cartesian " + sample("counter.imp")), 2);
  EXPECT_NE(out.find("verdict: unknown"), std::string::npos);
  EXPECT_EQ(run((dir / "missing.imp").string()), 3);
  EXPECT_EQ(run("--encoding medium " + sample("counter.imp")), 3);
  EXPECT_EQ(run(write("bad.imp", "int x; x = y;")), 3);
  EXPECT_NE(err.find("undeclared variable"), std::string::npos);
  EXPECT_EQ(run(""), 3);
  EXPECT_EQ(run("--gen-test-locks 0"), 3);
}

TEST_F(CliTest, StdinInput) {
  const std::string file = write("p.imp", "int x; x = 1; assume(x == 1); error();");
  EXPECT_EQ(run("- < " + file), 1);
}

TEST_F(CliTest, CrosscheckAgreesOnSamples) {
  for (const char* name : {"counter.imp", "nondet_bound.imp", "test_locks_3_bug.imp"}) {
    const int code = run("--crosscheck 2 " + sample(name));
    EXPECT_TRUE(code == 0 || code == 1) << name << ": " << err;
  }
}

TEST_F(CliTest, OutputFiles) {
  const std::string cfa = (dir / "cfa.dot").string(), art = (dir / "art.dot").string(),
                    trace = (dir / "trace.jsonl").string();
  ASSERT_EQ(run(sample("counter.imp") + " --dot-cfa " + cfa + " --dot-art " + art + " --trace " + trace), 0);
  EXPECT_EQ(slurp(cfa).rfind("digraph cfa", 0), 0u);
  EXPECT_EQ(slurp(art).rfind("digraph art", 0), 0u);
  std::istringstream lines(slurp(trace));
  std::size_t n = 0;
  for (std::string line; std::getline(lines, line); ++n) EXPECT_TRUE(nlohmann::json::parse(line).contains("rule"));
  EXPECT_GT(n, 0u);
}

TEST_F(CliTest, StatsAreDeterministicApartFromWallTime) {
  const std::string a = (dir / "a.json").string(), b = (dir / "b.json").string();
  ASSERT_EQ(run("--encoding sbe " + sample("counter.imp") + " --stats " + a), 0);
  ASSERT_EQ(run("--encoding sbe " + sample("counter.imp") + " --stats " + b), 0);
  auto ja = nlohmann::json::parse(slurp(a)), jb = nlohmann::json::parse(slurp(b));
  ja.erase("wall_time_ms");
  jb.erase("wall_time_ms");
  EXPECT_EQ(ja, jb);
}

TEST_F(CliTest, GeneratorMatchesLibrary) {
  ASSERT_EQ(run("--gen-test-locks 4 --bug"), 0);
  EXPECT_EQ(out, gen_test_locks(4, true));
  EXPECT_EQ(slurp(sample("test_locks_5.imp")), gen_test_locks(5));
  EXPECT_EQ(slurp(sample("test_locks_3_bug.imp")), gen_test_locks(3, true));
}

TEST(GenTestLocks, RejectsZero) { EXPECT_THROW(gen_test_locks(0), Error); }

TEST(GenTestLocks, OracleConfirmsSafetyAndBug) {
  DomainBound b;
  b.hi = 1;
  for (std::size_t n = 1; n <= 4; ++n) {
    EXPECT_EQ(explicit_reachable(parse_program(gen_test_locks(n)), b), Reachability::NotReachable) << n;
    EXPECT_EQ(explicit_reachable(parse_program(gen_test_locks(n, true)), b), Reachability::Reachable) << n;
  }
}

}  // namespace
}  // namespace lbemc
