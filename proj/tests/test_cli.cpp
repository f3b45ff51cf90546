#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "caws/csv.hpp"
#include "caws/model.hpp"
#include "commands.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "caws");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = caws::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("caws_cli_" + std::string(info->name()) + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(CliTest, GenerateWritesHeaderAndRows) {
  const Outcome r = cli({"generate", "-n", "100", "--seed", "3", "--out", path("w.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(path("w.csv"));
  EXPECT_EQ(line_count(text), 101u);
  EXPECT_EQ(text.substr(0, text.find('\n')), "id,cost,capacity,mu,ctx_0,ctx_1");
  EXPECT_NE(r.out.find("N=100"), std::string::npos);

  ASSERT_EQ(cli({"generate", "-n", "100", "--seed", "3", "--out", path("w2.csv")}).code, 0);
  EXPECT_EQ(slurp(path("w2.csv")), text);
  ASSERT_EQ(cli({"generate", "-n", "100", "--seed", "4", "--out", path("w3.csv")}).code, 0);
  EXPECT_NE(slurp(path("w3.csv")), text);
}

TEST_F(CliTest, GenerateLargeIsFast) {
  const auto start = std::chrono::steady_clock::now();
  const Outcome r = cli({"generate", "-n", "100000", "--out", path("big.csv")});
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(secs, 5.0);
  EXPECT_EQ(line_count(slurp(path("big.csv"))), 100001u);
}

TEST_F(CliTest, GenerateWithTrace) {
  const Outcome r = cli({"generate", "-n", "20", "--trace-rounds", "30", "--out", path("w.csv"),
                         "--trace-out", path("t.csv"), "--mu-map", "gaussian-distance-battery"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(slurp(path("t.csv"))), 1u + 20u * 30u);
  const Outcome run = cli({"run", "--instance", path("w.csv"), "--trace", path("t.csv"), "--mu-map",
                           "gaussian-distance-battery", "--budget", "50", "-R", "2", "--out-dir",
                           path("out")});
  EXPECT_EQ(run.code, 0) << run.err;
}

TEST_F(CliTest, RunWritesOneRow) {
  const Outcome r = cli({"run", "--policy", "caws", "--budget", "200", "-n", "300", "-R", "2",
                         "--out-dir", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(path("out/summary.csv"));
  EXPECT_EQ(line_count(text), 3u);
  EXPECT_EQ(text.rfind("# caws ", 0), 0u);
  EXPECT_NE(text.find("\ncaws,200,300,2,"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("out/steps.csv")));
}

std::string strip_policy_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::string outp;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    outp += line.substr(line.find(',') + 1) + '\n';
  }
  return outp;
}

TEST_F(CliTest, BkubeMatchesSingletonCaws) {
  const std::vector<std::string> common{"--budget", "150", "-n", "200", "-R", "2", "--log-steps"};
  std::vector<std::string> a{"run", "--policy", "bkube", "--out-dir", path("a")};
  std::vector<std::string> b{"run", "--policy", "caws", "--granularity", "singleton", "--out-dir",
                             path("b")};
  a.insert(a.end(), common.begin(), common.end());
  b.insert(b.end(), common.begin(), common.end());
  ASSERT_EQ(cli(a).code, 0);
  ASSERT_EQ(cli(b).code, 0);
  const std::string sa = slurp(path("a/steps.csv"));
  ASSERT_GT(line_count(sa), 100u);
  EXPECT_EQ(strip_policy_column(sa), strip_policy_column(slurp(path("b/steps.csv"))));
}

TEST_F(CliTest, SweepGrid) {
  const Outcome r = cli({"sweep", "--policies", "caws,random", "--budget-range", "50:150:50", "-n",
                         "100,200", "-R", "1", "--out-dir", path("s")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(slurp(path("s/summary.csv"))), 2u + 2u * 3u * 2u);
  EXPECT_NE(cli({"sweep", "--budgets", "5", "--budget-range", "1:2:1", "--out-dir", path("x")}).code,
            0);
}

TEST_F(CliTest, ConfigFile) {
  std::ofstream(path("c.json")) << R"({"workers": 100, "budgets": [40, 80], "replications": 1,
                                      "policies": ["oracle", "caws"]})";
  const Outcome r = cli({"sweep", "--config", path("c.json"), "--out-dir", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(slurp(path("o/summary.csv"))), 6u);
  std::ofstream(path("bad.json")) << R"({"budgetz": 1})";
  const Outcome bad = cli({"sweep", "--config", path("bad.json"), "--out-dir", path("o2")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("budgetz"), std::string::npos);
}

TEST_F(CliTest, BoundWorkedExample) {
  const Outcome r = cli({"bound", "--budget", "16", "--dimension", "1", "--alpha", "1", "--L", "1",
                         "--c-min", "1", "--c-max", "1", "--tau-max", "1", "--delta-min", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("d: 4\n"), std::string::npos);
  EXPECT_NE(r.out.find("Delta: 0.25\n"), std::string::npos);
  EXPECT_NE(r.out.find("xi: 9\n"), std::string::npos);
  EXPECT_NE(r.out.find("bound: 252.945333070835"), std::string::npos) << r.out;

  const Outcome inf = cli({"bound", "--budget", "16"});
  ASSERT_EQ(inf.code, 0);
  EXPECT_NE(inf.out.find("bound: not finite"), std::string::npos);
}

TEST_F(CliTest, UnwritablePathFailsWithOneLine) {
  fs::create_directories(path("locked"));
  std::ofstream(path("locked/file")) << "x";
  // A regular file where a directory is expected cannot be written through.
  const Outcome r = cli({"run", "--budget", "20", "-n", "30", "-R", "1", "--out-dir",
                         path("locked/file/sub")});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(line_count(r.err), 1u);
  EXPECT_EQ(r.err.rfind("caws: ", 0), 0u);
}

TEST_F(CliTest, AtomicWriteLeavesNoPartialFile) {
  const fs::path target = path("summary.csv");
  EXPECT_THROW(caws::csv::write_atomically(target,
                                           [](std::ostream& os) {
                                             os << "partial";
                                             throw caws::Error("boom");
                                           }),
               caws::Error);
  EXPECT_FALSE(fs::exists(target));
  EXPECT_FALSE(fs::exists(target.string() + ".tmp"));
}

TEST_F(CliTest, ParseErrorsAndHelp) {
  EXPECT_EQ(cli({"run", "--budget", "abc"}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({"run", "--policy", "ucb", "--out-dir", path("p")}).code, 1);
}

TEST_F(CliTest, Selftest) {
  const Outcome r = cli({"selftest"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("selftest: 7 passed, 0 failed"), std::string::npos) << r.out;
}

}  // namespace
