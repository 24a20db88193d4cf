#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "srd/cli.hpp"

using namespace srd;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "srd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / ("srd_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Cli, BoundsCsvHeaderAndRows) {
  const auto r = run({"bounds", "--omega", "0.01", "--bounds", "p3,t2", "--grid", "0.01,0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(r.out), "bound,rho,alpha,beta_star");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST(Cli, BoundsOverRhoInverts) {
  const auto r = run({"bounds", "--omega", "0.01", "--bounds", "p3", "--over", "rho", "--grid", "0.005,0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"bounds", "--bounds", ""}).code, 2);
  EXPECT_EQ(run({"bounds", "--bounds", "nonsense"}).code, 2);
  EXPECT_EQ(run({"bounds", "--bounds", "p5", "--dist", "uniform"}).code, 2);
  EXPECT_EQ(run({"verify", "--suite", "bogus"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bounds", "--omega", "0.9"}).code, 2);
}

TEST(Cli, HelpIsNotAnError) {
  const auto r = run({"bounds", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--omega"), std::string::npos);
}

TEST(Cli, BudgetRefusal) {
  const auto r = run({"simulate", "--n", "28", "--omega", "0.5", "--rho", "0.5", "--trials", "1"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("refused"), std::string::npos);
}

TEST(Cli, SnrCurveHeader) {
  const auto r = run({"snr-curve", "--grid", "-10,40"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(r.out), "snr_db,rho,winner,winner_bound,rho_pointmass,bound_pointmass,rho_sliced,bound_sliced");
}

TEST(Cli, TruncateTable) {
  const auto r = run({"truncate-table", "--dist", "gaussian", "--grid", "0.5,1", "--bits"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(r.out), "dist,beta,threshold,mean,variance,second_moment,entropy");
}

TEST(Cli, VerifySuiteReportsPass) {
  const auto r = run({"verify", "--suite", "covering", "--n", "10", "--k", "2"});
  ASSERT_EQ(r.code, 0) << r.err << r.out;
  EXPECT_EQ(first_line(r.out), "suite,check,measured,target,gap,tolerance,pass");
}

TEST(Cli, SimulateIsDeterministic) {
  const std::vector<std::string> args = {"simulate", "--n", "16", "--omega", "0.125", "--rho", "0.25",
                                         "--snr-db", "10", "--trials", "20", "--seed", "3"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(first_line(a.out), "trial,distortion,exact,residual_min,runner_up_gap,declared_error");
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run({"simulate", "--n", "16", "--omega", "0.125", "--rho", "0.25", "--snr-db", "10",
                        "--trials", "20", "--seed", "4"}).out);
}

TEST(Cli, ManifestReplaysRun) {
  const fs::path dir = scratch_dir();
  const std::string first = (dir / "first.csv").string();
  const std::string second = (dir / "second.csv").string();
  ASSERT_EQ(run({"bounds", "--omega", "0.001", "--snr-db", "10", "--bounds", "p3,p4", "--grid", "lin:0.05:0.3:4",
                 "--out", first}).code,
            0);
  const std::string manifest = slurp(first + ".manifest");
  EXPECT_NE(manifest.find("config_hash="), std::string::npos);
  EXPECT_NE(manifest.find("command=bounds"), std::string::npos);
  ASSERT_EQ(run({"bounds", "--config", first + ".manifest", "--out", second}).code, 0);
  EXPECT_EQ(slurp(first), slurp(second));
  fs::remove_all(dir);
}

TEST(Cli, BinaryExitCodes) {
  const std::string tool = SRD_TOOL_PATH;
  EXPECT_EQ(std::system((tool + " --version > /dev/null").c_str()), 0);
  const int code = std::system((tool + " verify --suite bogus > /dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(code));
  EXPECT_EQ(WEXITSTATUS(code), 2);
}
