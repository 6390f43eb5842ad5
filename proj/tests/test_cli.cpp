#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vyoung/cli.hpp"

using namespace vyoung::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_args(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const auto p = parse_config(args, out, err);
  if (!p.config) return {p.exit_code, out.str(), err.str()};
  const int code = run(*p.config, out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_file(const std::string& name, const std::string& text) {
  const auto path = fs::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Cli, NoArgumentsIsUsageError) {
  const auto r = run_args({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("usage"), std::string::npos);
}

TEST(Cli, ListPrintsCatalog) {
  const auto r = run_args({"--list"});
  EXPECT_EQ(r.code, 0);
  for (const auto& e : experiments()) EXPECT_NE(r.out.find(e), std::string::npos);
  EXPECT_NE(r.out.find("fbm:H="), std::string::npos);
}

TEST(Cli, BadHurstParameter) {
  const auto r = run_args({"kstar", "--kernel", "fbm:H=1.5", "--function", "t"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("H out of (0,1)"), std::string::npos);
}

TEST(Cli, UnknownIdsAndExperiments) {
  EXPECT_EQ(run_args({"kstar", "--kernel", "foo:1", "--function", "t"}).code, 2);
  EXPECT_EQ(run_args({"nonsense"}).code, 2);
  EXPECT_EQ(run_args({"pvar", "--bogus", "1"}).code, 2);
}

TEST(Cli, PvarOfMinIsOne) {
  const auto r = run_args({"pvar", "--function", "min", "--p", "1", "--grid", "64", "--expect", "1"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(r.out.rfind("pvar PASS", 0), 0u) << r.out;
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto cfg = temp_file("vyoung_cfg_test.txt",
                             "# comment\nexperiment = pvar\nfunction = min\ngrid = 8\np = 1\n");
  std::ostringstream out, err;
  const auto p = parse_config({"--config", cfg.string(), "--grid", "32"}, out, err);
  ASSERT_TRUE(p.config) << err.str();
  EXPECT_EQ(p.config->experiment, "pvar");
  EXPECT_EQ(p.config->grid, 32);
  EXPECT_EQ(p.config->function_id, "min");
  fs::remove(cfg);
}

TEST(Cli, ConfigRejectsUnknownKeys) {
  const auto cfg = temp_file("vyoung_cfg_bad.txt", "experiment = pvar\nwidth = 3\n");
  const auto r = run_args({"--config", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("width"), std::string::npos);
  fs::remove(cfg);
}

TEST(Cli, WritesCsv) {
  const auto path = fs::temp_directory_path() / "vyoung_cli_out.csv";
  const auto r = run_args({"kstar", "--kernel", "rl:H=0.75", "--function", "t", "--grid", "4",
                           "--out", path.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  EXPECT_FALSE(header.empty());
  EXPECT_EQ(header.find(' '), std::string::npos);
  fs::remove(path);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = VYOUNG_CLI_PATH;
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " > /dev/null 2>&1").c_str())), 2);
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " --list > /dev/null").c_str())), 0);
  EXPECT_EQ(WEXITSTATUS(std::system(
                (bin + " pvar --function min --p 1 --grid 16 --expect 1 > /dev/null").c_str())),
            0);
  EXPECT_EQ(WEXITSTATUS(std::system(
                (bin + " pvar --function min --p 1 --grid 16 --expect 2 > /dev/null").c_str())),
            1);
}
