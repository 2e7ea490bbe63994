#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "cli.hpp"
#include "oracles.hpp"
#include "survcontour/json.hpp"

using namespace survcontour;
namespace fs = std::filesystem;

namespace {

const std::string kVeteran = std::string(SURVCONTOUR_TEST_DATA) + "/veteran.csv";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("survcontour-cli-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> veteran_args(const std::string& family, const fs::path& out) {
  return {"fit",       "--data",      kVeteran,   "--time",       "time",
          "--status",  "status",      "--predictor", "karno",     "--adjusters",
          "age,prior,trt,diagtime",   "--strata", "celltype",     "--family",
          family,      "--out",       out.string(), "--n-pred",   "20",
          "--n-time",  "60"};
}

}  // namespace

TEST(Cli, StratifiedVeteranWritesFourPanels) {
  const fs::path dir = scratch("panels");
  const auto r = run_cli(veteran_args("stratified_cox", dir));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("contour.json"), std::string::npos);
  const Json surface = Json::parse(slurp(dir / "contour.json"));
  EXPECT_EQ(surface.at("panels").size(), 4u);
  EXPECT_TRUE(fs::exists(dir / "quantiles.json"));
  EXPECT_TRUE(fs::exists(dir / "metrics.json"));
  EXPECT_FALSE(fs::exists(dir / "report.html"));
  fs::remove_all(dir);
}

TEST(Cli, HtmlReportEmbedsPayloads) {
  const fs::path dir = scratch("html");
  auto args = veteran_args("stratified_cox", dir);
  args.push_back("--html");
  const auto r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "surface3d.json"));
  const std::string html = slurp(dir / "report.html");
  EXPECT_NE(html.find("<html"), std::string::npos);
  EXPECT_NE(html.find("contour_surface"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, OutputsAreByteStableUnderAFixedSeed) {
  for (const std::string family : {"stratified_cox", "rsf"}) {
    SCOPED_TRACE(family);
    std::vector<std::string> contents;
    for (int k = 0; k < 2; ++k) {
      const fs::path dir = scratch("stable" + std::to_string(k));
      auto args = veteran_args(family, dir);
      if (family == "rsf") {
        // Forests take no strata.
        args.erase(args.begin() + 11, args.begin() + 13);
        args.insert(args.end(), {"--n-trees", "25", "--seed", "7"});
      } else {
        args.insert(args.end(), {"--ci", "--bootstrap", "20", "--seed", "7", "--surface3d"});
      }
      const auto r = run_cli(args);
      ASSERT_EQ(r.code, 0) << r.err;
      std::string all;
      for (const char* name : {"contour.json", "quantiles.json", "metrics.json"}) all += slurp(dir / name);
      contents.push_back(all);
      fs::remove_all(dir);
    }
    EXPECT_EQ(contents[0], contents[1]);
  }
}

TEST(Cli, SetOverridesAdjuster) {
  const fs::path a = scratch("set-a"), b = scratch("set-b");
  ASSERT_EQ(run_cli(veteran_args("stratified_cox", a)).code, 0);
  auto args = veteran_args("stratified_cox", b);
  args.insert(args.end(), {"--set", "age=40", "--set", "trt=test"});
  const auto r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(a / "contour.json"), slurp(b / "contour.json"));
  args.insert(args.end(), {"--set", "age=old"});
  EXPECT_EQ(run_cli(args).code, 2);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, FineGrayWithoutCompetingCausesIsAValidationError) {
  const fs::path dir = scratch("fg");
  auto args = veteran_args("fine_gray", dir);
  args.erase(args.begin() + 11, args.begin() + 13);
  const auto r = run_cli(args);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error: family:"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "contour.json"));
  fs::remove_all(dir);
}

TEST(Cli, NonconvergenceExitCode) {
  const fs::path dir = scratch("nonconv");
  auto args = veteran_args("stratified_cox", dir);
  args.insert(args.end(), {"--max-iter", "1"});
  EXPECT_EQ(run_cli(args).code, 3);
  fs::remove_all(dir);
}

TEST(Cli, ValidatePrintsReport) {
  const auto ok = run_cli({"validate", "--data", kVeteran, "--time", "time", "--status", "status", "--predictor", "karno"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  const Json report = Json::parse(ok.out);
  EXPECT_EQ(report.at("rows_in"), 137);
  EXPECT_EQ(report.at("rows_kept"), 137);

  const auto missing =
      run_cli({"validate", "--data", kVeteran, "--time", "time", "--status", "status", "--predictor", "absent"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("absent"), std::string::npos);

  const fs::path dir = scratch("empty");
  std::ofstream(dir / "empty.csv").close();
  const auto empty = run_cli(
      {"validate", "--data", (dir / "empty.csv").string(), "--time", "time", "--status", "status", "--predictor", "x"});
  EXPECT_EQ(empty.code, 2);
  EXPECT_EQ(run_cli({"validate", "--data", (dir / "nothing.csv").string(), "--time", "t", "--status", "s",
                     "--predictor", "x"})
                .code,
            2);
  fs::remove_all(dir);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"fit", "--data", kVeteran}).code, 1);
  const fs::path dir = scratch("usage");
  auto args = veteran_args("cox", dir);
  args.insert(args.end(), {"--n-trees", "many"});
  EXPECT_EQ(run_cli(args).code, 1);
  fs::remove_all(dir);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = SURVCONTOUR_CLI_BINARY;
  const fs::path dir = scratch("binary");
  const std::string quiet = " >/dev/null 2>&1";
  auto code = [&](const std::string& tail) {
    const int raw = std::system((bin + " " + tail + quiet).c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(code("validate --data " + kVeteran + " --time time --status status --predictor karno"), 0);
  EXPECT_EQ(code("validate --data " + kVeteran + " --time time --status status --predictor nope"), 2);
  EXPECT_EQ(code("bogus"), 1);
  EXPECT_EQ(code("fit --data " + kVeteran + " --time time --status status --predictor karno --family cox --out " +
                 dir.string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "metrics.json"));
  fs::remove_all(dir);
}
