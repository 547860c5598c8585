#include "minsphere/errors.hpp"
#include "minsphere/experiment.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace minsphere;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("minsphere_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

bool mentions(const std::vector<std::string>& errors, const std::string& field) {
  return std::any_of(errors.begin(), errors.end(), [&](const std::string& e) { return e.rfind(field + ":", 0) == 0; });
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  return json::parse(in);
}

int run_cli(const std::string& args) {
  const std::string command = std::string(MINSPHERE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const json kViolatingComplex = json::parse(R"({
  "generators": [{"id": "a", "degree": 2, "label": "A"}, {"id": "b", "degree": 1, "label": "B"}],
  "boundaries": [{"from": "a", "to": "b", "count_mod2": 1}]
})");

}  // namespace

TEST(Config, ValidDocumentHasNoErrors) {
  EXPECT_TRUE(validate_config(json{{"kind", "census"}}).empty());
  EXPECT_TRUE(validate_config(json{{"kind", "flow"}, {"alpha_schedule", {1.2, 1.1, 1.05}}}).empty());
}

TEST(Config, EveryViolationNamesItsField) {
  const auto errors = validate_config(json{{"kind", "flow"}, {"level", -1}, {"n", 1}, {"colour", "red"}});
  EXPECT_TRUE(mentions(errors, "alpha_schedule"));
  EXPECT_TRUE(mentions(errors, "level"));
  EXPECT_TRUE(mentions(errors, "n"));
  EXPECT_TRUE(mentions(errors, "colour"));
  EXPECT_GE(errors.size(), 4u);
}

TEST(Config, ScheduleMustDecreaseAboveOne) {
  EXPECT_TRUE(mentions(validate_config(json{{"kind", "flow"}, {"alpha_schedule", {1.1, 1.2}}}), "alpha_schedule"));
  EXPECT_TRUE(mentions(validate_config(json{{"kind", "flow"}, {"alpha_schedule", {1.0}}}), "alpha_schedule"));
}

TEST(Config, KindSpecificFields) {
  EXPECT_TRUE(mentions(validate_config(json{{"kind", "pinch"}, {"params", {{"delta", 0.9}}}}), "params.delta"));
  EXPECT_TRUE(mentions(validate_config(json{{"kind", "morse"}}), "params.complex"));
  EXPECT_TRUE(mentions(validate_config(json{{"kind", "warp"}}), "kind"));
  EXPECT_TRUE(mentions(validate_config(json{{"level", 3}}), "kind"));
}

TEST(Config, ConversionThrowsConfigError) {
  EXPECT_THROW(config_from_json(json{{"kind", "flow"}}), ConfigError);
  const ExperimentConfig c = config_from_json(json{{"kind", "census"}, {"level", 2}, {"seed", 9}});
  EXPECT_EQ(c.level, 2);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, SyntaxErrorsReportPosition) {
  const auto dir = scratch("syntax");
  std::ofstream(dir / "bad.json") << "{\n  \"kind\": \"census\",\n  oops\n}\n";
  try {
    (void)read_config_file((dir / "bad.json").string());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(Run, CensusWritesArtifacts) {
  const auto dir = scratch("census");
  ExperimentConfig c = config_from_json(json{{"kind", "census"}, {"params", {{"m", 3}, {"N", {5, 6}}}}});
  c.output_dir = dir.string();
  const RunResult result = run(c);
  EXPECT_EQ(result.exit_code, kExitPass);
  for (const char* file : {"report.json", "spectra.csv", "telemetry.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / file)) << file;
  }
  const json report = read_json(dir / "report.json");
  EXPECT_TRUE(report.at("passed").get<bool>());
  EXPECT_TRUE(report.contains("timestamp"));
  for (const auto& check : report.at("checks")) {
    EXPECT_TRUE(check.contains("name"));
    EXPECT_TRUE(check.contains("claim"));
  }
}

TEST(Run, StructuralFailureExitsWithTwo) {
  const auto dir = scratch("violation");
  ExperimentConfig c =
      config_from_json(json{{"kind", "morse"}, {"params", {{"complex", kViolatingComplex}, {"split", true}}}});
  c.output_dir = dir.string();
  const RunResult result = run(c);
  EXPECT_EQ(result.exit_code, kExitNumericFailure);
  EXPECT_TRUE(read_json(dir / "report.json").contains("error"));
}

TEST(Run, ThreadsVariableIsValidated) {
  ::setenv("MINSPHERE_THREADS", "2", 1);
  EXPECT_EQ(configured_threads(), 2);
  ::setenv("MINSPHERE_THREADS", "many", 1);
  EXPECT_THROW(configured_threads(), ConfigError);
  ::unsetenv("MINSPHERE_THREADS");
  EXPECT_EQ(configured_threads(), 0);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  EXPECT_EQ(run_cli("census --out " + dir.string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));

  std::ofstream(dir / "flow.json") << R"({"kind": "flow", "level": -1})";
  EXPECT_EQ(run_cli("validate --config " + (dir / "flow.json").string()), 3);
  EXPECT_EQ(run_cli("flow --config " + (dir / "flow.json").string()), 3);
  EXPECT_EQ(run_cli("census --config " + (dir / "flow.json").string()), 3);
  EXPECT_EQ(run_cli("census --level 9"), 3);
  EXPECT_EQ(run_cli("frobnicate"), 3);

  std::ofstream(dir / "morse.json") << json{{"kind", "morse"},
                                            {"output_dir", (dir / "morse").string()},
                                            {"params", {{"complex", kViolatingComplex}, {"split", true}}}}
                                           .dump();
  EXPECT_EQ(run_cli("morse --config " + (dir / "morse.json").string()), 2);
}
