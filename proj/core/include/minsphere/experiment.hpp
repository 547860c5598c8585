#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace minsphere {

inline constexpr int kMaxMeshLevel = 7;

/// Exit status contract of run().
enum ExitStatus : int { kExitPass = 0, kExitNumericFailure = 2, kExitConfigError = 3 };

struct ExperimentConfig {
  std::string kind;  ///< census | flow | spectrum | covers | pinch | morse
  int level = 4;
  int n = 4;
  std::uint64_t seed = 0;
  std::vector<double> alpha_schedule;
  double grad_tol = 1e-6;
  double grad_floor = 1e-10;
  int max_iterations = 2000;
  std::string output_dir = ".";
  bool write_obj = false;
  /// Kind-specific fields, validated by validate_config.
  nlohmann::json params = nlohmann::json::object();
};

const std::vector<std::string>& experiment_kinds();

/// Every schema violation in the document, each naming its field. Empty when valid.
std::vector<std::string> validate_config(const nlohmann::json& document);

/// Throws ConfigError listing all violations.
ExperimentConfig config_from_json(const nlohmann::json& document);

/// Parses a file; syntax errors report line and column.
nlohmann::json read_config_file(const std::string& path);

struct RunResult {
  int exit_code = kExitPass;
  nlohmann::json report;
};

/// Runs the experiment and writes report.json, spectra.csv and telemetry.csv
/// (and mesh.obj when requested) into config.output_dir. Numeric failures are
/// reported with exit code 2; the report then carries the error message.
RunResult run(const ExperimentConfig& config);

/// Thread count from MINSPHERE_THREADS, or 0 when unset.
int configured_threads();

}  // namespace minsphere
