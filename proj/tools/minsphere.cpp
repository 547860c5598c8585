#include "minsphere/errors.hpp"
#include "minsphere/experiment.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> level;
};

void add_common(CLI::App* sub, Options& opts) {
  sub->add_option("--config", opts.config_path, "JSON experiment configuration");
  sub->add_option("--out", opts.out_dir, "Output directory for report.json and CSV files");
  sub->add_option("--seed", opts.seed, "Override the configured seed");
  sub->add_option("--level", opts.level, "Override the mesh subdivision level")->check(CLI::Range(0, minsphere::kMaxMeshLevel));
}

int run_kind(const std::string& kind, const Options& opts) {
  nlohmann::json doc = opts.config_path.empty() ? nlohmann::json{{"kind", kind}}
                                                : minsphere::read_config_file(opts.config_path);
  if (!doc.is_object()) throw minsphere::ConfigError("configuration must be a JSON object");
  if (!doc.contains("kind")) doc["kind"] = kind;
  if (doc.at("kind") != kind) {
    throw minsphere::ConfigError("kind: configuration declares '" + doc.at("kind").dump() +
                                 "' but the subcommand is '" + kind + "'");
  }
  if (opts.seed) doc["seed"] = *opts.seed;
  if (opts.level) doc["level"] = *opts.level;
  if (!opts.out_dir.empty()) doc["output_dir"] = opts.out_dir;
  const minsphere::ExperimentConfig config = minsphere::config_from_json(doc);
  const minsphere::RunResult result = minsphere::run(config);
  for (const auto& check : result.report.at("checks")) {
    std::cout << (check.at("passed").get<bool>() ? "PASS " : "FAIL ") << check.at("name").get<std::string>() << '\n';
  }
  if (result.report.contains("error")) std::cerr << "error: " << result.report.at("error").get<std::string>() << '\n';
  std::cout << "report written to " << config.output_dir << "/report.json\n";
  return result.exit_code;
}

int run_validate(const Options& opts) {
  if (opts.config_path.empty()) throw minsphere::ConfigError("validate: --config is required");
  const auto errors = minsphere::validate_config(minsphere::read_config_file(opts.config_path));
  if (errors.empty()) {
    std::cout << "OK\n";
    return minsphere::kExitPass;
  }
  for (const auto& e : errors) std::cerr << opts.config_path << ": " << e << '\n';
  return minsphere::kExitConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on minimal two-spheres in round spheres"};
  app.require_subcommand(1);
  Options opts;
  std::string selected;
  for (const auto& kind : minsphere::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "Run a " + kind + " experiment");
    add_common(sub, opts);
    sub->callback([&selected, kind] { selected = kind; });
  }
  auto* validate = app.add_subcommand("validate", "Check a configuration without running it");
  validate->add_option("--config", opts.config_path, "JSON experiment configuration")->required();
  validate->callback([&selected] { selected = "validate"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : minsphere::kExitConfigError;
  }

  try {
    if (selected == "validate") return run_validate(opts);
    return run_kind(selected, opts);
  } catch (const minsphere::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return minsphere::kExitConfigError;
  } catch (const minsphere::Error& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return minsphere::kExitNumericFailure;
  }
}
