// Command-line front end: run | mig | prop1 | locality | report, driven by a
// flat key=value config file with optional flag overrides.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "vanbo/experiment.hpp"
#include "vanbo/version.hpp"

namespace {

int run_command(vanbo::ExperimentCommand command, const std::string& config_path,
                const vanbo::ConfigOverrides& overrides) {
  const vanbo::ExperimentConfig config =
      config_path.empty()
          ? vanbo::parse_config_text("", command, overrides)
          : vanbo::parse_config(config_path, command, overrides);
  const vanbo::ExecutionReport report = vanbo::execute(config);
  for (const auto& failure : report.failures) {
    std::fprintf(stderr, "warning: %s\n", failure.c_str());
  }
  for (const auto& file : report.files_written) {
    std::printf("%s\n", file.string().c_str());
  }
  return report.exit_status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-dimensional vanilla Bayesian optimization toolkit"};
  app.set_version_flag("--version", vanbo::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  vanbo::ConfigOverrides overrides;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "path to the key=value config file");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { overrides.seed = v; },
        "base seed (overrides the config)");
    sub->add_option_function<int>(
        "--reps", [&](int v) { overrides.repetitions = v; },
        "repetition count (overrides the config)");
    sub->add_option_function<std::string>(
        "--out", [&](const std::string& v) { overrides.out_dir = v; },
        "output directory (overrides the config)");
    sub->add_option_function<int>(
        "--workers", [&](int v) { overrides.workers = v; },
        "worker limit (overrides the config)");
    sub->add_flag_callback(
        "--timings", [&] { overrides.timings = true; },
        "record wall-clock per iteration in traces");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "Bayesian optimization repetitions");
  CLI::App* cmd_mig = app.add_subcommand("mig", "information-gain curves per model class");
  CLI::App* cmd_prop1 = app.add_subcommand("prop1", "correlation bound vs numerical argmax");
  CLI::App* cmd_locality = app.add_subcommand("locality", "paired locality comparison runs");
  CLI::App* cmd_report = app.add_subcommand("report", "re-aggregate existing traces");
  for (CLI::App* sub : {cmd_run, cmd_mig, cmd_prop1, cmd_locality, cmd_report}) {
    add_common(sub);
  }

  CLI11_PARSE(app, argc, argv);

  vanbo::ExperimentCommand command = vanbo::ExperimentCommand::kRun;
  if (cmd_mig->parsed()) command = vanbo::ExperimentCommand::kMig;
  if (cmd_prop1->parsed()) command = vanbo::ExperimentCommand::kProp1;
  if (cmd_locality->parsed()) command = vanbo::ExperimentCommand::kLocality;
  if (cmd_report->parsed()) command = vanbo::ExperimentCommand::kReport;

  try {
    return run_command(command, config_path, overrides);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
