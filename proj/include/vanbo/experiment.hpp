#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vanbo/benchmarks.hpp"
#include "vanbo/bo.hpp"
#include "vanbo/complexity.hpp"

namespace vanbo {

enum class ExperimentCommand { kRun, kMig, kProp1, kLocality, kReport };

std::string to_string(ExperimentCommand command);

// Fully resolved experiment description: config file defaults, named preset,
// then explicit keys, then command-line overrides, in that order.
struct ExperimentConfig {
  ExperimentCommand command = ExperimentCommand::kRun;

  // run / locality
  BenchmarkBase benchmark = BenchmarkBase::kHartmann6;
  bool has_benchmark = false;
  int ambient_dimension = 0;  // 0: effective dimension of the base
  int budget = 0;
  double noise_std = 0.01;
  int doe_override = 0;
  std::string preset = "default";
  HyperpriorSpec hyperpriors;
  FitConfig fit;
  AcqConfig acq;
  KernelSpec kernel;

  // mig
  std::vector<ModelClassVariant> mig_variants;
  std::vector<int> mig_dimensions;
  int mig_points = 1000;
  double mig_sigma_eps2 = 1.0;
  KernelFamily mig_kernel = KernelFamily::kRbf;
  double mig_lengthscale = 0.5;
  int mig_reference_dimension = 6;
  double mig_shrink_factor = 0.4;
  int mig_embedded_dimension = 4;

  // prop1
  double prop1_yhat_min = 0.1;
  double prop1_yhat_max = 3.0;
  int prop1_count = 30;

  // harness
  int repetitions = 1;
  std::uint64_t seed_base = 0;
  int workers = 0;  // 0: hardware concurrency
  std::filesystem::path out_dir = "out";
  bool timings = false;  // wall_ms column is 0 unless enabled, keeping outputs byte-stable

  /// Sorted key=value serialization of the resolved config; hashing input.
  std::string canonical_text() const;
  /// FNV-1a over the canonical text.
  std::uint64_t config_hash() const;
};

/// Command-line style overrides applied on top of the parsed file.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> repetitions;
  std::optional<std::filesystem::path> out_dir;
  std::optional<int> workers;
  std::optional<bool> timings;
};

/// Parses the flat key=value config text. Unknown keys and invalid values
/// raise ConfigError naming the key.
ExperimentConfig parse_config_text(const std::string& text, ExperimentCommand command,
                                   const ConfigOverrides& overrides = {});
ExperimentConfig parse_config(const std::filesystem::path& file, ExperimentCommand command,
                              const ConfigOverrides& overrides = {});

struct ExecutionReport {
  int exit_status = 0;
  std::vector<std::filesystem::path> files_written;
  std::vector<std::string> failures;  // one message per failed repetition
};

/// Runs the configured command, writing CSV traces and JSON summaries under
/// the output directory. Repetitions use seeds seed_base + i and execute
/// concurrently up to the worker limit; a crash in one repetition is
/// recorded without aborting the others. Re-running an identical config
/// reproduces identical bytes.
ExecutionReport execute(const ExperimentConfig& config);

}  // namespace vanbo
