#include "vanbo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vanbo/ei_geometry.hpp"
#include "vanbo/sobol.hpp"
#include "vanbo/version.hpp"

namespace vanbo {

std::string to_string(ExperimentCommand command) {
  switch (command) {
    case ExperimentCommand::kRun: return "run";
    case ExperimentCommand::kMig: return "mig";
    case ExperimentCommand::kProp1: return "prop1";
    case ExperimentCommand::kLocality: return "locality";
    case ExperimentCommand::kReport: return "report";
  }
  return "unknown";
}

namespace {

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

// --- key=value parsing -----------------------------------------------------

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream lines(text);
  std::string line;
  int line_number = 0;
  while (std::getline(lines, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_number) +
                        " is not a key=value pair: '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config: empty key on line " + std::to_string(line_number));
    }
    if (out.count(key) != 0) throw ConfigError("config: duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(value, &consumed);
  } catch (const std::exception&) {
    throw ConfigError("config: invalid number for key '" + key + "': '" + value + "'");
  }
  if (consumed != value.size()) {
    throw ConfigError("config: invalid number for key '" + key + "': '" + value + "'");
  }
  return parsed;
}

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  long long parsed = 0;
  try {
    parsed = std::stoll(value, &consumed);
  } catch (const std::exception&) {
    throw ConfigError("config: invalid integer for key '" + key + "': '" + value + "'");
  }
  if (consumed != value.size()) {
    throw ConfigError("config: invalid integer for key '" + key + "': '" + value + "'");
  }
  return parsed;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: invalid boolean for key '" + key + "': '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::istringstream items(value);
  std::string item;
  while (std::getline(items, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ModelClassVariant parse_variant(const std::string& key, const std::string& value) {
  if (value == "independent") return ModelClassVariant::kIndependentKernel;
  if (value == "fixed") return ModelClassVariant::kFixedLengthscale;
  if (value == "scaled") return ModelClassVariant::kScaledLengthscale;
  if (value == "addgp") return ModelClassVariant::kAddGpRandomGroups;
  if (value == "local") return ModelClassVariant::kLocalGpShrunk;
  if (value == "rembo") return ModelClassVariant::kRemboEmbedding;
  throw ConfigError("config: unknown model class for key '" + key + "': '" + value + "'");
}

void apply_preset(ExperimentConfig& config, const std::string& preset) {
  const double mu0 = std::sqrt(2.0);
  const double sigma0 = std::sqrt(3.0);
  config.hyperpriors = HyperpriorSpec{};
  config.fit.mode = FitMode::kMap;
  if (preset == "default") {
    return;
  }
  if (preset == "complexity-low") {  // longer lengthscales, lower assumed complexity
    config.hyperpriors.lengthscale_prior = ScaledLogNormalLengthscale{mu0 + 0.5, sigma0};
  } else if (preset == "complexity-high") {
    config.hyperpriors.lengthscale_prior = ScaledLogNormalLengthscale{mu0 - 0.5, sigma0};
  } else if (preset == "uncertainty-low") {
    // Halve the log-space variance, shifting mu to keep the mode exp(mu - sigma^2).
    const double s = sigma0 / std::sqrt(2.0);
    config.hyperpriors.lengthscale_prior =
        ScaledLogNormalLengthscale{mu0 + (s * s - sigma0 * sigma0), s};
  } else if (preset == "uncertainty-high") {
    const double s = sigma0 * std::sqrt(2.0);
    config.hyperpriors.lengthscale_prior =
        ScaledLogNormalLengthscale{mu0 + (s * s - sigma0 * sigma0), s};
  } else if (preset == "gamma-map") {
    config.hyperpriors.lengthscale_prior = GammaLengthscale{3.0, 6.0, false};
  } else if (preset == "mle") {
    config.fit.mode = FitMode::kMle;
    config.hyperpriors.signal_variance_policy = SignalVariancePolicy::kLearned;
  } else if (preset == "learned-sigma-f") {
    config.hyperpriors.signal_variance_policy = SignalVariancePolicy::kLearned;
  } else {
    throw ConfigError("config: unknown preset '" + preset + "'");
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, ExperimentCommand command,
                                   const ConfigOverrides& overrides) {
  ExperimentConfig config;
  config.command = command;
  const auto keys = parse_key_values(text);

  // Preset first so explicit keys can override its choices.
  if (const auto it = keys.find("preset"); it != keys.end()) config.preset = it->second;
  apply_preset(config, config.preset);

  auto* lengthscale_ln =
      std::get_if<ScaledLogNormalLengthscale>(&config.hyperpriors.lengthscale_prior);
  auto* lengthscale_gamma =
      std::get_if<GammaLengthscale>(&config.hyperpriors.lengthscale_prior);

  for (const auto& [key, value] : keys) {
    if (key == "preset") {
      continue;
    } else if (key == "benchmark") {
      if (value == "hartmann6") {
        config.benchmark = BenchmarkBase::kHartmann6;
      } else if (value == "levy4") {
        config.benchmark = BenchmarkBase::kLevy4;
      } else {
        throw ConfigError("config: unknown benchmark '" + value + "'");
      }
      config.has_benchmark = true;
    } else if (key == "ambient_dimension") {
      config.ambient_dimension = static_cast<int>(parse_int(key, value));
      if (config.ambient_dimension < 1) {
        throw ConfigError("config: ambient_dimension must be >= 1");
      }
    } else if (key == "budget") {
      config.budget = static_cast<int>(parse_int(key, value));
      if (config.budget < 1) throw ConfigError("config: budget must be >= 1");
    } else if (key == "noise_std") {
      config.noise_std = parse_double(key, value);
      if (config.noise_std < 0.0) throw ConfigError("config: noise_std must be >= 0");
    } else if (key == "doe") {
      config.doe_override = static_cast<int>(parse_int(key, value));
      if (config.doe_override < 0) throw ConfigError("config: doe must be >= 0");
    } else if (key == "kernel") {
      if (value == "rbf") {
        config.kernel.family = KernelFamily::kRbf;
      } else if (value == "matern52") {
        config.kernel.family = KernelFamily::kMatern52;
      } else {
        throw ConfigError("config: unknown kernel '" + value + "'");
      }
    } else if (key == "mu0") {
      if (lengthscale_ln == nullptr) {
        throw ConfigError("config: key 'mu0' requires a scaled-lognormal lengthscale prior");
      }
      lengthscale_ln->mu0 = parse_double(key, value);
    } else if (key == "sigma0") {
      if (lengthscale_ln == nullptr) {
        throw ConfigError("config: key 'sigma0' requires a scaled-lognormal lengthscale prior");
      }
      lengthscale_ln->sigma0 = parse_double(key, value);
      if (!(lengthscale_ln->sigma0 > 0.0)) throw ConfigError("config: sigma0 must be > 0");
    } else if (key == "lengthscale_prior") {
      if (value == "scaled-lognormal") {
        config.hyperpriors.lengthscale_prior = ScaledLogNormalLengthscale{};
      } else if (value == "gamma") {
        config.hyperpriors.lengthscale_prior = GammaLengthscale{};
      } else if (value == "fixed") {
        config.hyperpriors.lengthscale_prior = FixedLengthscale{};
      } else {
        throw ConfigError("config: unknown lengthscale_prior '" + value + "'");
      }
      lengthscale_ln =
          std::get_if<ScaledLogNormalLengthscale>(&config.hyperpriors.lengthscale_prior);
      lengthscale_gamma = std::get_if<GammaLengthscale>(&config.hyperpriors.lengthscale_prior);
    } else if (key == "gamma_alpha" || key == "gamma_beta" || key == "gamma_scaled") {
      if (lengthscale_gamma == nullptr) {
        throw ConfigError("config: key '" + key + "' requires a gamma lengthscale prior");
      }
      if (key == "gamma_alpha") lengthscale_gamma->alpha = parse_double(key, value);
      if (key == "gamma_beta") lengthscale_gamma->beta = parse_double(key, value);
      if (key == "gamma_scaled") lengthscale_gamma->scale_with_dimension = parse_bool(key, value);
    } else if (key == "fixed_lengthscale") {
      auto* fixed = std::get_if<FixedLengthscale>(&config.hyperpriors.lengthscale_prior);
      if (fixed == nullptr) {
        throw ConfigError("config: key 'fixed_lengthscale' requires lengthscale_prior = fixed");
      }
      fixed->value = parse_double(key, value);
      if (!(fixed->value > 0.0)) throw ConfigError("config: fixed_lengthscale must be > 0");
    } else if (key == "noise_prior_location") {
      std::get<LogNormalPrior>(config.hyperpriors.noise_prior).location =
          parse_double(key, value);
    } else if (key == "noise_prior_scale") {
      auto& prior = std::get<LogNormalPrior>(config.hyperpriors.noise_prior);
      prior.scale = parse_double(key, value);
      if (!(prior.scale > 0.0)) throw ConfigError("config: noise_prior_scale must be > 0");
    } else if (key == "signal_variance") {
      if (value == "fixed") {
        config.hyperpriors.signal_variance_policy = SignalVariancePolicy::kFixed;
      } else if (value == "learned") {
        config.hyperpriors.signal_variance_policy = SignalVariancePolicy::kLearned;
      } else {
        throw ConfigError("config: signal_variance must be 'fixed' or 'learned'");
      }
    } else if (key == "fit_mode") {
      if (value == "map") {
        config.fit.mode = FitMode::kMap;
      } else if (value == "mle") {
        config.fit.mode = FitMode::kMle;
      } else {
        throw ConfigError("config: fit_mode must be 'map' or 'mle'");
      }
    } else if (key == "fit_restarts") {
      config.fit.n_restarts = static_cast<int>(parse_int(key, value));
      if (config.fit.n_restarts < 1) throw ConfigError("config: fit_restarts must be >= 1");
    } else if (key == "fit_max_iters") {
      config.fit.max_iterations = static_cast<int>(parse_int(key, value));
      if (config.fit.max_iterations < 1) throw ConfigError("config: fit_max_iters must be >= 1");
    } else if (key == "fit_tolerance") {
      config.fit.gradient_tolerance = parse_double(key, value);
      if (!(config.fit.gradient_tolerance > 0.0)) {
        throw ConfigError("config: fit_tolerance must be > 0");
      }
    } else if (key == "acq_sobol") {
      config.acq.n_global_sobol = static_cast<int>(parse_int(key, value));
      if (config.acq.n_global_sobol < 1) throw ConfigError("config: acq_sobol must be >= 1");
    } else if (key == "acq_local") {
      config.acq.n_local_gaussian = static_cast<int>(parse_int(key, value));
      if (config.acq.n_local_gaussian < 0) throw ConfigError("config: acq_local must be >= 0");
    } else if (key == "acq_refine") {
      config.acq.n_refine = static_cast<int>(parse_int(key, value));
      if (config.acq.n_refine < 1) throw ConfigError("config: acq_refine must be >= 1");
    } else if (key == "acq_local_scale") {
      config.acq.local_scale = parse_double(key, value);
      if (!(config.acq.local_scale >= 0.0)) {
        throw ConfigError("config: acq_local_scale must be >= 0");
      }
    } else if (key == "acq_refine_iters") {
      config.acq.max_refine_iters = static_cast<int>(parse_int(key, value));
      if (config.acq.max_refine_iters < 1) {
        throw ConfigError("config: acq_refine_iters must be >= 1");
      }
    } else if (key == "repetitions") {
      config.repetitions = static_cast<int>(parse_int(key, value));
      if (config.repetitions < 1) throw ConfigError("config: repetitions must be >= 1");
    } else if (key == "seed") {
      const long long seed = parse_int(key, value);
      if (seed < 0) throw ConfigError("config: seed must be >= 0");
      config.seed_base = static_cast<std::uint64_t>(seed);
    } else if (key == "workers") {
      config.workers = static_cast<int>(parse_int(key, value));
      if (config.workers < 0) throw ConfigError("config: workers must be >= 0");
    } else if (key == "out") {
      config.out_dir = value;
    } else if (key == "timings") {
      config.timings = parse_bool(key, value);
    } else if (key == "mig_variants") {
      config.mig_variants.clear();
      for (const auto& item : split_list(value)) {
        config.mig_variants.push_back(parse_variant(key, item));
      }
    } else if (key == "mig_dimensions") {
      config.mig_dimensions.clear();
      for (const auto& item : split_list(value)) {
        const int dim = static_cast<int>(parse_int(key, item));
        if (dim < 1) throw ConfigError("config: mig_dimensions entries must be >= 1");
        config.mig_dimensions.push_back(dim);
      }
    } else if (key == "mig_points") {
      config.mig_points = static_cast<int>(parse_int(key, value));
      if (config.mig_points < 1) throw ConfigError("config: mig_points must be >= 1");
    } else if (key == "mig_sigma_eps2") {
      config.mig_sigma_eps2 = parse_double(key, value);
      if (!(config.mig_sigma_eps2 > 0.0)) throw ConfigError("config: mig_sigma_eps2 must be > 0");
    } else if (key == "mig_kernel") {
      if (value == "rbf") {
        config.mig_kernel = KernelFamily::kRbf;
      } else if (value == "matern52") {
        config.mig_kernel = KernelFamily::kMatern52;
      } else {
        throw ConfigError("config: unknown mig_kernel '" + value + "'");
      }
    } else if (key == "mig_lengthscale") {
      config.mig_lengthscale = parse_double(key, value);
      if (!(config.mig_lengthscale > 0.0)) throw ConfigError("config: mig_lengthscale must be > 0");
    } else if (key == "mig_reference_dimension") {
      config.mig_reference_dimension = static_cast<int>(parse_int(key, value));
      if (config.mig_reference_dimension < 1) {
        throw ConfigError("config: mig_reference_dimension must be >= 1");
      }
    } else if (key == "mig_shrink_factor") {
      config.mig_shrink_factor = parse_double(key, value);
      if (!(config.mig_shrink_factor > 0.0)) {
        throw ConfigError("config: mig_shrink_factor must be > 0");
      }
    } else if (key == "mig_embedded_dimension") {
      config.mig_embedded_dimension = static_cast<int>(parse_int(key, value));
      if (config.mig_embedded_dimension < 1) {
        throw ConfigError("config: mig_embedded_dimension must be >= 1");
      }
    } else if (key == "prop1_yhat_min") {
      config.prop1_yhat_min = parse_double(key, value);
      if (!(config.prop1_yhat_min > 0.0)) throw ConfigError("config: prop1_yhat_min must be > 0");
    } else if (key == "prop1_yhat_max") {
      config.prop1_yhat_max = parse_double(key, value);
    } else if (key == "prop1_count") {
      config.prop1_count = static_cast<int>(parse_int(key, value));
      if (config.prop1_count < 2) throw ConfigError("config: prop1_count must be >= 2");
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }

  if (overrides.seed) config.seed_base = *overrides.seed;
  if (overrides.repetitions) {
    if (*overrides.repetitions < 1) throw ConfigError("config: repetitions must be >= 1");
    config.repetitions = *overrides.repetitions;
  }
  if (overrides.out_dir) config.out_dir = *overrides.out_dir;
  if (overrides.workers) config.workers = *overrides.workers;
  if (overrides.timings) config.timings = *overrides.timings;
  if (const char* env = std::getenv("VANBO_WORKERS"); env != nullptr && *env != '\0') {
    config.workers = std::max(1, std::atoi(env));
  }

  // Cross-field validation.
  const bool needs_benchmark = command == ExperimentCommand::kRun ||
                               command == ExperimentCommand::kLocality;
  if (needs_benchmark) {
    if (!config.has_benchmark) throw ConfigError("config: key 'benchmark' is required");
    if (config.budget < 1) throw ConfigError("config: key 'budget' is required and must be >= 1");
    const int effective = config.benchmark == BenchmarkBase::kLevy4 ? 4 : 6;
    if (config.ambient_dimension == 0) config.ambient_dimension = effective;
    if (config.ambient_dimension < effective) {
      throw ConfigError("config: ambient_dimension is below the effective dimension");
    }
  }
  if (command == ExperimentCommand::kMig) {
    if (config.mig_variants.empty()) {
      config.mig_variants = {ModelClassVariant::kIndependentKernel,
                             ModelClassVariant::kFixedLengthscale,
                             ModelClassVariant::kScaledLengthscale};
    }
    if (config.mig_dimensions.empty()) config.mig_dimensions = {50, 100, 500};
    for (const int dim : config.mig_dimensions) {
      if (dim < config.mig_embedded_dimension &&
          std::count(config.mig_variants.begin(), config.mig_variants.end(),
                     ModelClassVariant::kRemboEmbedding) > 0) {
        throw ConfigError("config: mig_embedded_dimension exceeds a mig dimension");
      }
    }
  }
  if (config.prop1_yhat_max <= config.prop1_yhat_min) {
    throw ConfigError("config: prop1_yhat_max must exceed prop1_yhat_min");
  }
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& file, ExperimentCommand command,
                              const ConfigOverrides& overrides) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot open file '" + file.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), command, overrides);
}

std::string ExperimentConfig::canonical_text() const {
  std::map<std::string, std::string> keys;
  keys["command"] = vanbo::to_string(command);
  keys["preset"] = preset;
  if (has_benchmark) {
    keys["benchmark"] = vanbo::to_string(benchmark);
    keys["ambient_dimension"] = std::to_string(ambient_dimension);
    keys["budget"] = std::to_string(budget);
    keys["noise_std"] = format_double(noise_std);
    keys["doe"] = std::to_string(doe_override);
  }
  keys["kernel"] = vanbo::to_string(kernel.family);
  if (const auto* ln = std::get_if<ScaledLogNormalLengthscale>(&hyperpriors.lengthscale_prior)) {
    keys["lengthscale_prior"] = "scaled-lognormal";
    keys["mu0"] = format_double(ln->mu0);
    keys["sigma0"] = format_double(ln->sigma0);
  } else if (const auto* g = std::get_if<GammaLengthscale>(&hyperpriors.lengthscale_prior)) {
    keys["lengthscale_prior"] = "gamma";
    keys["gamma_alpha"] = format_double(g->alpha);
    keys["gamma_beta"] = format_double(g->beta);
    keys["gamma_scaled"] = g->scale_with_dimension ? "true" : "false";
  } else {
    keys["lengthscale_prior"] = "fixed";
    keys["fixed_lengthscale"] =
        format_double(std::get<FixedLengthscale>(hyperpriors.lengthscale_prior).value);
  }
  const auto& noise_prior = std::get<LogNormalPrior>(hyperpriors.noise_prior);
  keys["noise_prior_location"] = format_double(noise_prior.location);
  keys["noise_prior_scale"] = format_double(noise_prior.scale);
  keys["signal_variance"] =
      hyperpriors.signal_variance_policy == SignalVariancePolicy::kFixed ? "fixed" : "learned";
  keys["fit_mode"] = fit.mode == FitMode::kMap ? "map" : "mle";
  keys["fit_restarts"] = std::to_string(fit.n_restarts);
  keys["fit_max_iters"] = std::to_string(fit.max_iterations);
  keys["fit_tolerance"] = format_double(fit.gradient_tolerance);
  keys["acq_sobol"] = std::to_string(acq.n_global_sobol);
  keys["acq_local"] = std::to_string(acq.n_local_gaussian);
  keys["acq_refine"] = std::to_string(acq.n_refine);
  keys["acq_local_scale"] = format_double(acq.local_scale);
  keys["acq_refine_iters"] = std::to_string(acq.max_refine_iters);
  keys["repetitions"] = std::to_string(repetitions);
  keys["seed"] = std::to_string(seed_base);
  keys["timings"] = timings ? "true" : "false";
  if (command == ExperimentCommand::kMig) {
    std::string variants;
    for (const auto v : mig_variants) {
      if (!variants.empty()) variants += ",";
      variants += vanbo::to_string(v);
    }
    keys["mig_variants"] = variants;
    std::string dims;
    for (const int d : mig_dimensions) {
      if (!dims.empty()) dims += ",";
      dims += std::to_string(d);
    }
    keys["mig_dimensions"] = dims;
    keys["mig_points"] = std::to_string(mig_points);
    keys["mig_sigma_eps2"] = format_double(mig_sigma_eps2);
    keys["mig_kernel"] = vanbo::to_string(mig_kernel);
    keys["mig_lengthscale"] = format_double(mig_lengthscale);
    keys["mig_reference_dimension"] = std::to_string(mig_reference_dimension);
    keys["mig_shrink_factor"] = format_double(mig_shrink_factor);
    keys["mig_embedded_dimension"] = std::to_string(mig_embedded_dimension);
  }
  if (command == ExperimentCommand::kProp1) {
    keys["prop1_yhat_min"] = format_double(prop1_yhat_min);
    keys["prop1_yhat_max"] = format_double(prop1_yhat_max);
    keys["prop1_count"] = std::to_string(prop1_count);
  }
  std::string text;
  for (const auto& [key, value] : keys) text += key + "=" + value + "\n";
  return text;
}

std::uint64_t ExperimentConfig::config_hash() const {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const char c : canonical_text()) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

namespace {

// --- output writers ---------------------------------------------------------

std::string provenance_line(const ExperimentConfig& config, std::uint64_t seed) {
  char buffer[128];
  std::snprintf(buffer, sizeof(buffer), "# config_hash=%016" PRIx64 " seed=%" PRIu64
                                        " version=%s\n",
                config.config_hash(), seed, kVersion);
  return buffer;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file '" + path.string() + "'");
  out << content;
}

std::string trace_csv(const ExperimentConfig& config, const RunHistory& history,
                      std::uint64_t seed) {
  std::string out = provenance_line(config, seed);
  out += "iteration";
  for (int d = 0; d < history.dimension; ++d) out += ",x_" + std::to_string(d);
  out +=
      ",y_raw,y_true,incumbent_value,regret,dist_to_incumbent,min_dist_to_data,"
      "ell_median,sigma_eps2,mean_c,fit_restarts_used,wall_ms\n";
  for (std::size_t i = 0; i < history.records.size(); ++i) {
    const auto& rec = history.records[i];
    out += std::to_string(i);
    for (int d = 0; d < history.dimension; ++d) out += "," + format_double(rec.point(d));
    out += "," + format_double(rec.observed);
    out += "," + format_double(rec.true_value);
    out += "," + format_double(rec.incumbent_value);
    out += "," + format_double(rec.regret);
    out += "," + format_double(rec.distance_to_incumbent);
    out += "," + format_double(rec.min_distance_to_data);
    out += "," + format_double(rec.lengthscale_median);
    out += "," + format_double(rec.noise_variance);
    out += "," + format_double(rec.mean_constant);
    out += "," + std::to_string(rec.fit_restart_index);
    out += "," + format_double(config.timings ? rec.wall_ms : 0.0);
    out += "\n";
  }
  return out;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double position = q * static_cast<double>(sorted.size() - 1);
  const std::size_t below = static_cast<std::size_t>(position);
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  const double weight = position - static_cast<double>(below);
  return sorted[below] * (1.0 - weight) + sorted[above] * weight;
}

double quantile_of(std::vector<double> values, double q) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return std::isnan(v); }),
               values.end());
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, q);
}

struct PerIterationColumns {
  std::vector<std::vector<double>> regret;          // [iteration][repetition]
  std::vector<std::vector<double>> incumbent;
  std::vector<std::vector<double>> dist_incumbent;
};

PerIterationColumns collect_columns(const std::vector<RunHistory>& histories) {
  PerIterationColumns cols;
  std::size_t max_len = 0;
  for (const auto& h : histories) max_len = std::max(max_len, h.records.size());
  cols.regret.resize(max_len);
  cols.incumbent.resize(max_len);
  cols.dist_incumbent.resize(max_len);
  for (const auto& h : histories) {
    for (std::size_t i = 0; i < h.records.size(); ++i) {
      cols.regret[i].push_back(h.records[i].regret);
      cols.incumbent[i].push_back(h.records[i].incumbent_value);
      cols.dist_incumbent[i].push_back(h.records[i].distance_to_incumbent);
    }
  }
  return cols;
}

std::string aggregate_csv(const ExperimentConfig& config,
                          const std::vector<RunHistory>& histories) {
  const PerIterationColumns cols = collect_columns(histories);
  std::string out = provenance_line(config, config.seed_base);
  out +=
      "iteration,regret_q25,regret_median,regret_q75,incumbent_median,"
      "dist_to_incumbent_median\n";
  for (std::size_t i = 0; i < cols.regret.size(); ++i) {
    out += std::to_string(i);
    out += "," + format_double(quantile_of(cols.regret[i], 0.25));
    out += "," + format_double(quantile_of(cols.regret[i], 0.5));
    out += "," + format_double(quantile_of(cols.regret[i], 0.75));
    out += "," + format_double(quantile_of(cols.incumbent[i], 0.5));
    out += "," + format_double(quantile_of(cols.dist_incumbent[i], 0.5));
    out += "\n";
  }
  return out;
}

std::string summary_json(const ExperimentConfig& config,
                         const std::vector<RunHistory>& histories,
                         const std::vector<std::string>& failures) {
  const PerIterationColumns cols = collect_columns(histories);
  nlohmann::ordered_json doc;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016" PRIx64, config.config_hash());
  doc["command"] = to_string(config.command);
  doc["config_hash"] = hash_hex;
  doc["version"] = kVersion;
  doc["seed_base"] = config.seed_base;
  doc["repetitions"] = config.repetitions;
  doc["completed"] = histories.size();
  doc["failures"] = failures;
  nlohmann::ordered_json per_iteration = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < cols.regret.size(); ++i) {
    nlohmann::ordered_json row;
    row["iteration"] = i;
    row["regret_q25"] = quantile_of(cols.regret[i], 0.25);
    row["regret_median"] = quantile_of(cols.regret[i], 0.5);
    row["regret_q75"] = quantile_of(cols.regret[i], 0.75);
    per_iteration.push_back(row);
  }
  doc["per_iteration_regret"] = per_iteration;
  if (!cols.regret.empty()) {
    doc["final_regret_median"] = quantile_of(cols.regret.back(), 0.5);
  }
  return doc.dump(2) + "\n";
}

// --- repetition pool ---------------------------------------------------------

int resolve_workers(const ExperimentConfig& config) {
  if (config.workers > 0) return config.workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs one BO repetition per seed index, collecting histories and failures
// in seed order regardless of scheduling.
void run_repetitions(const ExperimentConfig& config,
                     const std::function<RunHistory(int rep, std::uint64_t seed)>& body,
                     std::vector<std::optional<RunHistory>>& histories,
                     std::vector<std::string>& failures) {
  const int reps = config.repetitions;
  histories.assign(static_cast<std::size_t>(reps), std::nullopt);
  std::vector<std::string> errors(static_cast<std::size_t>(reps));
  std::atomic<int> cursor{0};
  const int n_workers = std::min(resolve_workers(config), reps);
  const auto worker = [&]() {
    while (true) {
      const int rep = cursor.fetch_add(1);
      if (rep >= reps) return;
      const std::uint64_t seed = config.seed_base + static_cast<std::uint64_t>(rep);
      try {
        histories[static_cast<std::size_t>(rep)] = body(rep, seed);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(rep)] =
            "seed " + std::to_string(seed) + ": " + e.what();
      }
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (!e.empty()) failures.push_back(e);
  }
}

BoConfig bo_config_from(const ExperimentConfig& config, std::uint64_t seed) {
  BoConfig bo;
  bo.budget = config.budget;
  bo.hyperpriors = config.hyperpriors;
  bo.acq = config.acq;
  bo.fit = config.fit;
  bo.kernel = config.kernel;
  bo.seed = seed;
  bo.doe_override = config.doe_override;
  return bo;
}

void execute_run(const ExperimentConfig& config, ExecutionReport& report,
                 const std::string& label = "") {
  std::vector<std::optional<RunHistory>> histories;
  std::vector<std::string> failures;
  const std::string prefix = label.empty() ? "" : label + "_";
  std::mutex io_mutex;
  run_repetitions(
      config,
      [&](int, std::uint64_t seed) {
        const EmbeddedBenchmark bench =
            make_embedded(config.benchmark, config.ambient_dimension, seed);
        Problem problem = make_problem(bench);
        problem.noise_std = config.noise_std;
        const RunHistory history = run(problem, bo_config_from(config, seed));
        // Flush the trace as soon as the run finishes; partial results
        // survive a later crash in a sibling repetition.
        const auto trace_path =
            config.out_dir / (prefix + "trace_seed" + std::to_string(seed) + ".csv");
        const auto meta_path =
            config.out_dir / (prefix + "benchmark_seed" + std::to_string(seed) + ".json");
        std::lock_guard<std::mutex> lock(io_mutex);
        write_file(trace_path, trace_csv(config, history, seed));
        write_file(meta_path, benchmark_metadata_json(bench) + "\n");
        report.files_written.push_back(trace_path);
        report.files_written.push_back(meta_path);
        return history;
      },
      histories, failures);

  std::vector<RunHistory> completed;
  for (auto& h : histories) {
    if (h) completed.push_back(std::move(*h));
  }
  const auto aggregate_path = config.out_dir / (prefix + "aggregate.csv");
  const auto summary_path = config.out_dir / (prefix + "summary.json");
  write_file(aggregate_path, aggregate_csv(config, completed));
  write_file(summary_path, summary_json(config, completed, failures));
  report.files_written.push_back(aggregate_path);
  report.files_written.push_back(summary_path);
  for (auto& f : failures) report.failures.push_back(f);
  if (completed.empty()) report.exit_status = 1;
}

void execute_mig(const ExperimentConfig& config, ExecutionReport& report) {
  std::string csv = provenance_line(config, config.seed_base);
  csv += "variant,D,n,gamma_nats,sigma_eps2,seed\n";
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t seed = config.seed_base + static_cast<std::uint64_t>(rep);
    for (const auto variant : config.mig_variants) {
      for (const int dim : config.mig_dimensions) {
        ModelClassSpec spec;
        spec.variant = variant;
        spec.family = config.mig_kernel;
        spec.dimension = dim;
        spec.noise_variance = config.mig_sigma_eps2;
        spec.lengthscale = config.mig_lengthscale;
        spec.reference_dimension = config.mig_reference_dimension;
        spec.shrink_factor = config.mig_shrink_factor;
        spec.embedded_dimension = config.mig_embedded_dimension;
        spec.seed = seed;
        const MigCurve curve = sobol_mig(spec, config.mig_points, seed);
        for (std::size_t i = 0; i < curve.counts.size(); ++i) {
          csv += to_string(variant);
          csv += "," + std::to_string(dim);
          csv += "," + std::to_string(curve.counts[i]);
          csv += "," + format_double(curve.values[i]);
          csv += "," + format_double(config.mig_sigma_eps2);
          csv += "," + std::to_string(seed);
          csv += "\n";
        }
      }
    }
  }
  const auto path = config.out_dir / "mig.csv";
  write_file(path, csv);
  report.files_written.push_back(path);
}

void execute_prop1(const ExperimentConfig& config, ExecutionReport& report) {
  std::string csv = provenance_line(config, config.seed_base);
  csv += "yhat,rho_bound,rho_star_numeric\n";
  for (int i = 0; i < config.prop1_count; ++i) {
    const double yhat = config.prop1_yhat_min +
                        (config.prop1_yhat_max - config.prop1_yhat_min) * i /
                            (config.prop1_count - 1);
    csv += format_double(yhat);
    csv += "," + format_double(rho_lower_bound(yhat));
    csv += "," + format_double(rho_star_numeric(yhat));
    csv += "\n";
  }
  const auto path = config.out_dir / "prop1.csv";
  write_file(path, csv);
  report.files_written.push_back(path);
}

double median_of_values(std::vector<double> values) { return quantile_of(std::move(values), 0.5); }

void execute_locality(const ExperimentConfig& config, ExecutionReport& report) {
  // Paired runs on the same seeds: the configured (scaled) prior against the
  // conventional short-lengthscale Gamma(3, 6) MAP baseline.
  ExperimentConfig scaled = config;
  ExperimentConfig gamma = config;
  gamma.preset = "gamma-map";
  gamma.hyperpriors.lengthscale_prior = GammaLengthscale{3.0, 6.0, false};
  gamma.fit.mode = FitMode::kMap;

  struct Arm {
    const char* label;
    const ExperimentConfig* config;
    std::vector<double> post_doe_distances;
  };
  Arm arms[2] = {{"scaled", &scaled, {}}, {"gamma", &gamma, {}}};

  for (auto& arm : arms) {
    std::vector<std::optional<RunHistory>> histories;
    std::vector<std::string> failures;
    std::mutex io_mutex;
    run_repetitions(
        *arm.config,
        [&](int, std::uint64_t seed) {
          const EmbeddedBenchmark bench =
              make_embedded(config.benchmark, config.ambient_dimension, seed);
          Problem problem = make_problem(bench);
          problem.noise_std = config.noise_std;
          const RunHistory history = run(problem, bo_config_from(*arm.config, seed));
          const auto path = config.out_dir / (std::string(arm.label) + "_trace_seed" +
                                              std::to_string(seed) + ".csv");
          std::lock_guard<std::mutex> lock(io_mutex);
          write_file(path, trace_csv(*arm.config, history, seed));
          report.files_written.push_back(path);
          return history;
        },
        histories, failures);
    for (const auto& h : histories) {
      if (!h) continue;
      for (std::size_t i = static_cast<std::size_t>(h->doe_points); i < h->records.size();
           ++i) {
        arm.post_doe_distances.push_back(h->records[i].distance_to_incumbent);
      }
    }
    for (auto& f : failures) report.failures.push_back(f);
  }

  nlohmann::ordered_json doc;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016" PRIx64, config.config_hash());
  doc["command"] = "locality";
  doc["config_hash"] = hash_hex;
  doc["version"] = kVersion;
  doc["seed_base"] = config.seed_base;
  doc["repetitions"] = config.repetitions;
  const double scaled_median = median_of_values(arms[0].post_doe_distances);
  const double gamma_median = median_of_values(arms[1].post_doe_distances);
  doc["post_doe_median_distance_scaled"] = scaled_median;
  doc["post_doe_median_distance_gamma"] = gamma_median;
  doc["gamma_below_scaled"] = gamma_median < scaled_median;
  const auto path = config.out_dir / "locality_summary.json";
  write_file(path, doc.dump(2) + "\n");
  report.files_written.push_back(path);
  if (arms[0].post_doe_distances.empty() || arms[1].post_doe_distances.empty()) {
    report.exit_status = 1;
  }
}

RunHistory parse_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace '" + path.string() + "'");
  RunHistory history;
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (header.empty()) {
      header = fields;
      int dims = 0;
      for (const auto& name : header) {
        if (name.rfind("x_", 0) == 0) ++dims;
      }
      history.dimension = dims;
      continue;
    }
    IterationRecord rec;
    rec.point = Vector::Zero(history.dimension);
    for (std::size_t c = 0; c < header.size() && c < fields.size(); ++c) {
      const std::string& name = header[c];
      const double value = std::strtod(fields[c].c_str(), nullptr);
      if (name.rfind("x_", 0) == 0) {
        rec.point(std::stoi(name.substr(2))) = value;
      } else if (name == "y_raw") {
        rec.observed = value;
      } else if (name == "y_true") {
        rec.true_value = value;
      } else if (name == "incumbent_value") {
        rec.incumbent_value = value;
      } else if (name == "regret") {
        rec.regret = value;
      } else if (name == "dist_to_incumbent") {
        rec.distance_to_incumbent = value;
      } else if (name == "min_dist_to_data") {
        rec.min_distance_to_data = value;
      }
    }
    history.records.push_back(std::move(rec));
  }
  return history;
}

void execute_report(const ExperimentConfig& config, ExecutionReport& report) {
  std::vector<std::filesystem::path> traces;
  if (std::filesystem::exists(config.out_dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(config.out_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("trace_seed", 0) == 0 && entry.path().extension() == ".csv") {
        traces.push_back(entry.path());
      }
    }
  }
  std::sort(traces.begin(), traces.end());
  if (traces.empty()) {
    report.failures.push_back("report: no trace_seed*.csv files under " +
                              config.out_dir.string());
    report.exit_status = 1;
    return;
  }
  std::vector<RunHistory> histories;
  for (const auto& path : traces) histories.push_back(parse_trace_csv(path));
  const auto aggregate_path = config.out_dir / "aggregate.csv";
  const auto summary_path = config.out_dir / "summary.json";
  write_file(aggregate_path, aggregate_csv(config, histories));
  write_file(summary_path, summary_json(config, histories, {}));
  report.files_written.push_back(aggregate_path);
  report.files_written.push_back(summary_path);
}

}  // namespace

ExecutionReport execute(const ExperimentConfig& config) {
  ExecutionReport report;
  std::filesystem::create_directories(config.out_dir);
  switch (config.command) {
    case ExperimentCommand::kRun:
      execute_run(config, report);
      break;
    case ExperimentCommand::kMig:
      execute_mig(config, report);
      break;
    case ExperimentCommand::kProp1:
      execute_prop1(config, report);
      break;
    case ExperimentCommand::kLocality:
      execute_locality(config, report);
      break;
    case ExperimentCommand::kReport:
      execute_report(config, report);
      break;
  }
  std::sort(report.files_written.begin(), report.files_written.end());
  return report;
}

}  // namespace vanbo
