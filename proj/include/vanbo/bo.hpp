#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "vanbo/acquisition.hpp"
#include "vanbo/fit.hpp"
#include "vanbo/gp.hpp"
#include "vanbo/priors.hpp"

namespace vanbo {

/// Black-box maximization problem on the unit cube. The engine adds Gaussian
/// observation noise from its own stream; the objective returns noiseless
/// values so regret stays exact.
struct Problem {
  std::function<double(const Vector&)> objective;
  int dimension = 1;
  std::optional<double> known_optimum;
  double noise_std = 0.0;
};

struct BoConfig {
  int budget = 0;  // total evaluations, DoE included
  HyperpriorSpec hyperpriors;
  AcqConfig acq;
  FitConfig fit;
  KernelSpec kernel;  // dimension filled from the problem
  std::uint64_t seed = 0;
  int doe_override = 0;  // 0: ceil(3 sqrt(D)); otherwise an explicit DoE size
};

struct IterationRecord {
  Vector point;                 // unit-cube query
  double observed = 0.0;        // raw-scale noisy observation
  double true_value = 0.0;      // raw-scale noiseless value
  double incumbent_value = 0.0; // best raw observation so far
  double regret = 0.0;          // nan when no known optimum
  double distance_to_incumbent = 0.0;  // nan for the first evaluation
  double min_distance_to_data = 0.0;   // nan for the first evaluation
  bool is_doe = false;
  // Fitted hyperparameter summary; nan during DoE.
  double lengthscale_median = 0.0;
  double noise_variance = 0.0;
  double mean_constant = 0.0;
  int fit_restart_index = -1;
  double wall_ms = 0.0;
};

struct RunHistory {
  std::vector<IterationRecord> records;
  int dimension = 0;
  int doe_points = 0;
};

/// Raised when the objective itself throws; carries the progress so far.
class RunError : public std::runtime_error {
 public:
  RunError(const std::string& what, RunHistory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const RunHistory& partial() const { return partial_; }

 private:
  RunHistory partial_;
};

/// The vanilla BO loop: Sobol DoE, then per iteration re-standardize the raw
/// observations, refit by MAP, maximize log EI and evaluate. Exactly
/// cfg.budget evaluations; deterministic given the seed.
RunHistory run(const Problem& problem, const BoConfig& config);

/// Best observation: argmax of raw observed values, earliest index on ties.
std::pair<Vector, double> incumbent(const RunHistory& history);

/// Per-iteration simple regret from noiseless values; non-negative and
/// non-increasing.
std::vector<double> simple_regret(const RunHistory& history, double known_optimum);

}  // namespace vanbo
