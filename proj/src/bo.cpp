#include "vanbo/bo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "vanbo/sobol.hpp"

namespace vanbo {

namespace {

constexpr std::uint64_t kDoeTag = 0x646F65ULL;
constexpr std::uint64_t kNoiseTag = 0x6E6F6973ULL;
constexpr std::uint64_t kFitTag = 0x666974ULL;
constexpr std::uint64_t kAcqTag = 0x616371ULL;

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

// Index of the best raw observation among the first `count` records,
// earliest on ties.
int incumbent_index(const std::vector<IterationRecord>& records, int count) {
  int best = 0;
  for (int i = 1; i < count; ++i) {
    if (records[static_cast<std::size_t>(i)].observed >
        records[static_cast<std::size_t>(best)].observed) {
      best = i;
    }
  }
  return best;
}

double median_of(Vector values) {
  std::sort(values.begin(), values.end());
  const Eigen::Index n = values.size();
  return n % 2 == 1 ? values(n / 2) : 0.5 * (values(n / 2 - 1) + values(n / 2));
}

}  // namespace

RunHistory run(const Problem& problem, const BoConfig& config) {
  const int dim = problem.dimension;
  if (dim < 1) throw ContractViolation("run: problem dimension must be >= 1");
  if (config.budget < 1) throw ContractViolation("run: budget must be >= 1");

  RunHistory history;
  history.dimension = dim;
  const int n_doe = config.doe_override > 0 ? config.doe_override : doe_size(dim);
  history.doe_points = std::min(n_doe, config.budget);

  KernelSpec kernel = config.kernel;
  kernel.dimension = dim;

  Rng noise_rng(derive_seed(config.seed, kNoiseTag));
  SobolStream doe_stream(dim, derive_seed(config.seed, kDoeTag));

  Matrix inputs(config.budget, dim);
  Vector raw(config.budget);
  double best_true = -std::numeric_limits<double>::infinity();

  const auto evaluate = [&](const Vector& x, int t) {
    double true_value;
    try {
      true_value = problem.objective(x);
    } catch (const std::exception& e) {
      throw RunError(std::string("run: objective failed at evaluation ") +
                         std::to_string(t) + ": " + e.what(),
                     history);
    }
    const double noise = problem.noise_std > 0.0 ? problem.noise_std * noise_rng.normal() : 0.0;

    IterationRecord rec;
    rec.point = x;
    rec.true_value = true_value;
    rec.observed = true_value + noise;
    rec.is_doe = t < history.doe_points;
    rec.lengthscale_median = nan_value();
    rec.noise_variance = nan_value();
    rec.mean_constant = nan_value();

    inputs.row(t) = x.transpose();
    raw(t) = rec.observed;

    if (t == 0) {
      rec.distance_to_incumbent = nan_value();
      rec.min_distance_to_data = nan_value();
      rec.incumbent_value = rec.observed;
    } else {
      const int inc = incumbent_index(history.records, t);
      rec.distance_to_incumbent =
          (x - history.records[static_cast<std::size_t>(inc)].point).norm();
      double min_dist = std::numeric_limits<double>::infinity();
      for (int j = 0; j < t; ++j) min_dist = std::min(min_dist, (x - Vector(inputs.row(j))).norm());
      rec.min_distance_to_data = min_dist;
      rec.incumbent_value =
          std::max(rec.observed, history.records[static_cast<std::size_t>(t - 1)].incumbent_value);
    }
    best_true = std::max(best_true, true_value);
    rec.regret = problem.known_optimum ? std::max(0.0, *problem.known_optimum - best_true)
                                       : nan_value();
    history.records.push_back(std::move(rec));
  };

  for (int t = 0; t < history.doe_points; ++t) {
    Vector x = doe_stream.next();
    evaluate(x, t);
  }

  for (int t = history.doe_points; t < config.budget; ++t) {
    const auto started = std::chrono::steady_clock::now();

    auto [standardized, st] = standardize(raw.head(t));
    Dataset data{inputs.topRows(t), standardized, st};

    FitConfig fit_config = config.fit;
    fit_config.seed = derive_seed(config.seed, kFitTag, static_cast<std::uint64_t>(t));
    const FitResult fitted = fit(data, kernel, config.hyperpriors, fit_config);

    GpModel model(kernel, fitted.hp, data);
    const int inc = incumbent_index(history.records, t);
    const Vector incumbent_point = history.records[static_cast<std::size_t>(inc)].point;
    const double y_max = standardized.maxCoeff();

    Vector x = optimize_acquisition(model, y_max, incumbent_point, config.acq,
                                    derive_seed(config.seed, kAcqTag,
                                                static_cast<std::uint64_t>(t)));
    if (!x.allFinite() || (x.array() < 0.0).any() || (x.array() > 1.0).any()) {
      throw NumericalError("run: acquisition returned a point outside the unit cube");
    }
    evaluate(x, t);

    IterationRecord& rec = history.records.back();
    rec.lengthscale_median = median_of(fitted.hp.lengthscales);
    rec.noise_variance = fitted.hp.noise_variance;
    rec.mean_constant = fitted.hp.mean_constant;
    rec.fit_restart_index = fitted.restart_index;
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - started)
                      .count();
  }
  return history;
}

std::pair<Vector, double> incumbent(const RunHistory& history) {
  if (history.records.empty()) throw ContractViolation("incumbent: empty history");
  const int best = incumbent_index(history.records, static_cast<int>(history.records.size()));
  const auto& rec = history.records[static_cast<std::size_t>(best)];
  return {rec.point, rec.observed};
}

std::vector<double> simple_regret(const RunHistory& history, double known_optimum) {
  std::vector<double> out;
  out.reserve(history.records.size());
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& rec : history.records) {
    if (std::isnan(rec.true_value)) {
      throw ContractViolation("simple_regret: missing noiseless values");
    }
    best = std::max(best, rec.true_value);
    out.push_back(std::max(0.0, known_optimum - best));
  }
  return out;
}

}  // namespace vanbo
