#include "vanbo/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace vanbo {

std::string to_string(BenchmarkBase base) {
  return base == BenchmarkBase::kLevy4 ? "levy4" : "hartmann6";
}

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

// Levy search box from the reference setup, one interval per active dim.
constexpr double kLevyLower[4] = {-10.0, -10.0, -5.0, -1.0};
constexpr double kLevyUpper[4] = {5.0, 10.0, 10.0, 10.0};

double levy4(const Vector& x) {
  Vector w = 1.0 + (x.array() - 1.0) / 4.0;
  const double s1 = std::sin(kPi * w(0));
  double value = s1 * s1;
  for (int i = 0; i < 3; ++i) {
    const double si = std::sin(kPi * w(i) + 1.0);
    value += (w(i) - 1.0) * (w(i) - 1.0) * (1.0 + 10.0 * si * si);
  }
  const double sd = std::sin(2.0 * kPi * w(3));
  value += (w(3) - 1.0) * (w(3) - 1.0) * (1.0 + sd * sd);
  return value;
}

const double kHartmannAlpha[4] = {1.0, 1.2, 3.0, 3.2};
const double kHartmannA[4][6] = {
    {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
    {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
    {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
    {17.0, 8.0, 0.05, 10.0, 0.1, 14.0},
};
const double kHartmannP[4][6] = {
    {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381},
};

double hartmann6(const Vector& x) {
  double value = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double d = x(j) - kHartmannP[i][j];
      inner += kHartmannA[i][j] * d * d;
    }
    value -= kHartmannAlpha[i] * std::exp(-inner);
  }
  return value;
}

const double kHartmannOptimizer[6] = {0.20169, 0.150011, 0.476874,
                                      0.275332, 0.311652, 0.6573};

}  // namespace

EmbeddedBenchmark make_embedded(BenchmarkBase base, int ambient_dimension, std::uint64_t seed) {
  EmbeddedBenchmark bench;
  bench.base = base;
  bench.seed = seed;
  bench.effective_dimension = base == BenchmarkBase::kLevy4 ? 4 : 6;
  bench.ambient_dimension = ambient_dimension;
  if (ambient_dimension < bench.effective_dimension) {
    throw ContractViolation("make_embedded: ambient dimension below the effective dimension");
  }

  // Seeded draw of the active dimensions (partial Fisher-Yates).
  Rng rng(derive_seed(seed, 0x656D6264ULL));
  std::vector<int> all(static_cast<std::size_t>(ambient_dimension));
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < bench.effective_dimension; ++i) {
    const int j = i + static_cast<int>(rng.below(
                          static_cast<std::uint64_t>(ambient_dimension - i)));
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
  }
  bench.active_dims.assign(all.begin(), all.begin() + bench.effective_dimension);

  bench.lower_bounds = Vector::Zero(ambient_dimension);
  bench.upper_bounds = Vector::Ones(ambient_dimension);
  bench.offsets = Vector::Zero(bench.effective_dimension);
  bench.optimizer = 0.5 * (bench.lower_bounds + bench.upper_bounds);

  if (base == BenchmarkBase::kLevy4) {
    for (int i = 0; i < 4; ++i) {
      const int dim = bench.active_dims[static_cast<std::size_t>(i)];
      bench.lower_bounds(dim) = kLevyLower[i];
      bench.upper_bounds(dim) = kLevyUpper[i];
      // Offset drawn so the optimum 1 + offset stays well inside the box.
      const double margin = 0.05 * (kLevyUpper[i] - kLevyLower[i]);
      const double lo = kLevyLower[i] + margin - 1.0;
      const double hi = kLevyUpper[i] - margin - 1.0;
      bench.offsets(i) = lo + (hi - lo) * rng.uniform();
      bench.optimizer(dim) = 1.0 + bench.offsets(i);
    }
  } else {
    for (int i = 0; i < 6; ++i) {
      bench.optimizer(bench.active_dims[static_cast<std::size_t>(i)]) = kHartmannOptimizer[i];
    }
  }
  bench.known_optimum = evaluate_true(bench, bench.optimizer);
  return bench;
}

double evaluate_true(const EmbeddedBenchmark& bench, const Vector& x_native) {
  if (x_native.size() != bench.ambient_dimension) {
    throw ContractViolation("evaluate_true: dimension mismatch");
  }
  constexpr double kBoundsSlack = 1e-9;
  for (Eigen::Index i = 0; i < x_native.size(); ++i) {
    if (x_native(i) < bench.lower_bounds(i) - kBoundsSlack ||
        x_native(i) > bench.upper_bounds(i) + kBoundsSlack) {
      throw ContractViolation("evaluate_true: point outside the benchmark bounds");
    }
  }
  Vector active(bench.effective_dimension);
  for (int i = 0; i < bench.effective_dimension; ++i) {
    active(i) = x_native(bench.active_dims[static_cast<std::size_t>(i)]);
  }
  if (bench.base == BenchmarkBase::kLevy4) {
    return -levy4(active - bench.offsets);
  }
  return -hartmann6(active);
}

double evaluate_noisy(const EmbeddedBenchmark& bench, const Vector& x_native, Rng& rng) {
  const double noise = bench.noise_std > 0.0 ? bench.noise_std * rng.normal() : 0.0;
  return evaluate_true(bench, x_native) + noise;
}

Vector to_native(const EmbeddedBenchmark& bench, const Vector& x_unit) {
  return bench.lower_bounds.array() +
         x_unit.array() * (bench.upper_bounds - bench.lower_bounds).array();
}

Vector to_unit(const EmbeddedBenchmark& bench, const Vector& x_native) {
  return (x_native - bench.lower_bounds).array() /
         (bench.upper_bounds - bench.lower_bounds).array();
}

Problem make_problem(const EmbeddedBenchmark& bench) {
  Problem problem;
  problem.dimension = bench.ambient_dimension;
  problem.known_optimum = bench.known_optimum;
  problem.noise_std = bench.noise_std;
  problem.objective = [bench](const Vector& x_unit) {
    return evaluate_true(bench, to_native(bench, x_unit));
  };
  return problem;
}

std::string benchmark_metadata_json(const EmbeddedBenchmark& bench) {
  nlohmann::ordered_json meta;
  meta["base"] = to_string(bench.base);
  meta["ambient_dimension"] = bench.ambient_dimension;
  meta["effective_dimension"] = bench.effective_dimension;
  meta["active_dims"] = bench.active_dims;
  meta["offsets"] = std::vector<double>(bench.offsets.begin(), bench.offsets.end());
  meta["noise_std"] = bench.noise_std;
  meta["known_optimum"] = bench.known_optimum;
  meta["seed"] = bench.seed;
  return meta.dump(2);
}

}  // namespace vanbo
