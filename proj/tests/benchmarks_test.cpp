#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "vanbo/benchmarks.hpp"

using namespace vanbo;

TEST_CASE("hartmann six-dimensional optimum") {
  const EmbeddedBenchmark bench = make_embedded(BenchmarkBase::kHartmann6, 6, 0);
  CHECK(bench.known_optimum == doctest::Approx(3.32237).epsilon(1e-4));
  // The constructed optimizer attains the stored optimum exactly by definition.
  CHECK(evaluate_true(bench, bench.optimizer) == bench.known_optimum);
  CHECK(std::abs(evaluate_true(bench, bench.optimizer) - 3.3223680113913387) < 1e-6);
}

TEST_CASE("levy optimum sits at the shifted all-ones point with value zero") {
  const EmbeddedBenchmark bench = make_embedded(BenchmarkBase::kLevy4, 4, 7);
  CHECK(evaluate_true(bench, bench.optimizer) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bench.known_optimum == doctest::Approx(0.0).epsilon(1e-12));
  // Optimizer interior to the bounds.
  for (int i = 0; i < 4; ++i) {
    const int dim = bench.active_dims[static_cast<std::size_t>(i)];
    CHECK(bench.optimizer(dim) > bench.lower_bounds(dim));
    CHECK(bench.optimizer(dim) < bench.upper_bounds(dim));
  }
}

TEST_CASE("inert dimensions leave the value bit-identical") {
  const EmbeddedBenchmark bench = make_embedded(BenchmarkBase::kHartmann6, 25, 3);
  Vector x = to_native(bench, Vector(Vector::Constant(25, 0.4)));
  const double base = evaluate_true(bench, x);
  std::set<int> active(bench.active_dims.begin(), bench.active_dims.end());
  for (int d = 0; d < 25; ++d) {
    if (active.count(d) != 0) continue;
    Vector perturbed = x;
    perturbed(d) = 0.93;
    CHECK(evaluate_true(bench, perturbed) == base);
  }
}

TEST_CASE("embedding construction") {
  SUBCASE("ambient equal to effective is a permutation") {
    const EmbeddedBenchmark bench = make_embedded(BenchmarkBase::kHartmann6, 6, 11);
    std::vector<int> sorted = bench.active_dims;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 6; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
  }
  SUBCASE("same seed reproduces the instance") {
    const EmbeddedBenchmark a = make_embedded(BenchmarkBase::kLevy4, 30, 5);
    const EmbeddedBenchmark b = make_embedded(BenchmarkBase::kLevy4, 30, 5);
    CHECK(a.active_dims == b.active_dims);
    CHECK((a.offsets - b.offsets).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.known_optimum == b.known_optimum);
  }
  SUBCASE("hartmann bounds are the unit cube") {
    const EmbeddedBenchmark bench = make_embedded(BenchmarkBase::kHartmann6, 25, 2);
    CHECK(bench.lower_bounds.cwiseAbs().maxCoeff() == 0.0);
    CHECK((bench.upper_bounds.array() == 1.0).all());
  }
  SUBCASE("ambient below effective dimension is rejected") {
    CHECK_THROWS_AS(make_embedded(BenchmarkBase::kHartmann6, 5, 0), ContractViolation);
  }
  SUBCASE("active dimensions are distinct") {
    const EmbeddedBenchmark bench = make_embedded(BenchmarkBase::kLevy4, 100, 9);
    std::set<int> unique(bench.active_dims.begin(), bench.active_dims.end());
    CHECK(unique.size() == 4);
  }
}

TEST_CASE("bounds map is affine and inverts to 1e-12") {
  const EmbeddedBenchmark bench = make_embedded(BenchmarkBase::kLevy4, 10, 4);
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Vector u(10);
    for (int i = 0; i < 10; ++i) u(i) = rng.uniform();
    const Vector round_trip = to_unit(bench, to_native(bench, u));
    CHECK((round_trip - u).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("observation noise") {
  EmbeddedBenchmark bench = make_embedded(BenchmarkBase::kHartmann6, 6, 1);
  const Vector x = bench.optimizer;
  SUBCASE("zero noise equals the true value") {
    bench.noise_std = 0.0;
    Rng rng(1);
    CHECK(evaluate_noisy(bench, x, rng) == evaluate_true(bench, x));
  }
  SUBCASE("noise std within 5 percent over 1e5 draws") {
    Rng rng(5);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    const double truth = evaluate_true(bench, x);
    for (int i = 0; i < n; ++i) {
      const double noise = evaluate_noisy(bench, x, rng) - truth;
      sum += noise;
      sum_sq += noise * noise;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sum_sq - n * mean * mean) / (n - 1));
    CHECK(sd == doctest::Approx(0.01).epsilon(0.05));
  }
  SUBCASE("noise stream does not depend on the location") {
    Rng rng_a(9), rng_b(9);
    const Vector other = to_native(bench, Vector(Vector::Constant(6, 0.3)));
    const double noise_a = evaluate_noisy(bench, x, rng_a) - evaluate_true(bench, x);
    const double noise_b = evaluate_noisy(bench, other, rng_b) - evaluate_true(bench, other);
    CHECK(noise_a == doctest::Approx(noise_b).epsilon(1e-9));  // up to rounding in the +/- reconstruction
  }
}

TEST_CASE("out-of-bounds evaluation is a contract violation") {
  const EmbeddedBenchmark bench = make_embedded(BenchmarkBase::kHartmann6, 6, 1);
  Vector x = bench.optimizer;
  x(0) = 1.5;
  CHECK_THROWS_AS(evaluate_true(bench, x), ContractViolation);
}

TEST_CASE("problem adapter exposes the unit-cube objective") {
  const EmbeddedBenchmark bench = make_embedded(BenchmarkBase::kHartmann6, 12, 8);
  const Problem problem = make_problem(bench);
  CHECK(problem.dimension == 12);
  CHECK(*problem.known_optimum == bench.known_optimum);
  const Vector u = to_unit(bench, bench.optimizer);
  CHECK(problem.objective(u) == doctest::Approx(bench.known_optimum).epsilon(1e-12));
}

TEST_CASE("metadata json names the instance") {
  const EmbeddedBenchmark bench = make_embedded(BenchmarkBase::kLevy4, 8, 123);
  const std::string json = benchmark_metadata_json(bench);
  CHECK(json.find("\"levy4\"") != std::string::npos);
  CHECK(json.find("\"seed\": 123") != std::string::npos);
  CHECK(json.find("active_dims") != std::string::npos);
}
