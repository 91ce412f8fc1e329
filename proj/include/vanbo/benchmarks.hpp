#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vanbo/bo.hpp"
#include "vanbo/rng.hpp"
#include "vanbo/types.hpp"

namespace vanbo {

enum class BenchmarkBase { kLevy4, kHartmann6 };

std::string to_string(BenchmarkBase base);

// Synthetic maximization benchmark embedded in a D-dimensional ambient box:
// only the active coordinates influence the value, the rest are inert. Levy
// actives are offset per seed so the optimizer is not pinned at a special
// location; Hartmann lives on [0,1]^D as published. Standard minimization
// forms are negated.
struct EmbeddedBenchmark {
  BenchmarkBase base = BenchmarkBase::kHartmann6;
  int effective_dimension = 6;
  int ambient_dimension = 6;
  std::vector<int> active_dims;  // distinct indices into the ambient space
  Vector offsets;                // per-active-dim shift (Levy only, zero otherwise)
  Vector lower_bounds;           // per-ambient-dim native box
  Vector upper_bounds;
  double noise_std = 0.01;
  double known_optimum = 0.0;    // maximized value at the constructed optimizer
  Vector optimizer;              // native-coordinates argmax
  std::uint64_t seed = 0;
};

/// Randomly embedded instance; active dimensions and Levy offsets are drawn
/// from the seed. D = d_e places the actives on a seeded permutation.
EmbeddedBenchmark make_embedded(BenchmarkBase base, int ambient_dimension, std::uint64_t seed);

/// Noiseless value at a native-coordinates point (maximization sign).
double evaluate_true(const EmbeddedBenchmark& bench, const Vector& x_native);

/// evaluate_true plus N(0, noise_std^2) observation noise from the stream.
double evaluate_noisy(const EmbeddedBenchmark& bench, const Vector& x_native, Rng& rng);

/// Affine unit-cube <-> native-bounds maps.
Vector to_native(const EmbeddedBenchmark& bench, const Vector& x_unit);
Vector to_unit(const EmbeddedBenchmark& bench, const Vector& x_native);

/// Problem adapter for the BO engine: unit-cube objective returning
/// noiseless values, noise handled by the engine.
Problem make_problem(const EmbeddedBenchmark& bench);

/// Benchmark metadata as a JSON string (base, D, active dims, offsets, seed).
std::string benchmark_metadata_json(const EmbeddedBenchmark& bench);

}  // namespace vanbo
