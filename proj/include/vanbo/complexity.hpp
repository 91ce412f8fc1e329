#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vanbo/kernel.hpp"
#include "vanbo/types.hpp"

namespace vanbo {

// Information-gain machinery for comparing the assumed complexity of model
// classes: gamma_n = max over n-point sets of 1/2 log|I + sigma_eps^-2 K|.

enum class ModelClassVariant {
  kIndependentKernel,
  kFixedLengthscale,
  kScaledLengthscale,
  kAddGpRandomGroups,
  kLocalGpShrunk,
  kRemboEmbedding,
};

std::string to_string(ModelClassVariant variant);

struct ModelClassSpec {
  ModelClassVariant variant = ModelClassVariant::kFixedLengthscale;
  KernelFamily family = KernelFamily::kRbf;
  int dimension = 1;  // ambient D
  double signal_variance = 1.0;
  double noise_variance = 1.0;
  double lengthscale = 0.5;     // ell for fixed/local, ell_base for scaled/rembo
  int reference_dimension = 6;  // scaled: ell_i = ell * sqrt(D / D_ref)
  double shrink_factor = 0.4;   // local: candidate cube side = factor * ell
  int embedded_dimension = 4;   // rembo d_e
  std::uint64_t seed = 0;       // addgp grouping / rembo embedding randomness
};

/// Kernel structure a model class induces for IG evaluation: one or more
/// independent groups of dimensions (AddGP has several), a candidate box,
/// or a purely diagonal Gram for the independent kernel.
struct EffectiveModel {
  struct Group {
    std::vector<int> dims;
    Vector lengthscales;  // aligned with dims
  };
  int point_dimension = 1;
  Vector domain_lower;  // candidate box; unit cube unless shrunk
  Vector domain_upper;
  std::vector<Group> groups;
  KernelFamily family = KernelFamily::kRbf;
  double signal_variance = 1.0;
  double noise_variance = 1.0;
  bool independent = false;
};

EffectiveModel build_model_class(const ModelClassSpec& spec);

struct MigCurve {
  std::vector<int> counts;
  std::vector<double> values;  // nats, non-decreasing in counts
  bool truncated = false;
};

/// 1/2 log|I + sigma_eps^-2 K| in nats via the Cholesky log-determinant.
double information_gain(const Matrix& gram, double noise_variance);

/// Greedy MIG approximation: repeatedly selects the pool point of maximal
/// posterior variance conditioned on previous selections (rank-one variance
/// updates). Returns the cumulative IG after each selection. The pool lives
/// in the model's candidate space. Asking for more points than the pool
/// holds truncates the curve and sets the flag.
MigCurve greedy_mig(const ModelClassSpec& spec, const Matrix& candidate_pool, int n);

/// IG of the first k Sobol points for k on a geometric grid up to n.
MigCurve sobol_mig(const ModelClassSpec& spec, int n, std::uint64_t seed);

/// Sobol pool in the model's candidate box: min(10 n, 50000) points.
Matrix default_candidate_pool(const EffectiveModel& model, int n, std::uint64_t seed);

}  // namespace vanbo
