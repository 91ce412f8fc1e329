#pragma once

#include <optional>
#include <vector>

#include "vanbo/kernel.hpp"
#include "vanbo/types.hpp"

namespace vanbo {

/// Affine map between raw and standardized targets: std = (raw - mean) / scale.
struct Standardization {
  double mean = 0.0;
  double scale = 1.0;

  double to_standardized(double raw) const { return (raw - mean) / scale; }
  double to_raw(double standardized) const { return mean + scale * standardized; }
};

/// Training data on the unit cube with standardized targets.
struct Dataset {
  Matrix inputs;   // n x D, rows are points
  Vector targets;  // length n
  Standardization standardization;

  Eigen::Index size() const { return targets.size(); }
  int dimension() const { return static_cast<int>(inputs.cols()); }
};

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;  // latent (noise-free) variance
};

struct PosteriorWithGradient {
  double mean = 0.0;
  double variance = 0.0;
  Vector mean_gradient;      // d mu / d x
  Vector variance_gradient;  // d sigma^2 / d x
};

/// Gradient of the log marginal likelihood. Positive hyperparameters are
/// differentiated in log space (the optimizer's coordinates); the mean
/// constant is unconstrained and differentiated directly.
struct LmlGradient {
  Vector log_lengthscales;
  double log_signal_variance = 0.0;
  double log_noise_variance = 0.0;
  double mean_constant = 0.0;
};

// Immutable GP: kernel, hyperparameters, data and the cached Cholesky factor
// of K + sigma_eps^2 I together with alpha = (K + sigma_eps^2 I)^-1 (y - c).
// Safe for concurrent read-only posterior queries after construction.
class GpModel {
 public:
  GpModel(KernelSpec spec, Hyperparameters hp, Dataset data);

  const KernelSpec& spec() const { return spec_; }
  const Hyperparameters& hp() const { return hp_; }
  const Dataset& data() const { return data_; }
  const Matrix& cholesky_factor() const { return chol_; }
  const Vector& alpha() const { return alpha_; }
  double jitter() const { return jitter_; }

  Posterior posterior(const Vector& query) const;
  std::vector<Posterior> posterior(const Matrix& query_rows) const;
  PosteriorWithGradient posterior_with_gradient(const Vector& query) const;

  /// Log marginal likelihood of the training targets.
  double log_marginal_likelihood() const;
  double log_marginal_likelihood(LmlGradient& gradient) const;

  /// Solves (K + sigma_eps^2 I) z = rhs with the cached factorization.
  Vector solve(const Vector& rhs) const;

 private:
  Matrix solve_identity() const;  // (K + sigma_eps^2 I)^-1

  KernelSpec spec_;
  Hyperparameters hp_;
  Dataset data_;
  Matrix chol_;   // lower triangular
  Vector alpha_;
  double jitter_ = 0.0;
};

/// Cholesky with jitter escalation: tries 0, then 1e-8 * 10^k up to 1e-4.
/// Throws NumericalError with condition diagnostics when everything fails.
/// Returns the jitter that succeeded through `jitter_used` when non-null.
Matrix cholesky_with_jitter(const Matrix& symmetric, double* jitter_used = nullptr);

}  // namespace vanbo
