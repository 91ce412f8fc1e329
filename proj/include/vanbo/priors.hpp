#pragma once

#include <cmath>
#include <variant>

#include "vanbo/rng.hpp"
#include "vanbo/types.hpp"

namespace vanbo {

// Hyperprior building blocks for MAP fitting. Log-densities are expressed as
// functions of the log-parameter u = log(theta), the optimizer's coordinate,
// and include the Jacobian of the transform where the prior is over theta.

/// LogNormal over a positive parameter: log(theta) ~ N(location, scale^2).
struct LogNormalPrior {
  double location = 0.0;
  double scale = 1.0;

  double log_density_of_log(double u) const {
    const double z = (u - location) / scale;
    return -u - std::log(scale) - 0.5 * 1.83787706640934548 - 0.5 * z * z;
  }
  double d_log_density_d_log(double u) const { return -1.0 - (u - location) / (scale * scale); }
  double mode() const { return std::exp(location - scale * scale); }
  double sample(Rng& rng) const { return std::exp(location + scale * rng.normal()); }
};

/// Gamma(shape alpha, rate beta) over a positive parameter.
struct GammaPrior {
  double alpha = 3.0;
  double beta = 6.0;

  double log_density_of_log(double u) const {
    const double theta = std::exp(u);
    return alpha * std::log(beta) - std::lgamma(alpha) + (alpha - 1.0) * u - beta * theta;
  }
  double d_log_density_d_log(double u) const { return (alpha - 1.0) - beta * std::exp(u); }
  double mode() const { return alpha > 1.0 ? (alpha - 1.0) / beta : 1e-3; }
  double sample(Rng& rng) const;
};

/// Lengthscale prior choices. ScaledLogNormal carries the one-dimensional
/// reference parameters (mu0, sigma0); the location gains log(D)/2 at fit
/// time so the mode scales as sqrt(D). The Gamma variant optionally applies
/// the analogous scaling by dividing its rate by sqrt(D).
struct ScaledLogNormalLengthscale {
  double mu0 = std::sqrt(2.0);
  double sigma0 = std::sqrt(3.0);
};
struct GammaLengthscale {
  double alpha = 3.0;
  double beta = 6.0;
  bool scale_with_dimension = false;
};
struct FixedLengthscale {
  double value = 0.5;
};
using LengthscalePrior =
    std::variant<ScaledLogNormalLengthscale, GammaLengthscale, FixedLengthscale>;

struct FixedNoise {
  double value = 1e-6;
};
using NoisePrior = std::variant<LogNormalPrior, FixedNoise>;

enum class SignalVariancePolicy { kFixed, kLearned };
enum class MeanPrior { kFlat, kFixed };

struct HyperpriorSpec {
  LengthscalePrior lengthscale_prior = ScaledLogNormalLengthscale{};
  NoisePrior noise_prior = LogNormalPrior{-4.0, 1.0};
  SignalVariancePolicy signal_variance_policy = SignalVariancePolicy::kFixed;
  double fixed_signal_variance = 1.0;
  LogNormalPrior learned_signal_prior{1.0, 1.0};  // mode exactly 1 on the standardized scale
  MeanPrior mean_prior = MeanPrior::kFlat;
  double fixed_mean = 0.0;
};

/// Location of the dimension-scaled LogNormal lengthscale prior:
/// ell_i ~ LN(mu0 + log(D)/2, sigma0).
inline double scaled_lognormal_location(int dimension, double mu0) {
  if (dimension < 1) throw ContractViolation("scaled_lognormal_location: dimension must be >= 1");
  return mu0 + 0.5 * std::log(static_cast<double>(dimension));
}

/// Per-dimension lengthscale prior resolved for a D-dimensional problem.
LogNormalPrior scaled_lengthscale_prior(int dimension, double mu0, double sigma0);

/// Effective per-lengthscale prior for a given problem dimension. Returns the
/// LogNormal or Gamma density in a uniform interface; Fixed has no density.
struct ResolvedLengthscalePrior {
  bool fixed = false;
  double fixed_value = 0.0;
  bool is_gamma = false;
  LogNormalPrior log_normal;
  GammaPrior gamma;

  double log_density_of_log(double u) const {
    return is_gamma ? gamma.log_density_of_log(u) : log_normal.log_density_of_log(u);
  }
  double d_log_density_d_log(double u) const {
    return is_gamma ? gamma.d_log_density_d_log(u) : log_normal.d_log_density_d_log(u);
  }
  double mode() const { return is_gamma ? gamma.mode() : log_normal.mode(); }
  double sample(Rng& rng) const { return is_gamma ? gamma.sample(rng) : log_normal.sample(rng); }
};

ResolvedLengthscalePrior resolve_lengthscale_prior(const LengthscalePrior& prior, int dimension);

}  // namespace vanbo
