#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "vanbo/gp.hpp"
#include "vanbo/priors.hpp"

namespace vanbo {

/// Standardizes targets to mean zero and unit sample standard deviation
/// (Bessel-corrected). A constant vector maps to all zeros with scale 1.
std::pair<Vector, Standardization> standardize(const Vector& raw);

enum class FitMode { kMap, kMle };

struct FitConfig {
  int n_restarts = 4;
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;
  FitMode mode = FitMode::kMap;
  std::uint64_t seed = 0;
};

struct FitResult {
  Hyperparameters hp;
  double objective_value = 0.0;
  bool converged = false;
  int restart_index = 0;
};

/// Raised when every restart fails to reach a finite objective. Carries the
/// best partial result if any evaluation succeeded.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, std::optional<FitResult> partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const std::optional<FitResult>& partial() const { return partial_; }

 private:
  std::optional<FitResult> partial_;
};

/// MAP objective: log marginal likelihood plus log hyperprior density over
/// the learned hyperparameters. MLE mode omits the prior term. The gradient
/// covers all hyperparameters in log space (mean constant untransformed);
/// pinned parameters simply have their entries ignored by the fitter.
double map_objective(const GpModel& model, const HyperpriorSpec& priors, FitMode mode,
                     LmlGradient& gradient);
double map_objective(const GpModel& model, const HyperpriorSpec& priors, FitMode mode);

/// Multi-restart quasi-Newton MAP/MLE fit in log space. Restart 0 starts at
/// the prior mode; the rest start from prior samples. Requires n >= 2.
FitResult fit(const Dataset& data, const KernelSpec& kernel, const HyperpriorSpec& priors,
              const FitConfig& config);

/// Closed-form optimal signal variance (1/n) y^T K^-1 y for a model whose
/// covariance (including noise) was factorized with unit signal variance.
double signal_variance_hat(const Vector& targets, const GpModel& model);

}  // namespace vanbo
