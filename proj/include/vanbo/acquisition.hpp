#pragma once

#include <cstdint>

#include "vanbo/gp.hpp"
#include "vanbo/types.hpp"

namespace vanbo {

/// Expected improvement over y_max for a Gaussian belief N(mu, sigma^2),
/// maximization convention. At sigma = 0 this is the deterministic
/// improvement max(mu - y_max, 0).
double ei(double mu, double sigma, double y_max);

/// Stable log expected improvement with its z-score and the gradient with
/// respect to (mu, sigma). Finite and strictly increasing in z for all
/// sigma > 0, arbitrarily deep into the z < 0 tail.
struct LogEiValue {
  double value = 0.0;
  double z = 0.0;
  double d_mu = 0.0;
  double d_sigma = 0.0;
};

LogEiValue log_ei(double mu, double sigma, double y_max);

struct AcqConfig {
  int n_global_sobol = 512;
  int n_local_gaussian = 512;
  int n_refine = 4;
  double local_scale = 1e-3;  // per-coordinate std of the local Gaussian cloud
  int max_refine_iters = 50;
  double refine_gradient_tolerance = 1e-6;
};

struct AcqDiagnostics {
  double best_raw_log_ei = 0.0;  // best score over the 1024 raw candidates
  double returned_log_ei = 0.0;
};

/// One acquisition round: Sobol global candidates plus a Gaussian cloud
/// around the incumbent, then bound-clamped quasi-Newton ascent of log EI
/// from the best few. Deterministic given (model, seed, config); the result
/// lies in the unit cube and its log EI is at least that of every raw
/// candidate.
Vector optimize_acquisition(const GpModel& model, double y_max, const Vector& incumbent,
                            const AcqConfig& config, std::uint64_t seed,
                            AcqDiagnostics* diagnostics = nullptr);

}  // namespace vanbo
