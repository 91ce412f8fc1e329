#include "vanbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vanbo/lbfgs.hpp"
#include "vanbo/rng.hpp"
#include "vanbo/normal.hpp"
#include "vanbo/sobol.hpp"

namespace vanbo {

double ei(double mu, double sigma, double y_max) {
  if (sigma < 0.0) throw ContractViolation("ei: sigma must be non-negative");
  if (sigma == 0.0) return std::max(mu - y_max, 0.0);
  const double z = (mu - y_max) / sigma;
  return sigma * (z * normal_cdf(z) + normal_pdf(z));
}

LogEiValue log_ei(double mu, double sigma, double y_max) {
  if (!(sigma > 0.0)) throw ContractViolation("log_ei: sigma must be positive");
  LogEiValue out;
  out.z = (mu - y_max) / sigma;
  out.value = std::log(sigma) + detail::log_h(out.z);
  const double w = detail::cdf_over_h(out.z);
  out.d_mu = w / sigma;
  out.d_sigma = (1.0 - w * out.z) / sigma;
  return out;
}

namespace {

constexpr double kMinSigma = 1e-12;

// log EI extended to sigma ~ 0 candidates for ranking purposes.
double ranked_log_ei(double mu, double sigma, double y_max) {
  if (sigma <= kMinSigma) {
    const double improvement = mu - y_max;
    return improvement > 0.0 ? std::log(improvement)
                             : -std::numeric_limits<double>::infinity();
  }
  return log_ei(mu, sigma, y_max).value;
}

}  // namespace

Vector optimize_acquisition(const GpModel& model, double y_max, const Vector& incumbent,
                            const AcqConfig& config, std::uint64_t seed,
                            AcqDiagnostics* diagnostics) {
  const int dim = model.spec().dimension;
  if (incumbent.size() != dim) {
    throw ContractViolation("optimize_acquisition: incumbent dimension mismatch");
  }
  if ((incumbent.array() < 0.0).any() || (incumbent.array() > 1.0).any()) {
    throw ContractViolation("optimize_acquisition: incumbent outside the unit cube");
  }
  if (config.n_refine > config.n_global_sobol + config.n_local_gaussian) {
    throw ContractViolation("optimize_acquisition: n_refine exceeds the candidate count");
  }

  const int n_candidates = config.n_global_sobol + config.n_local_gaussian;
  Matrix candidates(n_candidates, dim);
  candidates.topRows(config.n_global_sobol) =
      sobol(config.n_global_sobol, dim, derive_seed(seed, 0x61637175ULL));
  candidates.bottomRows(config.n_local_gaussian) =
      gaussian_around(incumbent, Vector::Constant(dim, config.local_scale),
                      config.n_local_gaussian, derive_seed(seed, 0x61637167ULL));

  const std::vector<Posterior> beliefs = model.posterior(candidates);
  Vector scores(n_candidates);
  double max_sigma = 0.0;
  for (int i = 0; i < n_candidates; ++i) {
    const double sigma = std::sqrt(std::max(0.0, beliefs[static_cast<std::size_t>(i)].variance));
    max_sigma = std::max(max_sigma, sigma);
    scores(i) = ranked_log_ei(beliefs[static_cast<std::size_t>(i)].mean, sigma, y_max);
  }
  if (max_sigma <= kMinSigma) {
    throw NumericalError("optimize_acquisition: degenerate model, zero variance everywhere");
  }

  // Top candidates by score, ties broken by candidate index.
  std::vector<int> order(static_cast<std::size_t>(n_candidates));
  std::iota(order.begin(), order.end(), 0);
  const int n_refine = std::min(config.n_refine, n_candidates);
  std::partial_sort(order.begin(), order.begin() + n_refine, order.end(),
                    [&](int a, int b) {
                      if (scores(a) != scores(b)) return scores(a) > scores(b);
                      return a < b;
                    });

  const auto negative_log_ei = [&](const Vector& x, Vector& grad) -> double {
    const PosteriorWithGradient p = model.posterior_with_gradient(x);
    const double sigma = std::sqrt(std::max(0.0, p.variance));
    if (sigma <= kMinSigma) {
      grad = Vector::Zero(dim);
      return std::numeric_limits<double>::infinity();
    }
    const LogEiValue v = log_ei(p.mean, sigma, y_max);
    grad = -(v.d_mu * p.mean_gradient + v.d_sigma / (2.0 * sigma) * p.variance_gradient);
    return -v.value;
  };

  LbfgsOptions options;
  options.max_iterations = config.max_refine_iters;
  options.gradient_tolerance = config.refine_gradient_tolerance;
  const Vector lower = Vector::Zero(dim);
  const Vector upper = Vector::Ones(dim);

  Vector best_point = candidates.row(order[0]);
  double best_score = scores(order[0]);
  const double best_raw = best_score;
  for (int k = 0; k < n_refine; ++k) {
    const Vector start = candidates.row(order[static_cast<std::size_t>(k)]);
    const LbfgsResult refined = lbfgs_minimize(negative_log_ei, start, lower, upper, options);
    const double refined_score = -refined.value;
    if (std::isfinite(refined_score) && refined_score > best_score) {
      best_score = refined_score;
      best_point = refined.x;
    }
  }
  if (diagnostics != nullptr) {
    diagnostics->best_raw_log_ei = best_raw;
    diagnostics->returned_log_ei = best_score;
  }
  return best_point.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace vanbo
