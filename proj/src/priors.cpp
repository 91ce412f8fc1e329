#include "vanbo/priors.hpp"

namespace vanbo {

double GammaPrior::sample(Rng& rng) const {
  // Marsaglia-Tsang for alpha >= 1; boost via the alpha+1 trick below it.
  double a = alpha;
  double boost = 1.0;
  if (a < 1.0) {
    boost = std::pow(rng.uniform(), 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x ||
        std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return boost * d * v / beta;
    }
  }
}

LogNormalPrior scaled_lengthscale_prior(int dimension, double mu0, double sigma0) {
  if (!(sigma0 > 0.0)) throw ContractViolation("scaled_lengthscale_prior: sigma0 must be > 0");
  return LogNormalPrior{scaled_lognormal_location(dimension, mu0), sigma0};
}

ResolvedLengthscalePrior resolve_lengthscale_prior(const LengthscalePrior& prior, int dimension) {
  ResolvedLengthscalePrior out;
  if (const auto* ln = std::get_if<ScaledLogNormalLengthscale>(&prior)) {
    out.log_normal = scaled_lengthscale_prior(dimension, ln->mu0, ln->sigma0);
  } else if (const auto* gp = std::get_if<GammaLengthscale>(&prior)) {
    if (!(gp->alpha > 0.0) || !(gp->beta > 0.0)) {
      throw ContractViolation("GammaLengthscale: alpha and beta must be > 0");
    }
    out.is_gamma = true;
    out.gamma.alpha = gp->alpha;
    out.gamma.beta = gp->scale_with_dimension
                         ? gp->beta / std::sqrt(static_cast<double>(dimension))
                         : gp->beta;
  } else {
    out.fixed = true;
    out.fixed_value = std::get<FixedLengthscale>(prior).value;
  }
  return out;
}

}  // namespace vanbo
