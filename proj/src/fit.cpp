#include "vanbo/fit.hpp"

#include <cmath>
#include <limits>

#include "vanbo/lbfgs.hpp"

namespace vanbo {

std::pair<Vector, Standardization> standardize(const Vector& raw) {
  if (raw.size() < 1) throw ContractViolation("standardize: need at least one value");
  Standardization st;
  st.mean = raw.mean();
  const Eigen::Index n = raw.size();
  if (n > 1) {
    const double ss = (raw.array() - st.mean).square().sum() / static_cast<double>(n - 1);
    st.scale = std::sqrt(ss);
  }
  if (!(st.scale > 0.0) || !std::isfinite(st.scale)) st.scale = 1.0;
  Vector out = (raw.array() - st.mean) / st.scale;
  return {std::move(out), st};
}

namespace {

// Which hyperparameters the optimizer actually moves, and their packing into
// a flat log-space vector: [log ell (D) | log sigma_eps^2 | log sigma_f^2 | c].
struct ActiveLayout {
  int dimension = 0;
  bool learn_lengthscales = false;
  bool learn_noise = false;
  bool learn_signal = false;
  bool learn_mean = false;

  int size() const {
    return (learn_lengthscales ? dimension : 0) + (learn_noise ? 1 : 0) +
           (learn_signal ? 1 : 0) + (learn_mean ? 1 : 0);
  }

  Vector pack(const Hyperparameters& hp) const {
    Vector v(size());
    int at = 0;
    if (learn_lengthscales) {
      v.segment(0, dimension) = hp.lengthscales.array().log();
      at += dimension;
    }
    if (learn_noise) v(at++) = std::log(hp.noise_variance);
    if (learn_signal) v(at++) = std::log(hp.signal_variance);
    if (learn_mean) v(at++) = hp.mean_constant;
    return v;
  }

  Hyperparameters unpack(const Vector& v, const Hyperparameters& pinned) const {
    Hyperparameters hp = pinned;
    int at = 0;
    if (learn_lengthscales) {
      hp.lengthscales = v.segment(0, dimension).array().exp();
      at += dimension;
    }
    if (learn_noise) hp.noise_variance = std::exp(v(at++));
    if (learn_signal) hp.signal_variance = std::exp(v(at++));
    if (learn_mean) hp.mean_constant = v(at++);
    return hp;
  }

  Vector pack_gradient(const LmlGradient& g) const {
    Vector v(size());
    int at = 0;
    if (learn_lengthscales) {
      v.segment(0, dimension) = g.log_lengthscales;
      at += dimension;
    }
    if (learn_noise) v(at++) = g.log_noise_variance;
    if (learn_signal) v(at++) = g.log_signal_variance;
    if (learn_mean) v(at++) = g.mean_constant;
    return v;
  }
};

ActiveLayout make_layout(const HyperpriorSpec& priors, int dimension) {
  ActiveLayout layout;
  layout.dimension = dimension;
  layout.learn_lengthscales = !std::holds_alternative<FixedLengthscale>(priors.lengthscale_prior);
  layout.learn_noise = !std::holds_alternative<FixedNoise>(priors.noise_prior);
  layout.learn_signal = priors.signal_variance_policy == SignalVariancePolicy::kLearned;
  layout.learn_mean = priors.mean_prior == MeanPrior::kFlat;
  return layout;
}

// Prior log density (and its gradient contribution) over the learned
// hyperparameters. The flat mean prior contributes nothing.
double prior_log_density(const Hyperparameters& hp, const HyperpriorSpec& priors,
                         const ActiveLayout& layout,
                         const ResolvedLengthscalePrior& lengthscale_prior,
                         LmlGradient* gradient) {
  double total = 0.0;
  if (layout.learn_lengthscales) {
    for (int i = 0; i < layout.dimension; ++i) {
      const double u = std::log(hp.lengthscales(i));
      total += lengthscale_prior.log_density_of_log(u);
      if (gradient != nullptr) {
        gradient->log_lengthscales(i) += lengthscale_prior.d_log_density_d_log(u);
      }
    }
  }
  if (layout.learn_noise) {
    const auto& noise = std::get<LogNormalPrior>(priors.noise_prior);
    const double u = std::log(hp.noise_variance);
    total += noise.log_density_of_log(u);
    if (gradient != nullptr) gradient->log_noise_variance += noise.d_log_density_d_log(u);
  }
  if (layout.learn_signal) {
    const double u = std::log(hp.signal_variance);
    total += priors.learned_signal_prior.log_density_of_log(u);
    if (gradient != nullptr) {
      gradient->log_signal_variance += priors.learned_signal_prior.d_log_density_d_log(u);
    }
  }
  return total;
}

Hyperparameters pinned_hyperparameters(const HyperpriorSpec& priors, int dimension) {
  Hyperparameters hp;
  hp.lengthscales = Vector::Ones(dimension);
  if (const auto* fixed = std::get_if<FixedLengthscale>(&priors.lengthscale_prior)) {
    hp.lengthscales.setConstant(fixed->value);
  }
  if (const auto* fixed = std::get_if<FixedNoise>(&priors.noise_prior)) {
    hp.noise_variance = fixed->value;
  }
  hp.signal_variance = priors.signal_variance_policy == SignalVariancePolicy::kFixed
                           ? priors.fixed_signal_variance
                           : 1.0;
  hp.mean_constant = priors.mean_prior == MeanPrior::kFixed ? priors.fixed_mean : 0.0;
  return hp;
}

Hyperparameters prior_mode_start(const HyperpriorSpec& priors, const ActiveLayout& layout,
                                 const ResolvedLengthscalePrior& lengthscale_prior,
                                 int dimension) {
  Hyperparameters hp = pinned_hyperparameters(priors, dimension);
  if (layout.learn_lengthscales) hp.lengthscales.setConstant(lengthscale_prior.mode());
  if (layout.learn_noise) {
    hp.noise_variance = std::get<LogNormalPrior>(priors.noise_prior).mode();
  }
  if (layout.learn_signal) hp.signal_variance = priors.learned_signal_prior.mode();
  return hp;
}

Hyperparameters prior_sample_start(const HyperpriorSpec& priors, const ActiveLayout& layout,
                                   const ResolvedLengthscalePrior& lengthscale_prior,
                                   int dimension, Rng& rng) {
  Hyperparameters hp = pinned_hyperparameters(priors, dimension);
  if (layout.learn_lengthscales) {
    for (int i = 0; i < dimension; ++i) hp.lengthscales(i) = lengthscale_prior.sample(rng);
  }
  if (layout.learn_noise) {
    hp.noise_variance = std::get<LogNormalPrior>(priors.noise_prior).sample(rng);
  }
  if (layout.learn_signal) hp.signal_variance = priors.learned_signal_prior.sample(rng);
  if (layout.learn_mean) hp.mean_constant = rng.normal();
  return hp;
}

}  // namespace

double map_objective(const GpModel& model, const HyperpriorSpec& priors, FitMode mode,
                     LmlGradient& gradient) {
  const int dimension = model.spec().dimension;
  const ActiveLayout layout = make_layout(priors, dimension);
  const ResolvedLengthscalePrior lengthscale_prior =
      resolve_lengthscale_prior(priors.lengthscale_prior, dimension);
  double value = model.log_marginal_likelihood(gradient);
  if (mode == FitMode::kMap) {
    value += prior_log_density(model.hp(), priors, layout, lengthscale_prior, &gradient);
  }
  return value;
}

double map_objective(const GpModel& model, const HyperpriorSpec& priors, FitMode mode) {
  LmlGradient gradient;
  return map_objective(model, priors, mode, gradient);
}

FitResult fit(const Dataset& data, const KernelSpec& kernel, const HyperpriorSpec& priors,
              const FitConfig& config) {
  if (data.size() < 2) throw ContractViolation("fit: need at least two observations");
  if (config.n_restarts < 1) throw ContractViolation("fit: n_restarts must be >= 1");
  const int dimension = kernel.dimension;
  const ActiveLayout layout = make_layout(priors, dimension);
  const ResolvedLengthscalePrior lengthscale_prior =
      resolve_lengthscale_prior(priors.lengthscale_prior, dimension);

  if (layout.size() == 0) {
    // Everything pinned; nothing to optimize.
    Hyperparameters hp = pinned_hyperparameters(priors, dimension);
    GpModel model(kernel, hp, data);
    return {hp, map_objective(model, priors, config.mode), true, 0};
  }

  // Minimize the negative objective in log space.
  const auto negative_objective = [&](const Vector& v, Vector& grad) -> double {
    const Hyperparameters hp = layout.unpack(v, pinned_hyperparameters(priors, dimension));
    try {
      GpModel model(kernel, hp, data);
      LmlGradient g;
      g.log_lengthscales = Vector::Zero(dimension);
      const double value = map_objective(model, priors, config.mode, g);
      grad = -layout.pack_gradient(g);
      if (!std::isfinite(value)) return std::numeric_limits<double>::infinity();
      return -value;
    } catch (const NumericalError&) {
      grad = Vector::Zero(v.size());
      return std::numeric_limits<double>::infinity();
    }
  };

  // Wide guards against overflow in the exp transform, not active constraints.
  Vector lower = Vector::Constant(layout.size(), -20.0);
  Vector upper = Vector::Constant(layout.size(), 12.0);
  if (layout.learn_mean) {
    lower(layout.size() - 1) = -1e3;
    upper(layout.size() - 1) = 1e3;
  }

  LbfgsOptions options;
  options.max_iterations = config.max_iterations;
  options.gradient_tolerance = config.gradient_tolerance;

  Rng rng(derive_seed(config.seed, 0x66697473ULL));  // restart sampling stream
  std::optional<FitResult> best;
  int failed = 0;
  for (int restart = 0; restart < config.n_restarts; ++restart) {
    const Hyperparameters start =
        restart == 0 ? prior_mode_start(priors, layout, lengthscale_prior, dimension)
                     : prior_sample_start(priors, layout, lengthscale_prior, dimension, rng);
    const LbfgsResult opt = lbfgs_minimize(negative_objective, layout.pack(start), lower,
                                           upper, options);
    if (!std::isfinite(opt.value)) {
      ++failed;
      continue;
    }
    FitResult candidate;
    candidate.hp = layout.unpack(opt.x, pinned_hyperparameters(priors, dimension));
    candidate.objective_value = -opt.value;
    candidate.converged = opt.converged;
    candidate.restart_index = restart;
    if (!best || candidate.objective_value > best->objective_value) best = candidate;
  }
  if (!best) {
    throw FitError("fit: all " + std::to_string(failed) + " restarts diverged", std::nullopt);
  }
  return *best;
}

double signal_variance_hat(const Vector& targets, const GpModel& model) {
  if (model.data().size() == 0) throw ContractViolation("signal_variance_hat: empty model");
  if (targets.size() != model.data().size()) {
    throw ContractViolation("signal_variance_hat: target length does not match model data");
  }
  if (std::abs(model.hp().signal_variance - 1.0) > 1e-12) {
    throw ContractViolation("signal_variance_hat: model must be factorized with sigma_f^2 = 1");
  }
  return targets.dot(model.solve(targets)) / static_cast<double>(targets.size());
}

}  // namespace vanbo
