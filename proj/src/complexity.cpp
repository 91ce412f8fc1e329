#include "vanbo/complexity.hpp"

#include <algorithm>
#include <cmath>

#include "vanbo/gp.hpp"
#include "vanbo/rng.hpp"
#include "vanbo/sobol.hpp"

namespace vanbo {

std::string to_string(ModelClassVariant variant) {
  switch (variant) {
    case ModelClassVariant::kIndependentKernel: return "independent";
    case ModelClassVariant::kFixedLengthscale: return "fixed";
    case ModelClassVariant::kScaledLengthscale: return "scaled";
    case ModelClassVariant::kAddGpRandomGroups: return "addgp";
    case ModelClassVariant::kLocalGpShrunk: return "local";
    case ModelClassVariant::kRemboEmbedding: return "rembo";
  }
  return "unknown";
}

EffectiveModel build_model_class(const ModelClassSpec& spec) {
  if (spec.dimension < 1) throw ContractViolation("build_model_class: dimension must be >= 1");
  if (!(spec.signal_variance > 0.0) || !(spec.noise_variance > 0.0) ||
      !(spec.lengthscale > 0.0)) {
    throw ContractViolation("build_model_class: variances and lengthscale must be positive");
  }
  EffectiveModel model;
  model.family = spec.family;
  model.signal_variance = spec.signal_variance;
  model.noise_variance = spec.noise_variance;
  model.point_dimension = spec.dimension;
  model.domain_lower = Vector::Zero(spec.dimension);
  model.domain_upper = Vector::Ones(spec.dimension);

  const auto all_dims = [&](int count) {
    std::vector<int> dims(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) dims[static_cast<std::size_t>(i)] = i;
    return dims;
  };

  switch (spec.variant) {
    case ModelClassVariant::kIndependentKernel:
      model.independent = true;
      break;
    case ModelClassVariant::kFixedLengthscale:
      model.groups.push_back(
          {all_dims(spec.dimension), Vector::Constant(spec.dimension, spec.lengthscale)});
      break;
    case ModelClassVariant::kScaledLengthscale: {
      if (spec.reference_dimension < 1) {
        throw ContractViolation("build_model_class: reference dimension must be >= 1");
      }
      const double ell = spec.lengthscale * std::sqrt(static_cast<double>(spec.dimension) /
                                                      spec.reference_dimension);
      model.groups.push_back({all_dims(spec.dimension), Vector::Constant(spec.dimension, ell)});
      break;
    }
    case ModelClassVariant::kAddGpRandomGroups: {
      // One dimension at a time, equal probability over existing groups and
      // one fresh group.
      Rng rng(derive_seed(spec.seed, 0x61646467ULL));
      std::vector<std::vector<int>> groups;
      for (int d = 0; d < spec.dimension; ++d) {
        const std::uint64_t pick = rng.below(groups.size() + 1);
        if (pick == groups.size()) {
          groups.push_back({d});
        } else {
          groups[static_cast<std::size_t>(pick)].push_back(d);
        }
      }
      for (auto& dims : groups) {
        const int size = static_cast<int>(dims.size());
        model.groups.push_back({std::move(dims), Vector::Constant(size, spec.lengthscale)});
      }
      break;
    }
    case ModelClassVariant::kLocalGpShrunk: {
      const double side = std::min(1.0, spec.shrink_factor * spec.lengthscale);
      model.domain_lower = Vector::Constant(spec.dimension, 0.5 - 0.5 * side);
      model.domain_upper = Vector::Constant(spec.dimension, 0.5 + 0.5 * side);
      model.groups.push_back(
          {all_dims(spec.dimension), Vector::Constant(spec.dimension, spec.lengthscale)});
      break;
    }
    case ModelClassVariant::kRemboEmbedding: {
      const int d_e = spec.embedded_dimension;
      if (d_e < 1 || d_e > spec.dimension) {
        throw ContractViolation("build_model_class: embedded dimension must be in [1, D]");
      }
      // Gaussian embedding A (D x d_e); effective subspace lengthscale is the
      // base lengthscale divided by the column norm.
      Rng rng(derive_seed(spec.seed, 0x72656D62ULL));
      Vector lengthscales(d_e);
      for (int j = 0; j < d_e; ++j) {
        double sq = 0.0;
        for (int i = 0; i < spec.dimension; ++i) {
          const double a = rng.normal();
          sq += a * a;
        }
        lengthscales(j) = spec.lengthscale / std::sqrt(sq);
      }
      model.point_dimension = d_e;
      model.domain_lower = Vector::Zero(d_e);
      model.domain_upper = Vector::Ones(d_e);
      model.groups.push_back({all_dims(d_e), std::move(lengthscales)});
      break;
    }
  }
  return model;
}

double information_gain(const Matrix& gram, double noise_variance) {
  if (gram.rows() != gram.cols()) throw ContractViolation("information_gain: square matrix");
  if (!(noise_variance > 0.0)) {
    throw ContractViolation("information_gain: noise variance must be > 0");
  }
  const Eigen::Index n = gram.rows();
  if (n == 0) return 0.0;
  Matrix shifted = gram;
  shifted.diagonal().array() += noise_variance;
  const Matrix chol = cholesky_with_jitter(shifted);
  return chol.diagonal().array().log().sum() -
         0.5 * static_cast<double>(n) * std::log(noise_variance);
}

namespace {

// Gram of a group's kernel over the given pool rows.
Matrix group_gram(const EffectiveModel& model, const EffectiveModel::Group& group,
                  const Matrix& pool) {
  Matrix sliced(pool.rows(), static_cast<Eigen::Index>(group.dims.size()));
  for (std::size_t j = 0; j < group.dims.size(); ++j) {
    sliced.col(static_cast<Eigen::Index>(j)) = pool.col(group.dims[j]);
  }
  KernelSpec kernel{model.family, static_cast<int>(group.dims.size())};
  Hyperparameters hp;
  hp.lengthscales = group.lengthscales;
  hp.signal_variance = model.signal_variance;
  return gram_matrix(kernel, hp, sliced);
}

std::vector<int> geometric_grid(int n) {
  std::vector<int> counts;
  double k = 1.0;
  while (static_cast<int>(k) < n) {
    counts.push_back(static_cast<int>(k));
    k = std::max(k + 1.0, k * 1.25);
  }
  counts.push_back(n);
  return counts;
}

}  // namespace

Matrix default_candidate_pool(const EffectiveModel& model, int n, std::uint64_t seed) {
  const int pool_size = std::min(10 * n, 50000);
  Matrix pool = sobol(pool_size, model.point_dimension, seed);
  const Vector span = model.domain_upper - model.domain_lower;
  pool.array().rowwise() *= span.transpose().array();
  pool.array().rowwise() += model.domain_lower.transpose().array();
  return pool;
}

MigCurve greedy_mig(const ModelClassSpec& spec, const Matrix& candidate_pool, int n) {
  const EffectiveModel model = build_model_class(spec);
  if (candidate_pool.cols() != model.point_dimension) {
    throw ContractViolation("greedy_mig: pool dimension does not match the model class");
  }
  const int pool_size = static_cast<int>(candidate_pool.rows());
  MigCurve curve;
  if (n > pool_size) {
    curve.truncated = true;
    n = pool_size;
  }
  const double noise = model.noise_variance;

  if (model.independent) {
    const double gain = 0.5 * std::log1p(model.signal_variance / noise);
    for (int t = 1; t <= n; ++t) {
      curve.counts.push_back(t);
      curve.values.push_back(gain * t);
    }
    return curve;
  }

  // Per-group pivoted-Cholesky state: residual variances for the whole pool
  // plus the factor rows of the selected points.
  const std::size_t n_groups = model.groups.size();
  std::vector<Matrix> grams(n_groups);
  std::vector<Vector> variances(n_groups);
  std::vector<Matrix> factor_rows(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    grams[g] = group_gram(model, model.groups[g], candidate_pool);
    variances[g] = Vector::Constant(pool_size, model.signal_variance);
    factor_rows[g] = Matrix(n, pool_size);
  }
  std::vector<bool> selected(static_cast<std::size_t>(pool_size), false);

  double total = 0.0;
  for (int t = 0; t < n; ++t) {
    // Maximal total posterior variance, ties broken by pool index.
    int best = -1;
    double best_score = -1.0;
    for (int i = 0; i < pool_size; ++i) {
      if (selected[static_cast<std::size_t>(i)]) continue;
      double score = 0.0;
      for (std::size_t g = 0; g < n_groups; ++g) score += variances[g](i);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    selected[static_cast<std::size_t>(best)] = true;

    for (std::size_t g = 0; g < n_groups; ++g) {
      const double pivot_var = std::max(variances[g](best), 0.0);
      total += 0.5 * std::log1p(pivot_var / noise);
      const double denom = std::sqrt(pivot_var + noise);
      Vector row = grams[g].col(best);
      if (t > 0) {
        row.noalias() -= factor_rows[g].topRows(t).transpose() *
                         factor_rows[g].topRows(t).col(best);
      }
      row /= denom;
      factor_rows[g].row(t) = row.transpose();
      variances[g].array() -= row.array().square();
    }
    curve.counts.push_back(t + 1);
    curve.values.push_back(total);
  }
  return curve;
}

MigCurve sobol_mig(const ModelClassSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw ContractViolation("sobol_mig: n must be >= 1");
  const EffectiveModel model = build_model_class(spec);
  MigCurve curve;
  curve.counts = geometric_grid(n);

  if (model.independent) {
    const double gain = 0.5 * std::log1p(model.signal_variance / model.noise_variance);
    for (const int k : curve.counts) curve.values.push_back(gain * k);
    return curve;
  }

  Matrix points = sobol(n, model.point_dimension, seed);
  const Vector span = model.domain_upper - model.domain_lower;
  points.array().rowwise() *= span.transpose().array();
  points.array().rowwise() += model.domain_lower.transpose().array();

  // Principal minors of one Cholesky factorization give the IG of every
  // prefix of the point sequence at once.
  Vector cumulative_log_det = Vector::Zero(n);
  for (const auto& group : model.groups) {
    Matrix gram = group_gram(model, group, points);
    gram.diagonal().array() += model.noise_variance;
    const Matrix chol = cholesky_with_jitter(gram);
    double acc = 0.0;
    for (int t = 0; t < n; ++t) {
      acc += std::log(chol(t, t));
      cumulative_log_det(t) += acc;
    }
  }
  const double per_point = 0.5 * static_cast<double>(model.groups.size()) *
                           std::log(model.noise_variance);
  for (const int k : curve.counts) {
    curve.values.push_back(cumulative_log_det(k - 1) - per_point * k);
  }
  return curve;
}

}  // namespace vanbo
