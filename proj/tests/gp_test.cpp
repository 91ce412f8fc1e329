#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "vanbo/gp.hpp"
#include "vanbo/rng.hpp"

using namespace vanbo;

namespace {

Dataset random_dataset(int n, int dim, Rng& rng) {
  Dataset data;
  data.inputs = Matrix(n, dim);
  data.targets = Vector(n);
  for (Eigen::Index i = 0; i < data.inputs.size(); ++i) data.inputs(i) = rng.uniform();
  for (int i = 0; i < n; ++i) data.targets(i) = rng.normal();
  return data;
}

Hyperparameters random_hp(int dim, Rng& rng) {
  Hyperparameters hp;
  hp.lengthscales = Vector(dim);
  for (int i = 0; i < dim; ++i) hp.lengthscales(i) = 0.2 + 0.8 * rng.uniform();
  hp.signal_variance = 0.5 + rng.uniform();
  hp.noise_variance = 0.01 + 0.1 * rng.uniform();
  hp.mean_constant = rng.normal();
  return hp;
}

// Dense explicit-inverse posterior, kept deliberately independent of the
// Cholesky path used by GpModel.
Posterior dense_oracle(const KernelSpec& spec, const Hyperparameters& hp, const Dataset& data,
                       const Vector& query) {
  const Eigen::Index n = data.size();
  Matrix k(n, n);
  Vector k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = kernel_eval(spec, hp, Vector(data.inputs.row(i)), Vector(data.inputs.row(j)));
    }
    k(i, i) += hp.noise_variance;
    k_star(i) = kernel_eval(spec, hp, query, Vector(data.inputs.row(i)));
  }
  const Matrix k_inv = k.inverse();
  Posterior out;
  out.mean = hp.mean_constant +
             k_star.dot(k_inv * (data.targets.array() - hp.mean_constant).matrix());
  out.variance = hp.signal_variance - k_star.dot(k_inv * k_star);
  return out;
}

}  // namespace

TEST_CASE("empty dataset reverts to the prior") {
  Hyperparameters hp;
  hp.lengthscales = Vector::Constant(2, 0.5);
  hp.mean_constant = 0.3;
  GpModel model({KernelFamily::kMatern52, 2}, hp, Dataset{Matrix(0, 2), Vector(0), {}});
  const Posterior p = model.posterior(Vector(Vector::Constant(2, 0.77)));
  CHECK(p.mean == 0.3);
  CHECK(p.variance == 1.0);
}

TEST_CASE("noiseless interpolation at a training point") {
  Hyperparameters hp;
  hp.lengthscales = Vector::Constant(1, 0.5);
  Dataset data;
  data.inputs = Matrix::Constant(1, 1, 0.4);
  data.targets = Vector::Constant(1, 1.7);
  GpModel model({KernelFamily::kRbf, 1}, hp, data);
  const Posterior p = model.posterior(Vector(Vector::Constant(1, 0.4)));
  CHECK(p.mean == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(p.variance == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("independent-data query correlating only with the incumbent") {
  // Three mutually distant points so K is numerically sigma_f^2 I; a query
  // close to the incumbent correlates only with it, so
  // mu = c + rho (y_max - c) and sigma^2 = sigma_f^2 (1 - rho^2).
  Hyperparameters hp;
  hp.lengthscales = Vector::Constant(1, 0.02);
  hp.signal_variance = 1.3;
  hp.mean_constant = 0.1;
  Dataset data;
  data.inputs = Matrix(3, 1);
  data.inputs << 0.1, 0.5, 0.9;
  data.targets = Vector(3);
  data.targets << 0.2, 1.0, -0.5;
  KernelSpec spec{KernelFamily::kRbf, 1};
  GpModel model(spec, hp, data);

  const Vector query = Vector::Constant(1, 0.515);
  const double rho =
      kernel_eval(spec, hp, query, Vector(Vector::Constant(1, 0.5))) / hp.signal_variance;
  const Posterior p = model.posterior(query);
  CHECK(p.mean == doctest::Approx(0.1 + rho * (1.0 - 0.1)).epsilon(1e-9));
  CHECK(p.variance == doctest::Approx(1.3 * (1.0 - rho * rho)).epsilon(1e-9));
}

TEST_CASE("posterior matches the dense-inverse oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    const int dim = 1 + static_cast<int>(rng.below(3));
    const int n = 2 + static_cast<int>(rng.below(7));
    const KernelFamily family =
        rng.below(2) == 0 ? KernelFamily::kRbf : KernelFamily::kMatern52;
    const KernelSpec spec{family, dim};
    const Hyperparameters hp = random_hp(dim, rng);
    const Dataset data = random_dataset(n, dim, rng);
    GpModel model(spec, hp, data);
    for (int q = 0; q < 4; ++q) {
      Vector query(dim);
      for (int i = 0; i < dim; ++i) query(i) = rng.uniform();
      const Posterior got = model.posterior(query);
      const Posterior want = dense_oracle(spec, hp, data, query);
      CHECK(got.mean == doctest::Approx(want.mean).epsilon(1e-8));
      CHECK(got.variance == doctest::Approx(want.variance).epsilon(1e-8));
    }
  }
}

TEST_CASE("batched posterior agrees with the single-point path") {
  Rng rng(5);
  const KernelSpec spec{KernelFamily::kMatern52, 2};
  const Hyperparameters hp = random_hp(2, rng);
  const Dataset data = random_dataset(6, 2, rng);
  GpModel model(spec, hp, data);
  Matrix queries(5, 2);
  for (Eigen::Index i = 0; i < queries.size(); ++i) queries(i) = rng.uniform();
  const auto batch = model.posterior(queries);
  for (int i = 0; i < 5; ++i) {
    const Posterior single = model.posterior(Vector(queries.row(i)));
    CHECK(batch[static_cast<std::size_t>(i)].mean == doctest::Approx(single.mean).epsilon(1e-12));
    CHECK(batch[static_cast<std::size_t>(i)].variance ==
          doctest::Approx(single.variance).epsilon(1e-12));
  }
}

TEST_CASE("posterior variance never exceeds the prior variance") {
  Rng rng(9);
  const KernelSpec spec{KernelFamily::kRbf, 2};
  const Hyperparameters hp = random_hp(2, rng);
  const Dataset data = random_dataset(10, 2, rng);
  GpModel model(spec, hp, data);
  for (int q = 0; q < 50; ++q) {
    Vector query(2);
    query << rng.uniform(), rng.uniform();
    CHECK(model.posterior(query).variance <= hp.signal_variance + 1e-8);
  }
}

TEST_CASE("queries outside the unit cube are accepted") {
  Rng rng(3);
  GpModel model({KernelFamily::kRbf, 2}, random_hp(2, rng), random_dataset(4, 2, rng));
  CHECK_NOTHROW(model.posterior(Vector(Vector::Constant(2, -0.4))));
  CHECK_NOTHROW(model.posterior(Vector(Vector::Constant(2, 1.9))));
}

TEST_CASE("log marginal likelihood closed-form cases") {
  // Single standardized observation, zero mean, unit prior, no noise.
  Hyperparameters hp;
  hp.lengthscales = Vector::Constant(1, 0.5);
  Dataset data;
  data.inputs = Matrix::Constant(1, 1, 0.5);
  data.targets = Vector::Zero(1);
  GpModel model({KernelFamily::kRbf, 1}, hp, data);
  CHECK(model.log_marginal_likelihood() ==
        doctest::Approx(-0.91893853320467274).epsilon(1e-14));

  // Zero residual: -1/2 log(2 pi (sigma_f^2 + sigma_eps^2)).
  Hyperparameters hp2 = hp;
  hp2.signal_variance = 0.7;
  hp2.noise_variance = 0.4;
  hp2.mean_constant = 2.5;
  Dataset data2 = data;
  data2.targets = Vector::Constant(1, 2.5);
  GpModel model2({KernelFamily::kRbf, 1}, hp2, data2);
  CHECK(model2.log_marginal_likelihood() ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI * 1.1)).epsilon(1e-14));
}

TEST_CASE("log marginal likelihood gradient matches central finite differences") {
  Rng rng(77);
  const int dim = 2;
  const KernelSpec spec{KernelFamily::kMatern52, dim};
  const Dataset data = random_dataset(5, dim, rng);
  const Hyperparameters hp = random_hp(dim, rng);

  LmlGradient grad;
  GpModel model(spec, hp, data);
  model.log_marginal_likelihood(grad);

  const double step = 1e-6;
  const auto lml_at = [&](const Hyperparameters& h) {
    return GpModel(spec, h, data).log_marginal_likelihood();
  };
  for (int i = 0; i < dim; ++i) {
    Hyperparameters hi = hp, lo = hp;
    hi.lengthscales(i) = std::exp(std::log(hp.lengthscales(i)) + step);
    lo.lengthscales(i) = std::exp(std::log(hp.lengthscales(i)) - step);
    const double fd = (lml_at(hi) - lml_at(lo)) / (2.0 * step);
    CHECK(grad.log_lengthscales(i) == doctest::Approx(fd).epsilon(1e-5));
  }
  {
    Hyperparameters hi = hp, lo = hp;
    hi.signal_variance = std::exp(std::log(hp.signal_variance) + step);
    lo.signal_variance = std::exp(std::log(hp.signal_variance) - step);
    const double fd = (lml_at(hi) - lml_at(lo)) / (2.0 * step);
    CHECK(grad.log_signal_variance == doctest::Approx(fd).epsilon(1e-5));
  }
  {
    Hyperparameters hi = hp, lo = hp;
    hi.noise_variance = std::exp(std::log(hp.noise_variance) + step);
    lo.noise_variance = std::exp(std::log(hp.noise_variance) - step);
    const double fd = (lml_at(hi) - lml_at(lo)) / (2.0 * step);
    CHECK(grad.log_noise_variance == doctest::Approx(fd).epsilon(1e-5));
  }
  {
    Hyperparameters hi = hp, lo = hp;
    hi.mean_constant += step;
    lo.mean_constant -= step;
    const double fd = (lml_at(hi) - lml_at(lo)) / (2.0 * step);
    CHECK(grad.mean_constant == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("posterior gradients match finite differences") {
  Rng rng(13);
  const KernelSpec spec{KernelFamily::kRbf, 2};
  const Hyperparameters hp = random_hp(2, rng);
  const Dataset data = random_dataset(7, 2, rng);
  GpModel model(spec, hp, data);
  Vector query(2);
  query << 0.33, 0.61;
  const PosteriorWithGradient p = model.posterior_with_gradient(query);
  CHECK(p.mean == doctest::Approx(model.posterior(query).mean).epsilon(1e-12));
  const double step = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Vector hi = query, lo = query;
    hi(i) += step;
    lo(i) -= step;
    const Posterior ph = model.posterior(hi);
    const Posterior pl = model.posterior(lo);
    CHECK(p.mean_gradient(i) ==
          doctest::Approx((ph.mean - pl.mean) / (2.0 * step)).epsilon(1e-5));
    CHECK(p.variance_gradient(i) ==
          doctest::Approx((ph.variance - pl.variance) / (2.0 * step)).epsilon(1e-5));
  }
}

TEST_CASE("jitter escalation restores factorability on duplicated points") {
  Hyperparameters hp;
  hp.lengthscales = Vector::Constant(1, 0.5);
  hp.noise_variance = 0.0;
  Dataset data;
  data.inputs = Matrix::Constant(2, 1, 0.5);  // exact duplicate, singular Gram
  data.targets = Vector::Zero(2);
  GpModel model({KernelFamily::kRbf, 1}, hp, data);
  CHECK(model.jitter() > 0.0);
  CHECK(model.jitter() <= 1e-4);
}

TEST_CASE("cholesky failure after the jitter ladder is a hard error") {
  // Scale so large that 1e-4 jitter is below the working precision.
  Matrix k = Matrix::Constant(2, 2, 1e14);
  CHECK_THROWS_AS(cholesky_with_jitter(k), NumericalError);
}
