#include "vanbo/gp.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>

namespace vanbo {

namespace {
constexpr double kLogTwoPi = 1.83787706640934548356065947281;
}

Matrix cholesky_with_jitter(const Matrix& symmetric, double* jitter_used) {
  const Eigen::Index n = symmetric.rows();
  double jitter = 0.0;
  while (true) {
    Matrix attempt = symmetric;
    if (jitter > 0.0) attempt.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(attempt);
    if (llt.info() == Eigen::Success) {
      if (jitter_used != nullptr) *jitter_used = jitter;
      return llt.matrixL();
    }
    if (jitter == 0.0) {
      jitter = 1e-8;
    } else if (jitter < 1e-4) {
      jitter *= 10.0;
    } else {
      std::ostringstream msg;
      msg << "cholesky_with_jitter: factorization failed after jitter 1e-4"
          << " (n=" << n << ", min diag=" << symmetric.diagonal().minCoeff()
          << ", max diag=" << symmetric.diagonal().maxCoeff() << ")";
      throw NumericalError(msg.str());
    }
  }
}

GpModel::GpModel(KernelSpec spec, Hyperparameters hp, Dataset data)
    : spec_(std::move(spec)), hp_(std::move(hp)), data_(std::move(data)) {
  hp_.validate(spec_.dimension);
  if (data_.inputs.rows() != data_.targets.size()) {
    throw ContractViolation("GpModel: input row count does not match target count");
  }
  if (data_.size() > 0 && data_.dimension() != spec_.dimension) {
    throw ContractViolation("GpModel: data dimension does not match kernel dimension");
  }
  const Eigen::Index n = data_.size();
  if (n == 0) return;
  Matrix k = gram_matrix(spec_, hp_, data_.inputs);
  k.diagonal().array() += hp_.noise_variance;
  chol_ = cholesky_with_jitter(k, &jitter_);
  const Vector residual = data_.targets.array() - hp_.mean_constant;
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(residual);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

Vector GpModel::solve(const Vector& rhs) const {
  Vector z = chol_.triangularView<Eigen::Lower>().solve(rhs);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(z);
  return z;
}

Posterior GpModel::posterior(const Vector& query) const {
  if (query.size() != spec_.dimension) {
    throw ContractViolation("posterior: query dimension mismatch");
  }
  if (data_.size() == 0) {
    return {hp_.mean_constant, hp_.signal_variance};
  }
  Vector k_star(data_.size());
  for (Eigen::Index j = 0; j < data_.size(); ++j) {
    k_star(j) = kernel_eval(spec_, hp_, query, Vector(data_.inputs.row(j)));
  }
  const Vector half = chol_.triangularView<Eigen::Lower>().solve(k_star);
  Posterior out;
  out.mean = hp_.mean_constant + k_star.dot(alpha_);
  out.variance = std::max(0.0, hp_.signal_variance - half.squaredNorm());
  return out;
}

std::vector<Posterior> GpModel::posterior(const Matrix& query_rows) const {
  const Eigen::Index m = query_rows.rows();
  std::vector<Posterior> out(static_cast<std::size_t>(m));
  if (data_.size() == 0) {
    for (auto& p : out) p = {hp_.mean_constant, hp_.signal_variance};
    return out;
  }
  const Matrix k_star = cross_covariance(spec_, hp_, data_.inputs, query_rows);  // n x m
  const Matrix half = chol_.triangularView<Eigen::Lower>().solve(k_star);
  const Vector means = (k_star.transpose() * alpha_).array() + hp_.mean_constant;
  const Vector reductions = half.colwise().squaredNorm();
  for (Eigen::Index i = 0; i < m; ++i) {
    out[static_cast<std::size_t>(i)] = {means(i),
                                        std::max(0.0, hp_.signal_variance - reductions(i))};
  }
  return out;
}

PosteriorWithGradient GpModel::posterior_with_gradient(const Vector& query) const {
  const int dim = spec_.dimension;
  if (query.size() != dim) {
    throw ContractViolation("posterior_with_gradient: query dimension mismatch");
  }
  PosteriorWithGradient out;
  out.mean_gradient = Vector::Zero(dim);
  out.variance_gradient = Vector::Zero(dim);
  if (data_.size() == 0) {
    out.mean = hp_.mean_constant;
    out.variance = hp_.signal_variance;
    return out;
  }
  const Eigen::Index n = data_.size();
  Vector k_star(n);
  Vector slope(n);  // sigma_f^2 * rho'(r_j) / r_j
  for (Eigen::Index j = 0; j < n; ++j) {
    const double r = ard_distance(query, Vector(data_.inputs.row(j)), hp_.lengthscales);
    k_star(j) = hp_.signal_variance * detail::correlation(spec_.family, r);
    slope(j) = hp_.signal_variance * detail::correlation_slope_over_r(spec_.family, r);
  }
  const Vector v = solve(k_star);
  out.mean = hp_.mean_constant + k_star.dot(alpha_);
  out.variance = std::max(0.0, hp_.signal_variance - k_star.dot(v));
  // dk_j/dx_i = slope_j * (x_i - X_ji) / ell_i^2
  const Vector inv_ell2 = hp_.lengthscales.array().square().inverse();
  for (int i = 0; i < dim; ++i) {
    const Vector diff = (query(i) - data_.inputs.col(i).array()).matrix();
    const Vector dk = (slope.array() * diff.array()).matrix() * inv_ell2(i);
    out.mean_gradient(i) = dk.dot(alpha_);
    out.variance_gradient(i) = -2.0 * dk.dot(v);
  }
  return out;
}

double GpModel::log_marginal_likelihood() const {
  const Eigen::Index n = data_.size();
  if (n == 0) return 0.0;
  const Vector residual = data_.targets.array() - hp_.mean_constant;
  return -0.5 * residual.dot(alpha_) - chol_.diagonal().array().log().sum() -
         0.5 * static_cast<double>(n) * kLogTwoPi;
}

double GpModel::log_marginal_likelihood(LmlGradient& gradient) const {
  const Eigen::Index n = data_.size();
  const int dim = spec_.dimension;
  gradient.log_lengthscales = Vector::Zero(dim);
  gradient.log_signal_variance = 0.0;
  gradient.log_noise_variance = 0.0;
  gradient.mean_constant = 0.0;
  if (n == 0) return 0.0;

  const double value = log_marginal_likelihood();

  // W = K_y^-1 - alpha alpha^T; dLML/dtheta = -1/2 tr(W dK_y/dtheta).
  Matrix w = solve_identity();
  w.noalias() -= alpha_ * alpha_.transpose();

  const Matrix r = ard_distance_matrix(data_.inputs, data_.inputs, hp_.lengthscales);
  Matrix kernel_only(n, n);
  Matrix slope(n, n);  // sigma_f^2 rho'(r)/r
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      kernel_only(i, j) = hp_.signal_variance * detail::correlation(spec_.family, r(i, j));
      slope(i, j) =
          hp_.signal_variance * detail::correlation_slope_over_r(spec_.family, r(i, j));
    }
  }

  // d/d log ell_i: dK/dlog ell_i = -slope .* (X_i - X_i')^2 / ell_i^2.
  const Matrix m = w.cwiseProduct(slope);
  const Vector m_row_sums = m.rowwise().sum();
  for (int i = 0; i < dim; ++i) {
    const Vector u = data_.inputs.col(i);
    const double quad = u.cwiseProduct(u).dot(m_row_sums) - u.dot(m * u);
    gradient.log_lengthscales(i) = quad / (hp_.lengthscales(i) * hp_.lengthscales(i));
  }
  gradient.log_signal_variance = -0.5 * w.cwiseProduct(kernel_only).sum();
  gradient.log_noise_variance = -0.5 * hp_.noise_variance * w.trace();
  gradient.mean_constant = alpha_.sum();
  return value;
}

Matrix GpModel::solve_identity() const {
  const Eigen::Index n = data_.size();
  Matrix inv = Matrix::Identity(n, n);
  chol_.triangularView<Eigen::Lower>().solveInPlace(inv);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(inv);
  return inv;
}

}  // namespace vanbo
