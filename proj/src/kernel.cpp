#include "vanbo/kernel.hpp"

namespace vanbo {

std::string to_string(KernelFamily family) {
  return family == KernelFamily::kRbf ? "rbf" : "matern52";
}

void Hyperparameters::validate(int dimension) const {
  if (lengthscales.size() != dimension) {
    throw ContractViolation("Hyperparameters: lengthscale count does not match dimension");
  }
  if ((lengthscales.array() <= 0.0).any()) {
    throw ContractViolation("Hyperparameters: lengthscales must be positive");
  }
  if (!(signal_variance > 0.0)) {
    throw ContractViolation("Hyperparameters: signal variance must be positive");
  }
  if (!(noise_variance >= 0.0)) {
    throw ContractViolation("Hyperparameters: noise variance must be non-negative");
  }
  if (!std::isfinite(mean_constant)) {
    throw ContractViolation("Hyperparameters: mean constant must be finite");
  }
}

Matrix ard_distance_matrix(const Matrix& x_rows, const Matrix& y_rows,
                           const Vector& lengthscales) {
  if (x_rows.cols() != y_rows.cols() || x_rows.cols() != lengthscales.size()) {
    throw ContractViolation("ard_distance_matrix: dimension mismatch");
  }
  const Matrix xs = x_rows.array().rowwise() / lengthscales.transpose().array();
  const Matrix ys = y_rows.array().rowwise() / lengthscales.transpose().array();
  const Vector xsq = xs.rowwise().squaredNorm();
  const Vector ysq = ys.rowwise().squaredNorm();
  Matrix r2 = (-2.0 * xs * ys.transpose());
  r2.colwise() += xsq;
  r2.rowwise() += ysq.transpose();
  return r2.array().max(0.0).sqrt();
}

Matrix gram_matrix(const KernelSpec& spec, const Hyperparameters& hp, const Matrix& x_rows) {
  hp.validate(static_cast<int>(x_rows.cols()));
  Matrix k = ard_distance_matrix(x_rows, x_rows, hp.lengthscales);
  // Fill from the lower triangle so the result is exactly symmetric.
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    k(j, j) = hp.signal_variance;
    for (Eigen::Index i = j + 1; i < k.rows(); ++i) {
      k(i, j) = hp.signal_variance * detail::correlation(spec.family, k(i, j));
      k(j, i) = k(i, j);
    }
  }
  return k;
}

Matrix cross_covariance(const KernelSpec& spec, const Hyperparameters& hp, const Matrix& x_rows,
                        const Matrix& y_rows) {
  hp.validate(static_cast<int>(x_rows.cols()));
  Matrix k = ard_distance_matrix(x_rows, y_rows, hp.lengthscales);
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      k(i, j) = hp.signal_variance * detail::correlation(spec.family, k(i, j));
    }
  }
  return k;
}

}  // namespace vanbo
