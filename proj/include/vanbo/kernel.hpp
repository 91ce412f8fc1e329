#pragma once

#include <cmath>
#include <string>

#include "vanbo/types.hpp"

namespace vanbo {

enum class KernelFamily { kRbf, kMatern52 };

std::string to_string(KernelFamily family);

/// Stationary ARD kernel: family plus input dimension. The family is fixed
/// for the lifetime of any model built from the spec.
struct KernelSpec {
  KernelFamily family = KernelFamily::kMatern52;
  int dimension = 1;
};

struct Hyperparameters {
  Vector lengthscales;          // one per dimension, all > 0
  double signal_variance = 1.0; // sigma_f^2 > 0
  double noise_variance = 0.0;  // sigma_eps^2 >= 0
  double mean_constant = 0.0;

  void validate(int dimension) const;
};

/// ARD distance r with r^2 = sum_i (x_i - x'_i)^2 / ell_i^2.
template <typename DerivedA, typename DerivedB, typename DerivedL>
double ard_distance(const Eigen::MatrixBase<DerivedA>& x,
                    const Eigen::MatrixBase<DerivedB>& x_other,
                    const Eigen::MatrixBase<DerivedL>& lengthscales) {
  if (x.size() != x_other.size() || x.size() != lengthscales.size()) {
    throw ContractViolation("ard_distance: dimension mismatch");
  }
  const double r2 =
      ((x.derived().array() - x_other.derived().array()) / lengthscales.derived().array())
          .square()
          .sum();
  return std::sqrt(r2);
}

namespace detail {

constexpr double kSqrt5 = 2.23606797749978969640917366873;

inline double correlation(KernelFamily family, double r) {
  switch (family) {
    case KernelFamily::kRbf:
      return std::exp(-0.5 * r * r);
    case KernelFamily::kMatern52: {
      const double sr = kSqrt5 * r;
      return (1.0 + sr + sr * sr / 3.0) * std::exp(-sr);
    }
  }
  return 0.0;
}

// rho'(r) / r, finite at r = 0. Used by lengthscale and query-point gradients.
inline double correlation_slope_over_r(KernelFamily family, double r) {
  switch (family) {
    case KernelFamily::kRbf:
      return -std::exp(-0.5 * r * r);
    case KernelFamily::kMatern52:
      return -(5.0 / 3.0) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
  }
  return 0.0;
}

}  // namespace detail

/// Covariance k(x, x') = sigma_f^2 * rho(r(x, x')).
template <typename DerivedA, typename DerivedB>
double kernel_eval(const KernelSpec& spec, const Hyperparameters& hp,
                   const Eigen::MatrixBase<DerivedA>& x,
                   const Eigen::MatrixBase<DerivedB>& x_other) {
  const double r = ard_distance(x, x_other, hp.lengthscales);
  return hp.signal_variance * detail::correlation(spec.family, r);
}

/// Matrix of pairwise ARD distances between the rows of X and rows of Y.
Matrix ard_distance_matrix(const Matrix& x_rows, const Matrix& y_rows, const Vector& lengthscales);

/// Noise-free Gram matrix of the rows of X (symmetric, zero distance on the diagonal).
Matrix gram_matrix(const KernelSpec& spec, const Hyperparameters& hp, const Matrix& x_rows);

/// Cross-covariance between rows of X and rows of Y.
Matrix cross_covariance(const KernelSpec& spec, const Hyperparameters& hp, const Matrix& x_rows,
                        const Matrix& y_rows);

}  // namespace vanbo
