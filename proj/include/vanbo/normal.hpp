#pragma once

#include <cmath>

namespace vanbo {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kHalfLogTwoPi = 0.918938533204672741780329736406;
inline constexpr double kInvSqrt2 = 0.707106781186547524400844362105;

inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

/// Scaled complementary error function exp(x^2) erfc(x) for x >= 0. The
/// product form stays in range for x up to ~26 (erfc underflow), well past
/// the switch point of every caller here.
inline double erfcx_positive(double x) { return std::exp(x * x) * std::erfc(x); }

namespace detail {

// log of h(z) = z Phi(z) + phi(z), the unit-variance expected improvement at
// z-score z. Three regimes:
//   z > -1           : direct evaluation, no cancellation worth chasing;
//   -15 < z <= -1    : factor out exp(-z^2/2) and evaluate the bracket
//                      1/sqrt(2 pi) + (z/2) erfcx(-z/sqrt 2);
//   z <= -15         : asymptotic series
//                      log h = -z^2/2 - log sqrt(2 pi) - 2 log|z| + log1p(...).
inline double log_h(double z) {
  if (z > -1.0) {
    return std::log(z * normal_cdf(z) + normal_pdf(z));
  }
  if (z > -15.0) {
    const double bracket = kInvSqrt2Pi + 0.5 * z * erfcx_positive(-z * kInvSqrt2);
    return -0.5 * z * z + std::log(bracket);
  }
  const double u = 1.0 / (z * z);
  const double series =
      u * (-3.0 + u * (15.0 + u * (-105.0 + u * (945.0 + u * (-10395.0 + u * 135135.0)))));
  return -0.5 * z * z - kHalfLogTwoPi - 2.0 * std::log(-z) + std::log1p(series);
}

// Phi(z) / h(z): the logarithmic derivative of h, since h'(z) = Phi(z).
inline double cdf_over_h(double z) {
  if (z > -1.0) {
    return normal_cdf(z) / (z * normal_cdf(z) + normal_pdf(z));
  }
  if (z > -15.0) {
    const double scaled_cdf = 0.5 * erfcx_positive(-z * kInvSqrt2);
    return scaled_cdf / (kInvSqrt2Pi + z * scaled_cdf);
  }
  const double u = 1.0 / (z * z);
  return -z * (1.0 + u * (2.0 + u * (-6.0 + u * (42.0 - u * 414.0))));
}

}  // namespace detail

}  // namespace vanbo
