#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "vanbo/types.hpp"

namespace vanbo {

// Sobol sequence in up to 21201 dimensions, 32 bits of resolution. The first
// 128 non-trivial dimensions use tabulated direction numbers with good 2D
// projections; beyond that, direction numbers are generated deterministically
// from primitive polynomials enumerated on demand. Randomization is a
// per-dimension digital shift derived from the seed, which preserves the
// per-coordinate dyadic balance of the base sequence.
class SobolStream {
 public:
  /// Unrandomized base sequence (first point is the origin).
  explicit SobolStream(int dimension);
  /// Digitally shifted sequence; distinct seeds give distinct sequences.
  SobolStream(int dimension, std::uint64_t seed);

  int dimension() const { return dimension_; }
  std::uint64_t index() const { return index_; }

  /// Next point in [0, 1)^D.
  Vector next();
  void next(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out);

  /// Jumps to an absolute index (0-based); next() then returns point #index.
  void seek(std::uint64_t index);

  /// Independent consumer of the same sequence starting at `offset`.
  SobolStream clone_at(std::uint64_t offset) const;

 private:
  int dimension_;
  std::uint64_t index_ = 0;
  std::vector<std::uint32_t> state_;                   // Gray-code XOR state
  std::vector<std::uint32_t> shift_;                   // digital shift words
  std::shared_ptr<const std::vector<std::uint32_t>> direction_;  // dim-major, 32 words each
};

/// n x D matrix of digitally shifted Sobol points.
Matrix sobol(int n, int dimension, std::uint64_t seed);

/// Initial design size: ceil(3 sqrt(D)).
int doe_size(int dimension);

/// n points sampled coordinate-wise from N(center_i, scale_i^2), clipped to
/// the unit cube. Deterministic given the seed.
Matrix gaussian_around(const Vector& center, const Vector& scale, int n, std::uint64_t seed);

namespace detail {
/// Primitive polynomials over GF(2) in the enumeration order used for
/// direction-number assignment: ascending degree, then ascending coefficient
/// code. Exposed for tests.
struct PrimitivePolynomial {
  int degree;
  std::uint32_t code;  // inner coefficients, x^(degree-1) ... x^1
};
std::vector<PrimitivePolynomial> primitive_polynomials(int count);
}  // namespace detail

}  // namespace vanbo
