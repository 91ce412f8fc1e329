#include "vanbo/sobol.hpp"

#include <bit>
#include <cmath>
#include <mutex>

#include "vanbo/rng.hpp"

namespace vanbo {

namespace {

constexpr int kBits = 32;
constexpr int kMaxSupportedDimension = 21201;

// Direction numbers for the first 129 dimensions (dimension 1 is the plain
// binary van der Corput sequence and needs no table entry). Row k of the
// table drives sequence dimension k + 2: primitive polynomial degree, the
// inner-coefficient code of the polynomial (x^(s-1)..x^1), and the free
// initial direction numbers m_1..m_s. These carry the good low-dimensional
// 2D projections; higher dimensions fall back to generated initial numbers.
static constexpr int kTableRows = 128;
static constexpr std::uint8_t kTableDegree[kTableRows] = {
    1, 2, 3, 3, 4, 4, 5, 5, 5, 5, 5, 5, 6, 6, 6, 6, 6, 6, 7, 7, 7, 7, 7, 7,
    7, 7, 7, 7, 7, 7, 7, 7, 7, 7, 7, 7, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8, 8,
    8, 8, 8, 8, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9,
    9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9,
    9, 9, 9, 9, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10, 10,
    10, 10, 10, 10, 10, 10, 10, 10,
};
static constexpr std::uint32_t kTablePoly[kTableRows] = {
    0, 1, 1, 2, 1, 4, 2, 4, 7, 11, 13, 14, 1, 13, 16, 19, 22, 25, 1, 4,
    7, 8, 14, 19, 21, 28, 31, 32, 37, 41, 42, 50, 55, 56, 59, 62, 14, 21, 22, 38,
    47, 49, 50, 52, 56, 67, 70, 84, 97, 103, 115, 122, 8, 13, 16, 22, 25, 44, 47, 52,
    55, 59, 62, 67, 74, 81, 82, 87, 91, 94, 103, 104, 109, 122, 124, 137, 138, 143, 145, 152,
    157, 167, 173, 176, 181, 182, 185, 191, 194, 199, 218, 220, 227, 229, 230, 234, 236, 241, 244, 253,
    4, 13, 19, 22, 50, 55, 64, 69, 98, 107, 115, 121, 127, 134, 140, 145, 152, 158, 161, 171,
    181, 194, 199, 203, 208, 227, 242, 251,
};
static constexpr std::uint16_t kTableInitOffset[kTableRows + 1] = {
    0, 1, 3, 6, 9, 13, 17, 22, 27, 32, 37, 42, 47, 53, 59, 65, 71, 77, 83, 90,
    97, 104, 111, 118, 125, 132, 139, 146, 153, 160, 167, 174, 181, 188, 195, 202, 209, 217, 225, 233,
    241, 249, 257, 265, 273, 281, 289, 297, 305, 313, 321, 329, 337, 346, 355, 364, 373, 382, 391, 400,
    409, 418, 427, 436, 445, 454, 463, 472, 481, 490, 499, 508, 517, 526, 535, 544, 553, 562, 571, 580,
    589, 598, 607, 616, 625, 634, 643, 652, 661, 670, 679, 688, 697, 706, 715, 724, 733, 742, 751, 760,
    769, 779, 789, 799, 809, 819, 829, 839, 849, 859, 869, 879, 889, 899, 909, 919, 929, 939, 949, 959,
    969, 979, 989, 999, 1009, 1019, 1029, 1039, 1049,
};
static constexpr std::uint16_t kTableInit[1049] = {
    1, 1, 3, 1, 3, 1, 1, 1, 1, 1, 1, 3, 3, 1, 3, 5, 13, 1, 1, 5,
    5, 17, 1, 1, 5, 5, 5, 1, 1, 7, 11, 19, 1, 1, 5, 1, 1, 1, 1, 1,
    3, 11, 1, 3, 5, 5, 31, 1, 3, 3, 9, 7, 49, 1, 1, 1, 15, 21, 21, 1,
    3, 1, 13, 27, 49, 1, 1, 1, 15, 7, 5, 1, 3, 1, 15, 13, 25, 1, 1, 5,
    5, 19, 61, 1, 3, 7, 11, 23, 15, 103, 1, 3, 7, 13, 13, 15, 69, 1, 1, 3,
    13, 7, 35, 63, 1, 3, 5, 9, 1, 25, 53, 1, 3, 1, 13, 9, 35, 107, 1, 3,
    1, 5, 27, 61, 31, 1, 1, 5, 11, 19, 41, 61, 1, 3, 5, 3, 3, 13, 69, 1,
    1, 7, 13, 1, 19, 1, 1, 3, 7, 5, 13, 19, 59, 1, 1, 3, 9, 25, 29, 41,
    1, 3, 5, 13, 23, 1, 55, 1, 3, 7, 3, 13, 59, 17, 1, 3, 1, 3, 5, 53,
    69, 1, 1, 5, 5, 23, 33, 13, 1, 1, 7, 7, 1, 61, 123, 1, 1, 7, 9, 13,
    61, 49, 1, 3, 3, 5, 3, 55, 33, 1, 3, 1, 15, 31, 13, 49, 245, 1, 3, 5,
    15, 31, 59, 63, 97, 1, 3, 1, 11, 11, 11, 77, 249, 1, 3, 1, 11, 27, 43, 71,
    9, 1, 1, 7, 15, 21, 11, 81, 45, 1, 3, 7, 3, 25, 31, 65, 79, 1, 3, 1,
    1, 19, 11, 3, 205, 1, 1, 5, 9, 19, 21, 29, 157, 1, 3, 7, 11, 1, 33, 89,
    185, 1, 3, 3, 3, 15, 9, 79, 71, 1, 3, 7, 11, 15, 39, 119, 27, 1, 1, 3,
    1, 11, 31, 97, 225, 1, 1, 1, 3, 23, 43, 57, 177, 1, 3, 7, 7, 17, 17, 37,
    71, 1, 3, 1, 5, 27, 63, 123, 213, 1, 1, 3, 5, 11, 43, 53, 133, 1, 3, 5,
    5, 29, 17, 47, 173, 479, 1, 3, 3, 11, 3, 1, 109, 9, 69, 1, 1, 1, 5, 17,
    39, 23, 5, 343, 1, 3, 1, 5, 25, 15, 31, 103, 499, 1, 1, 1, 11, 11, 17, 63,
    105, 183, 1, 1, 5, 11, 9, 29, 97, 231, 363, 1, 1, 5, 15, 19, 45, 41, 7, 383,
    1, 3, 7, 7, 31, 19, 83, 137, 221, 1, 1, 1, 3, 23, 15, 111, 223, 83, 1, 1,
    5, 13, 31, 15, 55, 25, 161, 1, 1, 3, 13, 25, 47, 39, 87, 257, 1, 1, 1, 11,
    21, 53, 125, 249, 293, 1, 1, 7, 11, 11, 7, 57, 79, 323, 1, 1, 5, 5, 17, 13,
    81, 3, 131, 1, 1, 7, 13, 23, 7, 65, 251, 475, 1, 3, 5, 1, 9, 43, 3, 149,
    11, 1, 1, 3, 13, 31, 13, 13, 255, 487, 1, 3, 3, 1, 5, 63, 89, 91, 127, 1,
    1, 3, 3, 1, 19, 123, 127, 237, 1, 1, 5, 7, 23, 31, 37, 243, 289, 1, 1, 5,
    11, 17, 53, 117, 183, 491, 1, 1, 1, 5, 1, 13, 13, 209, 345, 1, 1, 3, 15, 1,
    57, 115, 7, 33, 1, 3, 1, 11, 7, 43, 81, 207, 175, 1, 3, 1, 1, 15, 27, 63,
    255, 49, 1, 3, 5, 3, 27, 61, 105, 171, 305, 1, 1, 5, 3, 1, 3, 57, 249, 149,
    1, 1, 3, 5, 5, 57, 15, 13, 159, 1, 1, 1, 11, 7, 11, 105, 141, 225, 1, 3,
    3, 5, 27, 59, 121, 101, 271, 1, 3, 5, 9, 11, 49, 51, 59, 115, 1, 1, 7, 1,
    23, 45, 125, 71, 419, 1, 1, 3, 5, 23, 5, 105, 109, 75, 1, 1, 7, 15, 7, 11,
    67, 121, 453, 1, 3, 7, 3, 9, 13, 31, 27, 449, 1, 3, 1, 15, 19, 39, 39, 89,
    15, 1, 1, 1, 1, 1, 33, 73, 145, 379, 1, 3, 1, 15, 15, 43, 29, 13, 483, 1,
    1, 7, 3, 19, 27, 85, 131, 431, 1, 3, 3, 3, 5, 35, 23, 195, 349, 1, 3, 3,
    7, 9, 27, 39, 59, 297, 1, 1, 3, 9, 11, 17, 13, 241, 157, 1, 3, 7, 15, 25,
    57, 33, 189, 213, 1, 1, 7, 1, 9, 55, 73, 83, 217, 1, 3, 3, 13, 19, 27, 23,
    113, 249, 1, 3, 5, 3, 23, 43, 3, 253, 479, 1, 1, 5, 5, 11, 5, 45, 117, 217,
    1, 3, 3, 7, 29, 37, 33, 123, 147, 1, 3, 1, 15, 5, 5, 37, 227, 223, 459, 1,
    1, 7, 5, 5, 39, 63, 255, 135, 487, 1, 3, 1, 7, 9, 7, 87, 249, 217, 599, 1,
    1, 3, 13, 9, 47, 7, 225, 363, 247, 1, 3, 7, 13, 19, 13, 9, 67, 9, 737, 1,
    3, 5, 5, 19, 59, 7, 41, 319, 677, 1, 1, 5, 3, 31, 63, 15, 43, 207, 789, 1,
    1, 7, 9, 13, 39, 3, 47, 497, 169, 1, 3, 1, 7, 21, 17, 97, 19, 415, 905, 1,
    3, 7, 1, 3, 31, 71, 111, 165, 127, 1, 1, 5, 11, 1, 61, 83, 119, 203, 847, 1,
    3, 3, 13, 9, 61, 19, 97, 47, 35, 1, 1, 7, 7, 15, 29, 63, 95, 417, 469, 1,
    3, 1, 9, 25, 9, 71, 57, 213, 385, 1, 3, 5, 13, 31, 47, 101, 57, 39, 341, 1,
    1, 3, 3, 31, 57, 125, 173, 365, 551, 1, 3, 7, 1, 13, 57, 67, 157, 451, 707, 1,
    1, 1, 7, 21, 13, 105, 89, 429, 965, 1, 1, 5, 9, 17, 51, 45, 119, 157, 141, 1,
    3, 7, 7, 13, 45, 91, 9, 129, 741, 1, 3, 7, 1, 23, 57, 67, 141, 151, 571, 1,
    1, 3, 11, 17, 47, 93, 107, 375, 157, 1, 3, 3, 5, 11, 21, 43, 51, 169, 915, 1,
    1, 5, 3, 15, 55, 101, 67, 455, 625, 1, 3, 5, 9, 1, 23, 29, 47, 345, 595, 1,
    3, 7, 7, 5, 49, 29, 155, 323, 589, 1, 3, 3, 7, 5, 41, 127, 61, 261, 717, 1,
    3, 7, 7, 17, 23, 117, 67, 129, 1009,
};

// --- primitive polynomial enumeration over GF(2) -------------------------

// Carry-less product of two GF(2) polynomials (bit-packed).
std::uint64_t gf2_multiply(std::uint64_t a, std::uint64_t b) {
  std::uint64_t acc = 0;
  while (b != 0) {
    if (b & 1ULL) acc ^= a;
    a <<= 1;
    b >>= 1;
  }
  return acc;
}

std::uint64_t gf2_mod(std::uint64_t value, std::uint64_t modulus) {
  const int md = 63 - std::countl_zero(modulus);
  while (true) {
    const int vd = value == 0 ? -1 : 63 - std::countl_zero(value);
    if (vd < md) return value;
    value ^= modulus << (vd - md);
  }
}

std::uint64_t gf2_mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t modulus) {
  return gf2_mod(gf2_multiply(a, b), modulus);
}

std::uint64_t gf2_powmod(std::uint64_t base, std::uint64_t exponent, std::uint64_t modulus) {
  std::uint64_t result = 1;
  base = gf2_mod(base, modulus);
  while (exponent != 0) {
    if (exponent & 1ULL) result = gf2_mulmod(result, base, modulus);
    base = gf2_mulmod(base, base, modulus);
    exponent >>= 1;
  }
  return result;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

// p(x) of degree m is primitive iff x generates the full multiplicative
// group of GF(2)[x]/p, i.e. ord(x) = 2^m - 1.
bool is_primitive(std::uint64_t poly, int degree) {
  const std::uint64_t group_order = (1ULL << degree) - 1;
  if (gf2_powmod(2, group_order, poly) != 1) return false;
  for (const std::uint64_t q : prime_factors(group_order)) {
    if (gf2_powmod(2, group_order / q, poly) == 1) return false;
  }
  return true;
}

}  // namespace

namespace detail {

std::vector<PrimitivePolynomial> primitive_polynomials(int count) {
  static std::mutex mutex;
  static std::vector<PrimitivePolynomial> cache;
  std::lock_guard<std::mutex> lock(mutex);
  int degree = cache.empty() ? 1 : cache.back().degree;
  std::uint32_t code = cache.empty() ? 0 : cache.back().code + 1;
  while (static_cast<int>(cache.size()) < count) {
    if (degree > 18) {
      throw ContractViolation("sobol: dimension exceeds the direction-number table");
    }
    const std::uint32_t code_limit = 1u << (degree - 1);
    for (; code < code_limit && static_cast<int>(cache.size()) < count; ++code) {
      const std::uint64_t poly =
          (1ULL << degree) | (static_cast<std::uint64_t>(code) << 1) | 1ULL;
      if (is_primitive(poly, degree)) cache.push_back({degree, code});
    }
    if (code >= code_limit) {
      ++degree;
      code = 0;
    }
  }
  return std::vector<PrimitivePolynomial>(cache.begin(), cache.begin() + count);
}

}  // namespace detail

namespace {

// Free initial direction numbers m_1..m_degree for dimensions past the
// table: odd, m_k < 2^k, drawn from a fixed per-dimension stream.
void generated_initializers(int dim_index, int degree, std::uint32_t* m) {
  Rng rng(derive_seed(0x536F626F6C6469ULL, static_cast<std::uint64_t>(dim_index)));
  for (int k = 1; k <= degree; ++k) {
    m[k - 1] = static_cast<std::uint32_t>(rng.next_u64() % (1u << (k - 1))) * 2u + 1u;
  }
}

// Direction integers for one dimension, most significant bit first
// (32 words, bit 31 = first binary digit).
void fill_direction_integers(int dim_index,
                             const std::vector<detail::PrimitivePolynomial>& polynomials,
                             std::uint32_t* v) {
  if (dim_index == 0) {
    for (int j = 0; j < kBits; ++j) v[j] = 1u << (kBits - 1 - j);
    return;
  }
  int degree;
  std::uint32_t poly_code;
  std::uint32_t m[kBits];
  if (dim_index - 1 < kTableRows) {
    degree = kTableDegree[dim_index - 1];
    poly_code = kTablePoly[dim_index - 1];
    for (int k = 0; k < degree; ++k) m[k] = kTableInit[kTableInitOffset[dim_index - 1] + k];
  } else {
    degree = polynomials[static_cast<std::size_t>(dim_index - 1)].degree;
    poly_code = polynomials[static_cast<std::size_t>(dim_index - 1)].code;
    generated_initializers(dim_index, degree, m);
  }
  for (int j = 0; j < degree && j < kBits; ++j) v[j] = m[j] << (kBits - 1 - j);
  // Recurrence for the remaining bits (Jaeckel eq. 8.19 form): the leading and
  // trailing polynomial coefficients are implicit in (degree, code).
  for (int l = degree; l < kBits; ++l) {
    std::uint32_t n = v[l - degree] >> degree;
    for (int j = 1; j < degree; ++j) {
      if ((poly_code >> (degree - j - 1)) & 1u) n ^= v[l - j];
    }
    n ^= v[l - degree];
    v[l] = n;
  }
}

std::shared_ptr<const std::vector<std::uint32_t>> direction_table(int dimension) {
  auto table = std::make_shared<std::vector<std::uint32_t>>(
      static_cast<std::size_t>(dimension) * kBits);
  std::vector<detail::PrimitivePolynomial> polynomials;
  if (dimension > kTableRows + 1) {
    polynomials = detail::primitive_polynomials(dimension - 1);
  }
  for (int d = 0; d < dimension; ++d) {
    fill_direction_integers(d, polynomials, table->data() + static_cast<std::size_t>(d) * kBits);
  }
  return table;
}

constexpr double kPointScale = 0x1.0p-32;

}  // namespace

SobolStream::SobolStream(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw ContractViolation("SobolStream: dimension must be >= 1");
  if (dimension > kMaxSupportedDimension) {
    throw ContractViolation("SobolStream: dimension exceeds the direction-number table");
  }
  direction_ = direction_table(dimension);
  state_.assign(static_cast<std::size_t>(dimension), 0);
  shift_.assign(static_cast<std::size_t>(dimension), 0);
}

SobolStream::SobolStream(int dimension, std::uint64_t seed) : SobolStream(dimension) {
  Rng rng(derive_seed(seed, 0x736F626FULL));
  for (auto& word : shift_) word = static_cast<std::uint32_t>(rng.next_u64() >> 32);
}

void SobolStream::next(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) {
  if (out.size() != dimension_) throw ContractViolation("SobolStream::next: size mismatch");
  if (index_ > 0) {
    const std::uint64_t change = std::countr_zero(index_);
    const std::uint32_t* v = direction_->data() + change;
    for (int d = 0; d < dimension_; ++d) {
      state_[static_cast<std::size_t>(d)] ^= v[static_cast<std::size_t>(d) * kBits];
    }
  }
  ++index_;
  for (int d = 0; d < dimension_; ++d) {
    out(d) = (state_[static_cast<std::size_t>(d)] ^ shift_[static_cast<std::size_t>(d)]) *
             kPointScale;
  }
}

Vector SobolStream::next() {
  Eigen::RowVectorXd row(dimension_);
  next(row);
  return row.transpose();
}

void SobolStream::seek(std::uint64_t index) {
  std::fill(state_.begin(), state_.end(), 0u);
  index_ = index;
  if (index == 0) return;
  // next() expects state_ to hold point #(index - 1): Gray-code XOR of the
  // direction words selected by gray(index - 1).
  std::uint64_t gray = (index - 1) ^ ((index - 1) >> 1);
  int bit = 0;
  while (gray != 0) {
    if (gray & 1ULL) {
      const std::uint32_t* v = direction_->data() + bit;
      for (int d = 0; d < dimension_; ++d) {
        state_[static_cast<std::size_t>(d)] ^= v[static_cast<std::size_t>(d) * kBits];
      }
    }
    gray >>= 1;
    ++bit;
  }
}

SobolStream SobolStream::clone_at(std::uint64_t offset) const {
  SobolStream out = *this;
  out.seek(offset);
  return out;
}

Matrix sobol(int n, int dimension, std::uint64_t seed) {
  if (n < 1) throw ContractViolation("sobol: n must be >= 1");
  SobolStream stream(dimension, seed);
  Matrix points(n, dimension);
  for (int i = 0; i < n; ++i) stream.next(points.row(i));
  return points;
}

int doe_size(int dimension) {
  if (dimension < 1) throw ContractViolation("doe_size: dimension must be >= 1");
  return static_cast<int>(std::ceil(3.0 * std::sqrt(static_cast<double>(dimension))));
}

Matrix gaussian_around(const Vector& center, const Vector& scale, int n, std::uint64_t seed) {
  if ((center.array() < 0.0).any() || (center.array() > 1.0).any()) {
    throw ContractViolation("gaussian_around: center outside the unit cube");
  }
  if (center.size() != scale.size()) {
    throw ContractViolation("gaussian_around: scale length mismatch");
  }
  Rng rng(derive_seed(seed, 0x67617573ULL));
  const Eigen::Index dim = center.size();
  Matrix points(n, dim);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      points(i, d) = std::min(1.0, std::max(0.0, center(d) + scale(d) * rng.normal()));
    }
  }
  return points;
}

}  // namespace vanbo
