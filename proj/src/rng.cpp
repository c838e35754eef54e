#include "rng.hpp"

#include <cmath>

#include "common.hpp"
#include "constants.hpp"

namespace rb {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
inline std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::uint64_t key, std::uint64_t counter_hi,
                                        std::uint64_t counter_lo) {
  std::uint32_t c0 = lo32(counter_lo);
  std::uint32_t c1 = hi32(counter_lo);
  std::uint32_t c2 = lo32(counter_hi);
  std::uint32_t c3 = hi32(counter_hi);
  std::uint32_t k0 = lo32(key);
  std::uint32_t k1 = hi32(key);
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c2;
    const std::uint32_t n0 = hi32(p1) ^ c1 ^ k0;
    const std::uint32_t n1 = lo32(p1);
    const std::uint32_t n2 = hi32(p0) ^ c3 ^ k1;
    const std::uint32_t n3 = lo32(p0);
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return {c0, c1, c2, c3};
}

double CounterRng::uniform(std::uint64_t index, std::uint32_t slot) const {
  const auto words = philox4x32(seed_, slot, index);
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
  // 53 random bits, centered in the bin: strictly inside (0, 1).
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

double CounterRng::normal(std::uint64_t index, std::uint32_t slot) const {
  return normal_quantile(uniform(index, slot));
}

std::uint64_t CounterRng::derive(std::uint64_t stream) const {
  const auto words = philox4x32(seed_, 0x5eedC0DEuLL, stream);
  return (static_cast<std::uint64_t>(words[3]) << 32) | words[2];
}

// AS241 (PPND16): maximum absolute error around 1e-16 over (0, 1).
double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, Status::domain_error,
          "normal_quantile requires p in (0, 1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
            1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
          1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return (q < 0.0) ? -value : value;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * constants::pi);
}

namespace {

constexpr std::uint32_t kPrimes[] = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,
    53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113,
    127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197,
    199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281,
    283, 293, 307, 311};

}  // namespace

ScrambledHalton::ScrambledHalton(std::size_t dim, std::uint64_t seed) {
  require(dim >= 1 && dim <= std::size(kPrimes), Status::invalid_argument,
          "ScrambledHalton supports 1..64 dimensions");
  bases_.resize(dim);
  permutations_.resize(dim);
  CounterRng rng(seed);
  for (std::size_t d = 0; d < dim; ++d) {
    const std::uint32_t b = kPrimes[d];
    bases_[d] = b;
    auto& perm = permutations_[d];
    perm.resize(b);
    for (std::uint32_t i = 0; i < b; ++i) perm[i] = i;
    // Fisher-Yates keyed by (dimension, position).
    for (std::uint32_t i = b - 1; i > 0; --i) {
      const double u = rng.uniform((static_cast<std::uint64_t>(d) << 32) | i, 0x48414Cu);
      const auto j = static_cast<std::uint32_t>(u * (i + 1));
      std::swap(perm[i], perm[j > i ? i : j]);
    }
  }
}

void ScrambledHalton::point(std::uint64_t index, double* out) const {
  for (std::size_t d = 0; d < permutations_.size(); ++d) {
    const std::uint32_t b = bases_[d];
    const auto& perm = permutations_[d];
    std::uint64_t n = index + 1;  // skip the origin
    double x = 0.0;
    double f = 1.0 / b;
    while (n != 0) {
      x += static_cast<double>(perm[n % b]) * f;
      n /= b;
      f /= b;
    }
    out[d] = x;
  }
}

std::vector<double> ScrambledHalton::point(std::uint64_t index) const {
  std::vector<double> out(dim());
  point(index, out.data());
  return out;
}

}  // namespace rb
