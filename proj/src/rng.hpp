#ifndef RB_RNG_HPP
#define RB_RNG_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace rb {

// Philox4x32-10 block function. Counter-based: the value depends only on
// (key, counter), so any sample in a stream can be generated out of order.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key, std::uint64_t counter_hi,
                                        std::uint64_t counter_lo);

// Standard-normal quantile (Wichura's AS241, double precision) and the
// matching density/CDF helpers used by the acquisition functions.
double normal_quantile(double p);
double normal_cdf(double x);
double normal_pdf(double x);

// Deterministic generator keyed by a user seed. Draws are addressed by
// (sample index, slot); batches evaluated in parallel reproduce the
// sequential stream exactly.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  // Uniform in the open interval (0, 1).
  double uniform(std::uint64_t index, std::uint32_t slot) const;
  // Standard normal via inverse-CDF of uniform(index, slot).
  double normal(std::uint64_t index, std::uint32_t slot) const;
  // Derived sub-seed for an independent stream.
  std::uint64_t derive(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// Halton sequence with per-dimension digit scrambling. Used for space-filling
// initial designs; point(i) skips the origin (radical inverse of i + 1).
class ScrambledHalton {
 public:
  ScrambledHalton(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const { return permutations_.size(); }
  void point(std::uint64_t index, double* out) const;
  std::vector<double> point(std::uint64_t index) const;

 private:
  std::vector<std::uint32_t> bases_;
  std::vector<std::vector<std::uint32_t>> permutations_;
};

}  // namespace rb

#endif
