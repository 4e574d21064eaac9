#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "errors.hpp"

// Portable pseudo-randomness. Every stochastic step in the library (bag
// sampling, covariate subsets, train/test shuffles, hyperparameter draws)
// goes through this generator so that results reproduce bit-for-bit across
// platforms and across any degree of fit parallelism. The exact recipe is
// part of the model/file compatibility contract and is documented in the
// README; changing any constant here is a format break.
//
//   state transition : s += 0x9E3779B97F4A7C15 (64-bit wraparound)
//   output           : mix64(s), the splitmix64 finalizer
//   substreams       : seed' = mix64(seed ^ mix64(context*GOLDEN + index))
//   bounded draw     : rejection sampling on x % n (no modulo bias)

namespace bopnn::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Contexts keep independent uses of the same user seed from colliding.
enum Context : std::uint64_t {
  kCtxModelFit = 1,   // one stream per base model, index = model number 1..B
  kCtxSplit = 2,      // train/test shuffles, index = repetition
  kCtxTuneDraws = 3,  // hyperparameter sampling, index = 0
  kCtxTrialFit = 4,   // per-trial fit seeds, index = trial number
};

constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t context,
                                  std::uint64_t index) {
  return mix64(seed ^ mix64(context * kGolden + index));
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Rejects draws in the biased remainder range.
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) fail(ErrorCode::kInvalidArgument, "bounded(0) draw");
    const std::uint64_t min = (0 - n) % n;  // 2^64 mod n
    std::uint64_t x;
    do {
      x = next();
    } while (x < min);
    return x % n;
  }

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) fail(ErrorCode::kInvalidArgument, "empty uniform_int range");
    return lo + static_cast<std::int64_t>(
                    bounded(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Fisher-Yates, iterating from the back.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // m distinct indices from [0, n), returned sorted ascending.
  // Partial Fisher-Yates over the identity permutation.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t m);

 private:
  std::uint64_t state_;
};

inline std::vector<std::size_t> SplitMix64::sample_without_replacement(
    std::size_t n, std::size_t m) {
  if (m > n) fail(ErrorCode::kInvalidArgument, "sample size exceeds population");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace bopnn::rng
