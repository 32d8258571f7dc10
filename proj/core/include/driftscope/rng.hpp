#pragma once

#include <cstdint>
#include <limits>

namespace driftscope {

// SplitMix64: a splittable 64-bit generator. Satisfies UniformRandomBitGenerator so
// it plugs into <random> distributions.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Independent stream for one Monte Carlo path: seed xor a hash of the path index.
constexpr SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(seed ^ SplitMix64::mix(index + 0x632BE59BD9B4E019ULL));
}

}  // namespace driftscope
