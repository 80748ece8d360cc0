#pragma once

#include <cstdint>

namespace kvbench {

// SplitMix64 (Steele, Lea, Flood 2014). Used for seeding and seed derivation.
constexpr uint64_t splitmix64_next(uint64_t& state) noexcept {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Combines a parent seed with a stream index into an independent child seed.
constexpr uint64_t derive_seed(uint64_t parent, uint64_t index) noexcept {
  uint64_t s = parent ^ (index * 0xd1b54a32d192ed03ULL);
  splitmix64_next(s);
  return splitmix64_next(s);
}

// xoshiro256** 1.0 (Blackman, Vigna). State seeded from four SplitMix64
// outputs so that any 64-bit seed, including 0, is valid.
class Xoshiro256 {
 public:
  using result_type = uint64_t;

  explicit constexpr Xoshiro256(uint64_t seed) noexcept {
    uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~uint64_t{0}; }

  constexpr result_type operator()() noexcept {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) built from the top 53 bits.
  constexpr double next_double() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr uint64_t rotl(uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  uint64_t s_[4]{};
};

}  // namespace kvbench
