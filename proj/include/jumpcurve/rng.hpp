#pragma once

#include <cmath>
#include <cstdint>

namespace jumpcurve {

// Deterministic random streams with an explicit replica-splitting rule.
//
// Stream seeding is bit-exact and documented here so results can be
// reproduced outside this codebase:
//
//   splitmix64(z): z += 0x9E3779B97F4A7C15
//                  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                  z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                  return z ^ (z >> 31)
//
//   replica_seed(seed, index) = splitmix64_mix(seed ^ splitmix64_mix(0x9E3779B97F4A7C15 * (index + 1)))
//   where splitmix64_mix is one splitmix64 output step on the given state.
//
//   The stream itself is xoshiro256++ whose four state words are the first
//   four splitmix64 outputs seeded with replica_seed.
//
//   Uniform doubles in [0,1) take the top 53 bits: (x >> 11) * 2^-53.
//   Exponential(rate) = -log1p(-u) / rate.
//
// All of this is independent of platform, standard library and thread count.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// One mixing step applied to a value (not advancing a stream).
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  std::uint64_t s = z;
  return splitmix64_next(s);
}

// Independent sub-stream seed for replica `index` under master `seed`.
inline std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64_mix(seed ^ splitmix64_mix(0x9E3779B97F4A7C15ULL * (index + 1)));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64_next(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // -log1p(-u) maps u in [0,1) to (0, inf] without hitting log(0).
  double next_exponential(double rate) { return -std::log1p(-next_double()) / rate; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

}  // namespace jumpcurve
