#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace irmarl {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic seed derivation: every independent random stream in the
// project is keyed as mix_seed(master, tag...), so results do not depend on
// evaluation order or thread count.
inline std::uint64_t mix_seed(std::uint64_t seed) {
  std::uint64_t s = seed;
  return splitmix64(s);
}
template <typename... Tags>
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag, Tags... rest) {
  std::uint64_t s = seed ^ (tag + 0x9e3779b97f4a7c15ull);
  return mix_seed(splitmix64(s), rest...);
}

// xoshiro256** with hand-rolled samplers; avoids the implementation-defined
// std:: distributions so a fixed seed gives identical draws everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  int uniform_int(int n) {  // in [0, n)
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  // Draw from a probability vector (assumed to sum to ~1).
  int categorical(std::span<const double> probs) {
    double u = uniform01();
    double acc = 0.0;
    for (std::size_t a = 0; a + 1 < probs.size(); ++a) {
      acc += probs[a];
      if (u < acc) return static_cast<int>(a);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

}  // namespace irmarl
