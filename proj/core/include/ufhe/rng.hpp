#pragma once

#include <cstdint>
#include <random>

namespace ufhe {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic generator; split() derives independent child streams from the seed.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next() { return eng_(); }

  // Uniform in [0, bound) by rejection.
  std::uint64_t uniform(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % bound;
  }

  Prng split(std::uint64_t stream) const { return Prng(splitmix64(seed_ ^ splitmix64(stream + 0x5bd1e995ull))); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace ufhe
