#pragma once

#include <cstdint>

namespace kadsim {

// Finalizer of the splitmix64 generator. Used both as the stream step and to
// derive independent stream seeds from (seed, index) pairs.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Small deterministic PRNG stream (splitmix64). Every random decision in the
// simulator comes from an explicitly seeded Rng so that runs are reproducible
// byte for byte; std::random distributions are avoided on purpose because
// their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Derives an independent stream for a sub-entity (e.g. one per operation).
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix64(seed ^ mix64(index + 0x51ed2701a39b24a1ull)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  // Uniform value in [0, n). Multiply-shift keeps the draw deterministic and
  // bias below 2^-40 for every n used here.
  std::uint64_t below(std::uint64_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((u128(next_u64()) * u128(n)) >> 64);
  }

  // Uniform value in [lo, hi], both ends inclusive. Requires lo <= hi.
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    return lo + below(hi - lo + 1);
  }

 private:
  std::uint64_t state_;
};

}  // namespace kadsim
