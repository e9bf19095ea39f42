#pragma once

#include <cstdint>
#include <vector>

namespace qiml {

// Deterministic counter-based random stream (xoshiro256** seeded via
// splitmix64). Same seed gives the same draw sequence on any platform;
// training code passes streams explicitly so runs replay bit-for-bit.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller (no state caching).
  double normal();

  // Independent child stream, e.g. one per trajectory or per worker.
  RandomStream spawn(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

}  // namespace qiml
