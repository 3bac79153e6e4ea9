#pragma once

#include <cstdint>
#include <random>

namespace nonword {

// Seeded random source with a platform-independent output sequence.
// std::mt19937_64's raw output is fixed by the standard; the distributions
// below are written out by hand because the standard library ones are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent sub-stream for shard `stream` of a master seed.
  static Rng derive(std::uint64_t master_seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer on [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace nonword
