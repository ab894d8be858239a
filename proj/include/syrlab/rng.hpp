#pragma once

// Seeded random streams.
//
// Every stream is a std::mt19937_64 engine whose state is initialised by
// std::seed_seq from the four 32-bit words (seed_lo, seed_hi, stream_lo,
// stream_hi). Both the engine and seed_seq are fully specified by the C++
// standard, and all variates below are derived from raw 64-bit outputs
// (never from <random> distributions, whose algorithms are unspecified), so a
// (seed, stream) pair yields the same bits on every conforming platform.

#include <cstdint>
#include <random>

namespace syrlab {

struct Seed {
  std::uint64_t value = 0;
};

class Rng {
 public:
  explicit Rng(Seed seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }
  /// Uniform on [0, bound) without modulo bias. bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace syrlab
