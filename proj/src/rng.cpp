#include "syrlab/rng.hpp"

#include <array>

namespace syrlab {

Rng::Rng(Seed seed, std::uint64_t stream) {
  const std::array<std::uint32_t, 4> words{
      static_cast<std::uint32_t>(seed.value), static_cast<std::uint32_t>(seed.value >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Reject the partial top bucket.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

}  // namespace syrlab
