#pragma once

// Distributions of the Syracuse random variables on Z/3^n Z.
//
// X_0 is the point mass at 0 mod 1 and
//
//   P(X_{n+1} = x) = sum_{1 <= a <= 2*3^n, 2^a x = 1 mod 3} 2^-a P(X_n = (2^a x - 1)/3)
//                    / (1 - 2^(-2*3^n)).
//
// The exact tables use GMP rationals; the float tables use doubles and reach
// much higher levels.

#include <complex>
#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "syrlab/rng.hpp"

namespace syrlab {

using Rational = mpq_class;
using ComplexValue = std::complex<double>;

/// Level ceilings and the memory budget for distribution tables.
struct DistLimits {
  unsigned max_exact_level = 8;
  unsigned max_float_level = 15;
  std::uint64_t budget_bytes = std::uint64_t{2} << 30;
};

/// 3^n as a machine integer (n <= 40).
std::uint64_t pow3_u64(unsigned n);

struct Dist3Adic {
  unsigned level = 0;
  std::vector<Rational> probs;

  std::uint64_t modulus() const { return pow3_u64(level); }
  Rational total() const;
  /// Throws InvariantViolation when the table is not a probability
  /// distribution avoiding multiples of 3 (for level >= 1).
  void validate() const;

  friend bool operator==(const Dist3Adic&, const Dist3Adic&) = default;
};

struct Dist3AdicFloat {
  unsigned level = 0;
  std::vector<double> probs;

  std::uint64_t modulus() const { return pow3_u64(level); }
  /// Compensated sum of the table in index order.
  double total() const;
  void validate() const;
};

/// Exact table at level n. Throws LevelTooLarge past the exact ceiling or budget.
Dist3Adic syracuse_dist_exact(unsigned n, const DistLimits& limits = {}, unsigned threads = 1);
/// Exact tables for levels 0..n (each level is built from the previous one).
std::vector<Dist3Adic> syracuse_dist_exact_levels(unsigned n, const DistLimits& limits = {},
                                                  unsigned threads = 1);

Dist3AdicFloat syracuse_dist_float(unsigned n, const DistLimits& limits = {},
                                   unsigned threads = 1);

/// Pushforward under reduction mod 3^k. Throws BadLevel if k > level.
Dist3Adic project(const Dist3Adic& dist, unsigned k);
Dist3AdicFloat project(const Dist3AdicFloat& dist, unsigned k);

/// Osc_{m,n}: sum_Y |c_Y - 3^(m-n) sum_{Y' = Y mod 3^m} c_Y'|. Requires
/// 0 <= m <= level (m = 0 compares against the global average).
Rational oscillation(const Dist3Adic& dist, unsigned m);
double oscillation(const Dist3AdicFloat& dist, unsigned m);

/// E exp(-2 pi i xi X / 3^n). The exact overload sums the exact mass of each
/// phase class before converting, so xi = 0 gives exactly 1.
ComplexValue char_sum(const Dist3Adic& dist, std::uint64_t xi);
ComplexValue char_sum(const Dist3AdicFloat& dist, std::uint64_t xi);

struct CharOscReport {
  unsigned level = 0;
  Rational osc;             // Osc_{n-1,n} of the exact table
  double max_abs_char = 0;  // over xi with 3 not dividing xi
  double max_slack = 0;     // max over xi of |char| - osc; <= 1e-9 when the bound holds
  std::uint64_t frequencies_checked = 0;
  bool holds = false;
};

/// Checks |char_sum(dist(n), xi)| <= Osc_{n-1,n} + 1e-9 for every xi with 3 not dividing xi.
CharOscReport char_osc_inequality_check(unsigned n, const DistLimits& limits = {});

struct CharProbeRow {
  unsigned level = 0;
  std::uint64_t xi = 0;  // as requested, before reduction mod 3^n
  ComplexValue value;
};

struct CharProbeTable {
  std::vector<CharProbeRow> rows;
  /// (level, xi) pairs dropped because 3 | xi.
  std::vector<std::pair<unsigned, std::uint64_t>> rejected;
};

inline const std::vector<std::uint64_t> kDefaultCharProbes{1, 2, 5, 7};

/// |char_sum| over the fixed probe set plus `random_probes` seeded
/// frequencies coprime to 3 for every level in `levels` (float path).
CharProbeTable char_probe_table(const std::vector<unsigned>& levels,
                                const std::vector<std::uint64_t>& fixed_probes,
                                unsigned random_probes, Seed seed,
                                const DistLimits& limits = {}, unsigned threads = 1);

}  // namespace syrlab
