#pragma once

// First passage of Syracuse orbits below a threshold x:
//   T_x(N) = min{n : Syr^n(N) <= x},  Pass_x(N) = Syr^{T_x(N)}(N),
// with Pass_x(N) = 1 when no passage is seen within the iteration cap.

#include <cstdint>
#include <optional>
#include <vector>

#include "syrlab/dynamics.hpp"
#include "syrlab/rng.hpp"
#include "syrlab/stochastic.hpp"

namespace syrlab {

struct PassageOutcome {
  std::optional<std::uint64_t> time;  // empty when the cap was exhausted
  Natural location;                   // 1 when the cap was exhausted
  Natural trajectory_max;
  Natural prefix_min;                 // min of Syr^s(N) for s < time; 0 if time == 0

  bool exhausted() const { return !time.has_value(); }
};

PassageOutcome first_passage(const OddNatural& n, const Natural& x, std::uint64_t cap);

/// Default iteration cap for a starting value: ceil(10 log N / log(4/3)).
std::uint64_t default_passage_cap(const Natural& n);

/// Odd N in [lo, hi] with P(N) proportional to 1/N. Narrow ranges
/// (hi - lo <= 10^7) use inverse CDF on the exact partial sums; wider ones
/// draw from the continuous log density and correct by rejection.
class LogUniformOddSampler {
 public:
  static constexpr std::uint64_t kExactSpan = 10'000'000;

  LogUniformOddSampler(std::uint64_t lo, std::uint64_t hi);

  std::uint64_t operator()(Rng& rng) const;
  std::uint64_t lo() const { return lo_; }
  std::uint64_t hi() const { return hi_; }
  bool exact() const { return !cumulative_.empty(); }
  /// P(N = k) for odd k in range, from the exact harmonic sum.
  double probability(std::uint64_t k) const;

 private:
  std::uint64_t lo_;
  std::uint64_t hi_;
  std::vector<double> cumulative_;
  double total_ = 0;
  double log_span_ = 0;
};

OddNatural sample_log_uniform(std::uint64_t lo, std::uint64_t hi, Rng& rng);

struct ExperimentConfig {
  double x = 1e4;
  double alpha = 1.25;
  std::uint64_t samples = 100'000;
  Seed seed{};
  std::optional<std::uint64_t> cap;  // per-sample default when empty

  void validate() const;
  /// floor(log x / (10 log 2)).
  std::uint64_t n0() const;
  /// floor((alpha - 1) / 100 * log x).
  std::uint64_t m0() const;
  std::uint64_t threshold() const;
};

struct PassageSample {
  int y_tag = 1;  // 1: y = x^alpha, 2: y = x^(alpha^2)
  Natural start;
  PassageOutcome outcome;
  double predicted_time = 0;  // log(N / x) / log(4/3)
};

struct PassageReport {
  ExperimentConfig config;
  std::uint64_t x = 0;
  std::vector<PassageSample> samples;  // all y = x^alpha draws, then all y = x^(alpha^2)
  double exhaustion_rate_y1 = 0;
  double exhaustion_rate_y2 = 0;
  Rational tv;  // between the two Pass_x laws, finite-time samples only
  EmpiricalDist<std::uint64_t> locations_y1;
  EmpiricalDist<std::uint64_t> locations_y2;
  double median_time_ratio = 0;     // median of T_x / predicted_time
  double decay_probe_fraction = 0;  // share within 10 (log x)^0.6 at n = floor(n0/2)
};

PassageReport passage_experiment(const ExperimentConfig& cfg, unsigned threads = 1);

/// Every finite location is odd, <= x and > x / 2^64, every earlier orbit
/// value exceeded x, and exhausted samples sit at 1.
bool passage_support_check(const PassageReport& report);

struct MinimalityCheck {
  std::uint64_t checked = 0;
  bool passed = true;
};

/// Re-iterates `count` randomly chosen finite-time samples from scratch.
MinimalityCheck minimality_spot_check(const PassageReport& report, std::uint64_t count, Seed seed);

}  // namespace syrlab
