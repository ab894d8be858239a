#include "syrlab/dist3adic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "syrlab/error.hpp"
#include "syrlab/numeric.hpp"
#include "syrlab/parallel.hpp"

namespace syrlab {

std::uint64_t pow3_u64(unsigned n) {
  if (n > 40) throw BadLevel("3^" + std::to_string(n) + " does not fit in 64 bits");
  std::uint64_t r = 1;
  for (unsigned i = 0; i < n; ++i) r *= 3;
  return r;
}

namespace {

void check_exact_budget(unsigned n, const DistLimits& limits) {
  if (n > limits.max_exact_level) {
    throw LevelTooLarge("exact level " + std::to_string(n) + " exceeds ceiling " +
                        std::to_string(limits.max_exact_level));
  }
  // Numerators and the common denominator both carry about 3^n bits.
  const double entries = std::pow(3.0, n);
  const double bytes = entries * 2.0 * (entries / 8.0 + 32.0);
  if (bytes > static_cast<double>(limits.budget_bytes)) {
    throw LevelTooLarge("exact level " + std::to_string(n) + " needs ~" +
                        std::to_string(static_cast<std::uint64_t>(bytes)) + " bytes");
  }
}

void check_float_budget(unsigned n, const DistLimits& limits) {
  if (n > limits.max_float_level) {
    throw LevelTooLarge("float level " + std::to_string(n) + " exceeds ceiling " +
                        std::to_string(limits.max_float_level));
  }
  const double bytes = std::pow(3.0, n) * 8.0 * (4.0 / 3.0);
  if (bytes > static_cast<double>(limits.budget_bytes)) {
    throw LevelTooLarge("float level " + std::to_string(n) + " needs ~" +
                        std::to_string(static_cast<std::uint64_t>(bytes)) + " bytes");
  }
}

// Exact level as integer weights over one common denominator.
struct ExactLevel {
  std::vector<mpz_class> weight;
  mpz_class denominator;
};

// Every a in the admissible parity class contributes 2^(L-a) w_n(y_a) over
// the new denominator D_n (2^L - 1), with L = 2*3^n. Horner over ascending a
// accumulates sum_a 2^(a_max - a) w_n(y_a).
ExactLevel raise_exact(const ExactLevel& prev, unsigned n, unsigned threads) {
  const std::uint64_t mod = pow3_u64(n + 1);
  const std::uint64_t period = 2 * pow3_u64(n);
  ExactLevel next;
  next.weight.resize(mod);
  mpz_class factor;
  mpz_ui_pow_ui(factor.get_mpz_t(), 2, period);
  next.denominator = prev.denominator * (factor - 1);

  const std::size_t chunk = 243;
  const std::size_t chunks = (mod + chunk - 1) / chunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::uint64_t begin = c * chunk;
    const std::uint64_t end = std::min<std::uint64_t>(mod, begin + chunk);
    mpz_class acc;
    for (std::uint64_t x = begin; x < end; ++x) {
      const unsigned r = x % 3;
      if (r == 0) continue;  // weight stays 0
      const std::uint64_t a_first = r == 1 ? 2 : 1;
      const std::uint64_t a_last = r == 1 ? period : period - 1;
      std::uint64_t v = mulmod_u64(powmod_u64(2, a_first, mod), x, mod);
      acc = 0;
      for (std::uint64_t a = a_first; a <= a_last; a += 2) {
        const std::uint64_t y = (v - 1) / 3;
        mpz_mul_2exp(acc.get_mpz_t(), acc.get_mpz_t(), 2);
        acc += prev.weight[y];
        v = mulmod_u64(v, 4, mod);
      }
      mpz_mul_2exp(next.weight[x].get_mpz_t(), acc.get_mpz_t(), period - a_last);
    }
  });
  return next;
}

Dist3Adic to_rational(const ExactLevel& lvl, unsigned n) {
  Dist3Adic d;
  d.level = n;
  d.probs.resize(lvl.weight.size());
  for (std::size_t i = 0; i < lvl.weight.size(); ++i) {
    d.probs[i] = Rational(lvl.weight[i], lvl.denominator);
    d.probs[i].canonicalize();
  }
  return d;
}

// Signed representative of k mod m in (-m/2, m/2], as a fraction of m.
double signed_fraction(std::uint64_t k, std::uint64_t m) {
  const std::int64_t s = k > m / 2 ? -static_cast<std::int64_t>(m - k) : static_cast<std::int64_t>(k);
  return static_cast<double>(s) / static_cast<double>(m);
}

ComplexValue phase(std::uint64_t k, std::uint64_t m) {
  const double angle = -2.0 * std::numbers::pi * signed_fraction(k, m);
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

// --- exact -----------------------------------------------------------------

Rational Dist3Adic::total() const {
  Rational s = 0;
  for (const auto& p : probs) s += p;
  return s;
}

void Dist3Adic::validate() const {
  if (probs.size() != modulus()) throw InvariantViolation("table size is not 3^level");
  for (std::size_t y = 0; y < probs.size(); ++y) {
    if (probs[y] < 0) throw InvariantViolation("negative mass at residue " + std::to_string(y));
    if (level >= 1 && y % 3 == 0 && probs[y] != 0) {
      throw InvariantViolation("nonzero mass on multiple of 3 at residue " + std::to_string(y));
    }
  }
  if (total() != 1) throw InvariantViolation("total mass is " + total().get_str() + ", not 1");
}

std::vector<Dist3Adic> syracuse_dist_exact_levels(unsigned n, const DistLimits& limits,
                                                  unsigned threads) {
  check_exact_budget(n, limits);
  std::vector<Dist3Adic> out;
  out.reserve(n + 1);
  ExactLevel lvl{{mpz_class(1)}, mpz_class(1)};
  out.push_back(to_rational(lvl, 0));
  for (unsigned k = 0; k < n; ++k) {
    lvl = raise_exact(lvl, k, threads);
    out.push_back(to_rational(lvl, k + 1));
  }
  return out;
}

Dist3Adic syracuse_dist_exact(unsigned n, const DistLimits& limits, unsigned threads) {
  check_exact_budget(n, limits);
  ExactLevel lvl{{mpz_class(1)}, mpz_class(1)};
  for (unsigned k = 0; k < n; ++k) lvl = raise_exact(lvl, k, threads);
  return to_rational(lvl, n);
}

Dist3Adic project(const Dist3Adic& dist, unsigned k) {
  if (k > dist.level) {
    throw BadLevel("cannot project level " + std::to_string(dist.level) + " to " +
                   std::to_string(k));
  }
  const std::uint64_t mod = pow3_u64(k);
  Dist3Adic out{k, std::vector<Rational>(mod, Rational(0))};
  for (std::size_t y = 0; y < dist.probs.size(); ++y) out.probs[y % mod] += dist.probs[y];
  return out;
}

Rational oscillation(const Dist3Adic& dist, unsigned m) {
  if (m > dist.level) {
    throw BadLevel("oscillation scale " + std::to_string(m) + " exceeds level " +
                   std::to_string(dist.level));
  }
  const Dist3Adic fibers = project(dist, m);
  const std::uint64_t mod = fibers.modulus();
  const Rational fiber_size(mpz_class(static_cast<unsigned long>(dist.modulus() / mod)));
  std::vector<Rational> average(mod);
  for (std::uint64_t r = 0; r < mod; ++r) average[r] = fibers.probs[r] / fiber_size;
  Rational sum = 0;
  for (std::size_t y = 0; y < dist.probs.size(); ++y) sum += abs(dist.probs[y] - average[y % mod]);
  return sum;
}

ComplexValue char_sum(const Dist3Adic& dist, std::uint64_t xi) {
  const std::uint64_t mod = dist.modulus();
  xi %= mod;
  std::vector<Rational> mass(mod, Rational(0));
  for (std::uint64_t y = 0; y < dist.probs.size(); ++y) {
    if (dist.probs[y] != 0) mass[mulmod_u64(xi, y, mod)] += dist.probs[y];
  }
  CompensatedSum re, im;
  for (std::uint64_t k = 0; k < mod; ++k) {
    if (mass[k] == 0) continue;
    const double w = mass[k].get_d();
    const ComplexValue z = phase(k, mod);
    re.add(w * z.real());
    im.add(w * z.imag());
  }
  return {re.value(), im.value()};
}

// --- float -----------------------------------------------------------------

double Dist3AdicFloat::total() const {
  CompensatedSum s;
  for (double p : probs) s.add(p);
  return s.value();
}

void Dist3AdicFloat::validate() const {
  if (probs.size() != modulus()) throw InvariantViolation("table size is not 3^level");
  for (double p : probs) {
    if (!(p >= 0)) throw InvariantViolation("negative or NaN mass in float table");
  }
  const double tol = static_cast<double>(modulus()) * 0x1.0p-40;
  if (std::fabs(total() - 1.0) > tol) {
    throw InvariantViolation("float table total deviates from 1 by more than 3^n 2^-40");
  }
}

Dist3AdicFloat syracuse_dist_float(unsigned n, const DistLimits& limits, unsigned threads) {
  check_float_budget(n, limits);
  // Terms with a beyond this many parity steps weigh < 2^-128 and are dropped.
  constexpr std::uint64_t kMaxTerms = 64;
  std::vector<double> prev{1.0};
  for (unsigned k = 0; k < n; ++k) {
    const std::uint64_t mod = pow3_u64(k + 1);
    const std::uint64_t period = 2 * pow3_u64(k);
    const std::uint64_t inv4 = powmod_u64((mod + 1) / 2, 2, mod);
    const double renorm = 1.0 / (1.0 - std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(period, 2000))));
    std::vector<double> next(mod, 0.0);
    const std::size_t chunk = 4096;
    const std::size_t chunks = (mod + chunk - 1) / chunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
      const std::uint64_t begin = c * chunk;
      const std::uint64_t end = std::min<std::uint64_t>(mod, begin + chunk);
      for (std::uint64_t x = begin; x < end; ++x) {
        const unsigned r = x % 3;
        if (r == 0) continue;
        const std::uint64_t a_first = r == 1 ? 2 : 1;
        const std::uint64_t available = (period - a_first) / 2 + 1;
        const std::uint64_t terms = std::min(available, kMaxTerms);
        const std::uint64_t a_last = a_first + 2 * (terms - 1);
        // Smallest weights first: Horner from a_last down to a_first.
        std::uint64_t v = mulmod_u64(powmod_u64(2, a_last, mod), x, mod);
        double acc = 0.0;
        for (std::uint64_t t = 0; t < terms; ++t) {
          acc = acc * 0.25 + prev[(v - 1) / 3];
          v = mulmod_u64(v, inv4, mod);
        }
        next[x] = std::ldexp(acc, -static_cast<int>(a_first)) * renorm;
      }
    });
    prev = std::move(next);
  }
  return Dist3AdicFloat{n, std::move(prev)};
}

Dist3AdicFloat project(const Dist3AdicFloat& dist, unsigned k) {
  if (k > dist.level) {
    throw BadLevel("cannot project level " + std::to_string(dist.level) + " to " +
                   std::to_string(k));
  }
  const std::uint64_t mod = pow3_u64(k);
  std::vector<CompensatedSum> sums(mod);
  for (std::size_t y = 0; y < dist.probs.size(); ++y) sums[y % mod].add(dist.probs[y]);
  Dist3AdicFloat out{k, std::vector<double>(mod)};
  for (std::uint64_t r = 0; r < mod; ++r) out.probs[r] = sums[r].value();
  return out;
}

double oscillation(const Dist3AdicFloat& dist, unsigned m) {
  if (m > dist.level) {
    throw BadLevel("oscillation scale " + std::to_string(m) + " exceeds level " +
                   std::to_string(dist.level));
  }
  const Dist3AdicFloat fibers = project(dist, m);
  const std::uint64_t mod = fibers.modulus();
  const double fiber_size = static_cast<double>(dist.modulus() / mod);
  CompensatedSum sum;
  for (std::size_t y = 0; y < dist.probs.size(); ++y) {
    sum.add(std::fabs(dist.probs[y] - fibers.probs[y % mod] / fiber_size));
  }
  return sum.value();
}

ComplexValue char_sum(const Dist3AdicFloat& dist, std::uint64_t xi) {
  const std::uint64_t mod = dist.modulus();
  xi %= mod;
  CompensatedSum re, im;
  for (std::uint64_t y = 0; y < dist.probs.size(); ++y) {
    const double p = dist.probs[y];
    if (p == 0) continue;
    const ComplexValue z = phase(mulmod_u64(xi, y, mod), mod);
    re.add(p * z.real());
    im.add(p * z.imag());
  }
  return {re.value(), im.value()};
}

// --- probes ----------------------------------------------------------------

CharOscReport char_osc_inequality_check(unsigned n, const DistLimits& limits) {
  if (n < 1) throw BadLevel("char/osc check needs n >= 1");
  const Dist3Adic exact = syracuse_dist_exact(n, limits);
  Dist3AdicFloat approx{n, std::vector<double>(exact.probs.size())};
  for (std::size_t y = 0; y < exact.probs.size(); ++y) approx.probs[y] = exact.probs[y].get_d();

  CharOscReport report;
  report.level = n;
  report.osc = oscillation(exact, n - 1);
  const double osc = report.osc.get_d();
  report.max_slack = -osc;
  const std::uint64_t mod = exact.modulus();
  for (std::uint64_t xi = 1; xi < mod; ++xi) {
    if (xi % 3 == 0) continue;
    const double a = std::abs(char_sum(approx, xi));
    report.max_abs_char = std::max(report.max_abs_char, a);
    report.max_slack = std::max(report.max_slack, a - osc);
    ++report.frequencies_checked;
  }
  report.holds = report.max_slack <= 1e-9;
  return report;
}

CharProbeTable char_probe_table(const std::vector<unsigned>& levels,
                                const std::vector<std::uint64_t>& fixed_probes,
                                unsigned random_probes, Seed seed, const DistLimits& limits,
                                unsigned threads) {
  CharProbeTable table;
  for (unsigned n : levels) {
    if (n == 0) {
      table.rows.push_back({0, 0, ComplexValue(1.0, 0.0)});
      continue;
    }
    const Dist3AdicFloat dist = syracuse_dist_float(n, limits, threads);
    const std::uint64_t mod = dist.modulus();
    std::vector<std::uint64_t> probes;
    for (auto xi : fixed_probes) {
      if (xi % 3 == 0) {
        table.rejected.emplace_back(n, xi);
      } else {
        probes.push_back(xi);
      }
    }
    Rng rng(seed, n);
    for (unsigned i = 0; i < random_probes && mod > 1; ++i) {
      std::uint64_t xi;
      do {
        xi = 1 + rng.below(mod - 1);
      } while (xi % 3 == 0);
      probes.push_back(xi);
    }
    for (auto xi : probes) table.rows.push_back({n, xi, char_sum(dist, xi)});
  }
  return table;
}

}  // namespace syrlab
