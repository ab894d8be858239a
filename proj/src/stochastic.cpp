#include "syrlab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "syrlab/numeric.hpp"
#include "syrlab/parallel.hpp"

namespace syrlab {

std::uint64_t sample_geom(double mu, Rng& rng) {
  if (!(mu > 1.0)) throw BadParameter("Geom(mu) needs mu > 1");
  // Smallest a with 1 - q^a >= 1 - U, U uniform on (0, 1].
  const double q = (mu - 1.0) / mu;
  const double a = std::ceil(std::log(rng.uniform_pos()) / std::log(q));
  return a < 1.0 ? 1 : static_cast<std::uint64_t>(a);
}

std::uint64_t sample_pascal(Rng& rng) { return sample_geom(2.0, rng) + sample_geom(2.0, rng); }

double geom_pmf(double mu, std::uint64_t a) {
  if (!(mu > 1.0)) throw BadParameter("Geom(mu) needs mu > 1");
  if (a < 1) return 0.0;
  return std::pow((mu - 1.0) / mu, static_cast<double>(a - 1)) / mu;
}

Rational pascal_pmf(std::uint64_t b) {
  if (b < 2) return Rational(0);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, b);
  Rational r(mpz_class(static_cast<unsigned long>(b - 1)), den);
  r.canonicalize();
  return r;
}

double g_weight(std::uint64_t n, std::span<const double> x) {
  double sq = 0;
  for (double v : x) sq += v * v;
  const double norm = std::sqrt(sq);
  const double gauss = n == 0 ? 0.0 : std::exp(-sq / static_cast<double>(n));
  return gauss + std::exp(-norm);
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw SpaceMismatch("outcome spaces differ in size");
  CompensatedSum s;
  for (std::size_t i = 0; i < p.size(); ++i) s.add(std::fabs(p[i] - q[i]));
  return s.value();
}

Rational tv_distance(std::span<const Rational> p, std::span<const Rational> q) {
  if (p.size() != q.size()) throw SpaceMismatch("outcome spaces differ in size");
  Rational s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += abs(p[i] - q[i]);
  return s;
}

double sup_event_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw SpaceMismatch("outcome spaces differ in size");
  CompensatedSum pos, neg;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    (d > 0 ? pos : neg).add(std::fabs(d));
  }
  return std::max(pos.value(), neg.value());
}

// --- residue enumeration ---------------------------------------------------

namespace {

Rational power_of_two_fraction(std::uint64_t count, std::uint64_t exp) {
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, exp);
  Rational r(mpz_class(static_cast<unsigned long>(count)), den);
  r.canonicalize();
  return r;
}

using TupleCounts = std::map<std::vector<std::uint32_t>, std::uint64_t>;

struct BlockResult {
  TupleCounts in_range;
  std::vector<std::uint64_t> escaped_residues;
};

// Follows r mod 2^m through n Syracuse steps while the residue still pins the
// valuation: with r known mod 2^k, 3r + 1 mod 2^k is either 0 (escape) or has
// a valuation a < k, leaving Syr(r) known mod 2^(k-a).
void enumerate_block(std::uint64_t first, std::uint64_t last, unsigned n, unsigned m,
                     BlockResult& out) {
  std::vector<std::uint32_t> tuple;
  tuple.reserve(n);
  for (std::uint64_t r0 = first; r0 < last; r0 += 2) {
    tuple.clear();
    std::uint64_t r = r0;
    unsigned k = m;
    bool escaped = false;
    for (unsigned step = 0; step < n; ++step) {
      const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
      const std::uint64_t t = (3 * r + 1) & mask;
      if (t == 0) {
        escaped = true;
        break;
      }
      const unsigned a = static_cast<unsigned>(__builtin_ctzll(t));
      tuple.push_back(a);
      r = t >> a;
      k -= a;
    }
    if (escaped) {
      out.escaped_residues.push_back(r0);
      continue;
    }
    auto it = out.in_range.find(tuple);
    if (it == out.in_range.end()) {
      out.in_range.emplace(tuple, 1);
    } else {
      ++it->second;
    }
  }
}

std::vector<BlockResult> enumerate(unsigned n, unsigned m, const EnumerationLimits& limits,
                                   unsigned threads) {
  if (m < 1) throw BadParameter("modulus exponent m must be >= 1");
  if (m > limits.max_modulus_exp || m > 62) {
    throw BudgetExceeded("2^" + std::to_string(m - 1) + " residues exceed the enumeration budget 2^" +
                         std::to_string(limits.max_modulus_exp - 1));
  }
  const std::uint64_t modulus = std::uint64_t{1} << m;
  constexpr std::uint64_t kBlock = std::uint64_t{1} << 16;
  const std::size_t blocks = static_cast<std::size_t>((modulus + kBlock - 1) / kBlock);
  std::vector<BlockResult> results(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::uint64_t first = b * kBlock + 1;
    const std::uint64_t last = std::min(modulus, (b + 1) * kBlock);
    enumerate_block(first, last, n, m, results[b]);
  });
  return results;
}

}  // namespace

Rational TailMass::probability(const ValuationTuple& a) const {
  const auto it = in_range.find(a);
  return it == in_range.end() ? Rational(0) : power_of_two_fraction(it->second, modulus_exp - 1);
}

Rational TailMass::escaped_mass() const { return power_of_two_fraction(escaped, modulus_exp - 1); }

Rational TailMass::in_range_mass() const {
  return power_of_two_fraction(residues - escaped, modulus_exp - 1);
}

TailMass exact_valuation_distribution(unsigned n, unsigned m, const EnumerationLimits& limits,
                                      unsigned threads) {
  const auto blocks = enumerate(n, m, limits, threads);
  TailMass out;
  out.steps = n;
  out.modulus_exp = m;
  out.residues = std::uint64_t{1} << (m - 1);
  for (const auto& b : blocks) {
    for (const auto& [tuple, count] : b.in_range) out.in_range[ValuationTuple(tuple)] += count;
    out.escaped += b.escaped_residues.size();
  }
  return out;
}

Rational geometric_tail(unsigned n, unsigned m) {
  if (n == 0) return Rational(m == 0 ? 1 : 0);
  // P(|Geom(2)^n| = s) = C(s-1, n-1) 2^-s.
  Rational below = 0;
  for (unsigned s = n; s < m; ++s) {
    mpz_class ways;
    mpz_bin_uiui(ways.get_mpz_t(), s - 1, n - 1);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, s);
    below += Rational(ways, den);
  }
  below.canonicalize();
  return Rational(1) - below;
}

ValuationTvReport tv_valuation_vs_geom(unsigned n, unsigned m, const EnumerationLimits& limits,
                                       unsigned threads) {
  const auto blocks = enumerate(n, m, limits, threads);
  const unsigned e = m - 1;

  std::map<ValuationTuple, std::uint64_t> in_range;
  std::map<ValuationTuple, std::uint64_t> resolved;
  std::uint64_t escaped = 0;
  for (const auto& b : blocks) {
    for (const auto& [tuple, count] : b.in_range) in_range[ValuationTuple(tuple)] += count;
    for (std::uint64_t r : b.escaped_residues) {
      ++resolved[syracuse_valuation(OddNatural(r), n)];
      ++escaped;
    }
  }

  auto geom_mass = [](const ValuationTuple& a) { return power_of_two_fraction(1, a.size()); };

  ValuationTvReport report;
  report.steps = n;
  report.modulus_exp = m;
  report.escaped_mass_model = power_of_two_fraction(escaped, e);
  report.escaped_mass_geom = geometric_tail(n, m);

  // Tuples with |a| < m that were never attained still carry geometric mass.
  const Rational geom_in_range = Rational(1) - report.escaped_mass_geom;
  Rational covered = 0;
  Rational in_range_sum = 0;
  for (const auto& [a, count] : in_range) {
    const Rational g = geom_mass(a);
    covered += g;
    in_range_sum += abs(power_of_two_fraction(count, e) - g);
  }
  report.in_range_discrepancy = in_range_sum + (geom_in_range - covered);

  Rational tail_covered = 0;
  Rational tail_sum = 0;
  for (const auto& [a, count] : resolved) {
    if (a.size() < m) throw InvariantViolation("escaped residue resolved to |a| < m");
    const Rational g = geom_mass(a);
    tail_covered += g;
    tail_sum += abs(power_of_two_fraction(count, e) - g);
  }
  report.tv = report.in_range_discrepancy + tail_sum + (report.escaped_mass_geom - tail_covered);
  report.tv.canonicalize();
  return report;
}

}  // namespace syrlab
