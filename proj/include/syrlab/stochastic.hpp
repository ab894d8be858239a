#pragma once

// Samplers for Geom(mu) and Pascal variables, the weight G_n, total variation
// (unnormalised: d_TV(P, Q) = sum_r |P(r) - Q(r)|, so disjoint laws are at
// distance 2), and the exact residue-class enumeration of Syracuse
// valuations modulo 2^m.

#include <cstdint>
#include <map>
#include <span>

#include <gmpxx.h>

#include "syrlab/dynamics.hpp"
#include "syrlab/error.hpp"
#include "syrlab/rng.hpp"

namespace syrlab {

using Rational = mpq_class;

/// Geom(mu): P(a) = (1/mu) ((mu - 1)/mu)^(a-1) on a >= 1, by inverse CDF.
std::uint64_t sample_geom(double mu, Rng& rng);
/// Pascal: P(b) = (b - 1) / 2^b on b >= 2, as a sum of two Geom(2) draws.
std::uint64_t sample_pascal(Rng& rng);

/// Exact point probabilities, used as oracles for the samplers.
double geom_pmf(double mu, std::uint64_t a);
Rational pascal_pmf(std::uint64_t b);

/// G_n(x) = exp(-|x|^2 / n) + exp(-|x|), with the first term 0 when n = 0.
double g_weight(std::uint64_t n, std::span<const double> x);

double tv_distance(std::span<const double> p, std::span<const double> q);
Rational tv_distance(std::span<const Rational> p, std::span<const Rational> q);

/// sup_E |P(E) - Q(E)| over all events, which is the positive part of P - Q.
double sup_event_distance(std::span<const double> p, std::span<const double> q);

/// Outcome counts. Merging adds counts, so the result of a parallel run does
/// not depend on merge order.
template <class Key>
struct EmpiricalDist {
  std::map<Key, std::uint64_t> counts;
  std::uint64_t total = 0;

  void add(const Key& key, std::uint64_t n = 1) {
    counts[key] += n;
    total += n;
  }
  void merge(const EmpiricalDist& other) {
    for (const auto& [k, c] : other.counts) counts[k] += c;
    total += other.total;
  }
  double probability(const Key& key) const {
    const auto it = counts.find(key);
    return it == counts.end() || total == 0 ? 0.0
                                            : static_cast<double>(it->second) / static_cast<double>(total);
  }
  friend bool operator==(const EmpiricalDist&, const EmpiricalDist&) = default;
};

/// Exact d_TV between two empirical laws over the union of their supports.
/// Two empty laws are at distance 0; an empty and a non-empty law throw SpaceMismatch.
template <class Key>
Rational tv_distance(const EmpiricalDist<Key>& p, const EmpiricalDist<Key>& q) {
  if (p.total == 0 && q.total == 0) return Rational(0);
  if (p.total == 0 || q.total == 0) throw SpaceMismatch("empirical law with no samples");
  const mpz_class tp(static_cast<unsigned long>(p.total));
  const mpz_class tq(static_cast<unsigned long>(q.total));
  mpz_class sum = 0;
  auto term = [&](std::uint64_t cp, std::uint64_t cq) {
    mpz_class d = mpz_class(static_cast<unsigned long>(cp)) * tq -
                  mpz_class(static_cast<unsigned long>(cq)) * tp;
    sum += abs(d);
  };
  auto ip = p.counts.begin();
  auto iq = q.counts.begin();
  while (ip != p.counts.end() || iq != q.counts.end()) {
    if (iq == q.counts.end() || (ip != p.counts.end() && ip->first < iq->first)) {
      term(ip->second, 0);
      ++ip;
    } else if (ip == p.counts.end() || iq->first < ip->first) {
      term(0, iq->second);
      ++iq;
    } else {
      term(ip->second, iq->second);
      ++ip;
      ++iq;
    }
  }
  Rational r(sum, tp * tq);
  r.canonicalize();
  return r;
}

/// Law of the n-Syracuse valuation of a uniformly random odd residue mod 2^m.
/// Residues whose running valuation sum reaches m are not determined by the
/// residue and are lumped into `escaped`.
struct TailMass {
  unsigned steps = 0;
  unsigned modulus_exp = 0;
  std::map<ValuationTuple, std::uint64_t> in_range;  // residue counts, |a| < m
  std::uint64_t escaped = 0;                         // residue count
  std::uint64_t residues = 0;                        // 2^(m-1)

  Rational probability(const ValuationTuple& a) const;
  Rational escaped_mass() const;
  Rational in_range_mass() const;
};

struct EnumerationLimits {
  unsigned max_modulus_exp = 24;
};

TailMass exact_valuation_distribution(unsigned n, unsigned m, const EnumerationLimits& limits = {},
                                      unsigned threads = 1);

/// P(|Geom(2)^n| >= m), exactly.
Rational geometric_tail(unsigned n, unsigned m);

struct ValuationTvReport {
  unsigned steps = 0;
  unsigned modulus_exp = 0;
  Rational tv;                  // d_TV(a^(n)(N), Geom(2)^n)
  Rational in_range_discrepancy;
  Rational escaped_mass_model;  // residues with |a| >= m
  Rational escaped_mass_geom;   // P(|Geom(2)^n| >= m)
};

/// d_TV between the valuation law of N uniform over the odd integers in
/// [1, 2^m) and Geom(2)^n. Tuples with |a| < m come from the residue
/// enumeration; escaped residues are resolved by iterating N itself.
ValuationTvReport tv_valuation_vs_geom(unsigned n, unsigned m, const EnumerationLimits& limits = {},
                                       unsigned threads = 1);

}  // namespace syrlab
