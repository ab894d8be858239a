#pragma once

// Exact Collatz / Syracuse iteration, 2-adic valuations, the affine maps
// Aff_a(x) = (3x + 1) / 2^a and their compositions, and the offset map
// F_n(a) = sum_m 3^(n-m) 2^-(a_m + ... + a_n) with its reduction mod 3^n.
//
// All orbit arithmetic is arbitrary precision (GMP).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace syrlab {

using Natural = mpz_class;

/// An odd positive integer.
class OddNatural {
 public:
  /// Throws BadParameter unless value is odd and >= 1.
  explicit OddNatural(Natural value);
  explicit OddNatural(std::uint64_t value) : OddNatural(Natural(value)) {}

  const Natural& value() const noexcept { return value_; }
  std::string str() const { return value_.get_str(); }

  friend bool operator==(const OddNatural&, const OddNatural&) = default;

 private:
  Natural value_;
};

/// Element numerator / 2^denom_exp of Z[1/2], always kept canonical: the
/// numerator is odd, or the value is (0, 0).
class DyadicRational {
 public:
  DyadicRational() = default;
  DyadicRational(const mpz_class& numerator, std::uint64_t denom_exp);
  DyadicRational(long value) : DyadicRational(mpz_class(value), 0) {}

  const mpz_class& numerator() const noexcept { return num_; }
  std::uint64_t denom_exp() const noexcept { return exp_; }

  bool is_integer() const noexcept { return exp_ == 0; }
  bool is_odd_integer() const;

  DyadicRational operator+(const DyadicRational& rhs) const;
  DyadicRational operator*(const DyadicRational& rhs) const;
  DyadicRational operator*(const mpz_class& k) const;
  /// Division by 2^k.
  DyadicRational shifted_down(std::uint64_t k) const;

  /// "m/2^a".
  std::string str() const;
  static DyadicRational parse(const std::string& text);

  friend bool operator==(const DyadicRational&, const DyadicRational&) = default;

 private:
  void canonicalize();

  mpz_class num_{0};
  std::uint64_t exp_ = 0;
};

/// (a_1, ..., a_n) with every entry >= 1. Prefix sums are built once at
/// construction so that a_[j,k] is O(1).
class ValuationTuple {
 public:
  ValuationTuple() : prefix_{0} {}
  explicit ValuationTuple(std::vector<std::uint32_t> entries);
  ValuationTuple(std::initializer_list<std::uint32_t> entries)
      : ValuationTuple(std::vector<std::uint32_t>(entries)) {}

  std::size_t length() const noexcept { return entries_.size(); }
  const std::vector<std::uint32_t>& entries() const noexcept { return entries_; }
  std::uint32_t operator[](std::size_t i) const { return entries_[i]; }

  /// |a| = a_1 + ... + a_n.
  std::uint64_t size() const noexcept { return prefix_.back(); }
  /// a_j + ... + a_k with 1-based inclusive bounds; zero when j > k.
  std::uint64_t partial_sum(std::size_t j, std::size_t k) const;

  std::string str() const;

  friend bool operator==(const ValuationTuple& a, const ValuationTuple& b) {
    return a.entries_ == b.entries_;
  }
  friend auto operator<=>(const ValuationTuple& a, const ValuationTuple& b) {
    return a.entries_ <=> b.entries_;
  }

 private:
  std::vector<std::uint32_t> entries_;
  std::vector<std::uint64_t> prefix_;
};

/// An element of Z/3^level Z.
struct Residue3 {
  unsigned level = 0;
  mpz_class value{0};

  friend bool operator==(const Residue3&, const Residue3&) = default;
};

/// 3^n as a big integer.
mpz_class pow3(unsigned n);

// ---------------------------------------------------------------------------
// Collatz map

Natural collatz_step(const Natural& n);

/// Outcome of a capped orbit minimum search. When cap_exceeded is set the
/// value is the running minimum over the elements inspected so far.
struct OrbitMinimum {
  Natural value;
  bool reached_one = false;
  bool cap_exceeded = false;
  std::uint64_t steps = 0;
};

/// min over N, Col(N), ..., Col^cap(N); stops early once 1 is reached.
OrbitMinimum collatz_min(const Natural& n, std::uint64_t cap);

/// min over N, Syr(N), ..., Syr^cap(N); stops early once 1 is reached.
OrbitMinimum syracuse_min(const OddNatural& n, std::uint64_t cap);

/// Largest a with p^a | m. Throws ZeroInput for m == 0 (nu_p(0) = +inf).
std::uint64_t nu(unsigned long p, const mpz_class& m);

// ---------------------------------------------------------------------------
// Syracuse map

OddNatural syracuse_step(const OddNatural& n);
OddNatural syr_iterate(const OddNatural& n, std::uint64_t steps);
ValuationTuple syracuse_valuation(const OddNatural& n, std::size_t length);

/// Aff_{a_n} o ... o Aff_{a_1} applied to x, evaluated step by step.
DyadicRational affine_apply(const ValuationTuple& a, const DyadicRational& x);

/// The offset map F_n(a).
DyadicRational offset(const ValuationTuple& a);

/// Image of x under the ring map Z[1/2] -> Z/3^n Z (1/2 -> (3^n + 1)/2).
Residue3 reduce_mod_3n(const DyadicRational& x, unsigned n);

struct MinIdentity {
  OrbitMinimum collatz;
  OrbitMinimum syracuse;
  bool equal = false;
  bool cap_exceeded() const { return collatz.cap_exceeded || syracuse.cap_exceeded; }
};

/// Col_min(N) against Syr_min(N / 2^nu_2(N)) under the same iteration cap.
/// Throws CapExceeded when either orbit is cut off by the cap.
MinIdentity collatz_syracuse_min_identity(const Natural& n, std::uint64_t cap);

}  // namespace syrlab

template <>
struct std::hash<syrlab::DyadicRational> {
  std::size_t operator()(const syrlab::DyadicRational& x) const noexcept;
};
