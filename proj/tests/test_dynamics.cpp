#include <doctest.h>

#include <unordered_map>

#include "syrlab/dynamics.hpp"
#include "syrlab/error.hpp"
#include "syrlab/rng.hpp"

using namespace syrlab;

namespace {

mpz_class random_bits(Rng& rng, unsigned words) {
  mpz_class v = 0;
  for (unsigned i = 0; i < words; ++i) {
    v <<= 64;
    v += mpz_class(static_cast<unsigned long>(rng.next_u64()));
  }
  return v;
}

OddNatural random_odd(Rng& rng, unsigned words) {
  mpz_class v = random_bits(rng, words);
  mpz_setbit(v.get_mpz_t(), 0);
  return OddNatural(v);
}

ValuationTuple random_tuple(Rng& rng, std::size_t n, std::uint32_t max_entry) {
  std::vector<std::uint32_t> e(n);
  for (auto& x : e) x = static_cast<std::uint32_t>(1 + rng.below(max_entry));
  return ValuationTuple(e);
}

// 3^n 2^-|a| x + F_n(a), the closed form of the composed affine map.
DyadicRational affine_closed_form(const ValuationTuple& a, const DyadicRational& x) {
  return (x * pow3(static_cast<unsigned>(a.length()))).shifted_down(a.size()) + offset(a);
}

// Residue of F_n(a) mod 3^k straight from the sum, with 1/2 -> (3^k + 1)/2.
mpz_class offset_residue_oracle(const ValuationTuple& a, unsigned k) {
  const mpz_class mod = pow3(k);
  if (k == 0) return 0;
  const mpz_class inv2 = (mod + 1) / 2;
  const std::size_t n = a.length();
  mpz_class sum = 0;
  for (std::size_t m = 1; m <= n; ++m) {
    mpz_class p;
    mpz_class e(static_cast<unsigned long>(a.partial_sum(m, n)));
    mpz_powm(p.get_mpz_t(), inv2.get_mpz_t(), e.get_mpz_t(), mod.get_mpz_t());
    sum += pow3(static_cast<unsigned>(n - m)) * p;
  }
  mpz_class r;
  mpz_mod(r.get_mpz_t(), sum.get_mpz_t(), mod.get_mpz_t());
  return r;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("collatz and syracuse steps") {
  CHECK(collatz_step(3) == 10);
  CHECK(collatz_step(10) == 5);
  CHECK_THROWS_AS(collatz_step(0), BadParameter);
  CHECK(syracuse_step(OddNatural(std::uint64_t{3})).value() == 5);
  CHECK(syracuse_step(OddNatural(std::uint64_t{5})).value() == 1);
  CHECK(syracuse_step(OddNatural(std::uint64_t{7})).value() == 11);
  CHECK(syr_iterate(OddNatural(std::uint64_t{3}), 2).value() == 1);
  CHECK(syr_iterate(OddNatural(std::uint64_t{1}), 5).value() == 1);
  CHECK(syr_iterate(OddNatural(std::uint64_t{27}), 0).value() == 27);
  CHECK_THROWS_AS(OddNatural(std::uint64_t{4}), BadParameter);
  CHECK_THROWS_AS(OddNatural(std::uint64_t{0}), BadParameter);
}

TEST_CASE("p-adic valuation") {
  CHECK(nu(2, 12) == 2);
  CHECK(nu(3, 18) == 2);
  CHECK(nu(2, 7) == 0);
  CHECK(nu(3, mpz_class(-81)) == 4);
  CHECK_THROWS_AS(nu(2, 0), ZeroInput);
}

TEST_CASE("dyadic rationals are canonical") {
  CHECK(DyadicRational(6, 2) == DyadicRational(3, 1));
  CHECK(DyadicRational(0, 9) == DyadicRational(0, 0));
  CHECK(DyadicRational(5, 5).str() == "5/2^5");
  CHECK(DyadicRational::parse("5/2^5") == DyadicRational(5, 5));
  CHECK(DyadicRational::parse("12") == DyadicRational(12, 0));
  CHECK(DyadicRational::parse(DyadicRational(-7, 3).str()) == DyadicRational(-7, 3));
  CHECK_THROWS_AS(DyadicRational::parse("x/2^1"), BadParameter);
  CHECK((DyadicRational(1, 1) + DyadicRational(1, 1)) == DyadicRational(1));
  CHECK(DyadicRational(3, 0).is_odd_integer());
  CHECK_FALSE(DyadicRational(3, 1).is_odd_integer());
}

TEST_CASE("valuation tuple prefix sums") {
  const ValuationTuple a{1, 4, 2};
  CHECK(a.size() == 7);
  CHECK(a.partial_sum(1, 3) == 7);
  CHECK(a.partial_sum(2, 3) == 6);
  CHECK(a.partial_sum(2, 2) == 4);
  CHECK(a.partial_sum(3, 2) == 0);
  CHECK(a.str() == "(1,4,2)");
  CHECK(ValuationTuple{}.size() == 0);
}

TEST_CASE("offset examples") {
  CHECK(offset(ValuationTuple{1}) == DyadicRational(1, 1));
  CHECK(offset(ValuationTuple{1, 4}) == DyadicRational(5, 5));
  CHECK(offset(ValuationTuple{}) == DyadicRational(0));
}

TEST_CASE("reduction to Z/3^n") {
  CHECK(reduce_mod_3n(DyadicRational(5, 5), 2).value == 1);
  CHECK(reduce_mod_3n(DyadicRational(7), 2).value == 7);
  CHECK(reduce_mod_3n(DyadicRational(5, 5), 0).value == 0);
  CHECK(reduce_mod_3n(DyadicRational(1, 1), 1).value == 2);
}

TEST_CASE("orbit minimum identity") {
  const auto r12 = collatz_syracuse_min_identity(12, 100);
  CHECK(r12.collatz.value == 1);
  CHECK(r12.syracuse.value == 1);
  CHECK(r12.equal);
  CHECK(collatz_syracuse_min_identity(1, 10).equal);
  CHECK(collatz_syracuse_min_identity(7, 100).equal);
  CHECK_THROWS_AS(collatz_syracuse_min_identity(27, 10), CapExceeded);
  for (unsigned long n = 1; n < 2000; ++n) CHECK(collatz_syracuse_min_identity(n, 10000).equal);
}

TEST_CASE("valuation uniqueness under perturbation") {
  Rng rng(Seed{1}, 1);
  for (int trial = 0; trial < 300; ++trial) {
    const OddNatural n = random_odd(rng, 2);
    const std::size_t len = rng.below(31);
    const ValuationTuple a = syracuse_valuation(n, len);
    const DyadicRational x(n.value(), 0);
    const DyadicRational image = affine_apply(a, x);
    REQUIRE(image.is_odd_integer());
    CHECK(image.numerator() == syr_iterate(n, len).value());
    for (std::size_t i = 0; i < len; ++i) {
      for (int delta : {-1, 1}) {
        auto e = a.entries();
        if (delta < 0 && e[i] == 1) continue;
        e[i] = static_cast<std::uint32_t>(static_cast<int>(e[i]) + delta);
        CHECK_FALSE(affine_apply(ValuationTuple(e), x).is_odd_integer());
      }
    }
  }
}

TEST_CASE("affine map matches its closed form") {
  Rng rng(Seed{1}, 2);
  for (int trial = 0; trial < 500; ++trial) {
    const ValuationTuple a = random_tuple(rng, rng.below(15), 12);
    const DyadicRational x(random_bits(rng, 1) - mpz_class(static_cast<unsigned long>(rng.next_u64())),
                           rng.below(20));
    CHECK(affine_apply(a, x) == affine_closed_form(a, x));
  }
}

TEST_CASE("offset injectivity on random samples") {
  Rng rng(Seed{1}, 3);
  std::vector<std::unordered_map<DyadicRational, ValuationTuple>> seen(9);
  std::uint64_t collisions = 0;
  for (int i = 0; i < 40000; ++i) {
    const std::size_t n = 1 + rng.below(8);
    const ValuationTuple a = random_tuple(rng, n, 6);
    const auto [it, fresh] = seen[n].emplace(offset(a), a);
    if (!fresh && !(it->second == a)) ++collisions;
  }
  CHECK(collisions == 0);
  // Equal offsets do occur across lengths: F_3(1,1,26) = F_2(4,24).
  CHECK(offset(ValuationTuple{1, 1, 26}) == offset(ValuationTuple{4, 24}));
}

TEST_CASE("reduction compatibility and orbit congruence") {
  Rng rng(Seed{1}, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const OddNatural n = random_odd(rng, 2);
    const unsigned len = static_cast<unsigned>(rng.below(16));
    const ValuationTuple a = syracuse_valuation(n, len);
    const DyadicRational f = offset(a);
    const Residue3 full = reduce_mod_3n(f, len);
    CHECK(full.value == offset_residue_oracle(a, len));
    const mpz_class iterate = syr_iterate(n, len).value();
    for (unsigned k = 0; k <= len; ++k) {
      const mpz_class mod = pow3(k);
      mpz_class folded, target;
      mpz_mod(folded.get_mpz_t(), full.value.get_mpz_t(), mod.get_mpz_t());
      mpz_mod(target.get_mpz_t(), iterate.get_mpz_t(), mod.get_mpz_t());
      CHECK(reduce_mod_3n(f, k).value == folded);
      CHECK(reduce_mod_3n(f, k).value == target);
    }
  }
}

TEST_CASE("offset bound") {
  Rng rng(Seed{1}, 5);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const ValuationTuple a = random_tuple(rng, n, 30);
    const DyadicRational f = offset(a);
    // 0 <= F <= 3^n 2^-a_n, compared over the common denominator 2^|a|.
    CHECK(f.numerator() >= 0);
    mpz_class lhs = f.numerator();
    mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), a.size() - f.denom_exp());
    mpz_class rhs = pow3(static_cast<unsigned>(n));
    mpz_mul_2exp(rhs.get_mpz_t(), rhs.get_mpz_t(), a.size() - a[n - 1]);
    CHECK(lhs <= rhs);
  }
}

}  // TEST_SUITE
