#include "syrlab/dynamics.hpp"

#include <sstream>

#include "syrlab/error.hpp"

namespace syrlab {

OddNatural::OddNatural(Natural value) : value_(std::move(value)) {
  if (value_ < 1 || mpz_even_p(value_.get_mpz_t())) {
    throw BadParameter("expected an odd positive integer, got " + value_.get_str());
  }
}

// --- DyadicRational --------------------------------------------------------

DyadicRational::DyadicRational(const mpz_class& numerator, std::uint64_t denom_exp)
    : num_(numerator), exp_(denom_exp) {
  canonicalize();
}

void DyadicRational::canonicalize() {
  if (num_ == 0) {
    exp_ = 0;
    return;
  }
  if (exp_ == 0) return;
  const std::uint64_t twos = mpz_scan1(num_.get_mpz_t(), 0);
  const std::uint64_t k = twos < exp_ ? twos : exp_;
  if (k > 0) {
    mpz_fdiv_q_2exp(num_.get_mpz_t(), num_.get_mpz_t(), k);
    exp_ -= k;
  }
}

bool DyadicRational::is_odd_integer() const {
  return exp_ == 0 && mpz_odd_p(num_.get_mpz_t());
}

DyadicRational DyadicRational::operator+(const DyadicRational& rhs) const {
  mpz_class a = num_;
  mpz_class b = rhs.num_;
  const std::uint64_t e = exp_ > rhs.exp_ ? exp_ : rhs.exp_;
  mpz_mul_2exp(a.get_mpz_t(), a.get_mpz_t(), e - exp_);
  mpz_mul_2exp(b.get_mpz_t(), b.get_mpz_t(), e - rhs.exp_);
  return DyadicRational(a + b, e);
}

DyadicRational DyadicRational::operator*(const DyadicRational& rhs) const {
  return DyadicRational(num_ * rhs.num_, exp_ + rhs.exp_);
}

DyadicRational DyadicRational::operator*(const mpz_class& k) const {
  return DyadicRational(num_ * k, exp_);
}

DyadicRational DyadicRational::shifted_down(std::uint64_t k) const {
  return DyadicRational(num_, exp_ + k);
}

std::string DyadicRational::str() const {
  return num_.get_str() + "/2^" + std::to_string(exp_);
}

DyadicRational DyadicRational::parse(const std::string& text) {
  const auto slash = text.find("/2^");
  try {
    if (slash == std::string::npos) return DyadicRational(mpz_class(text), 0);
    return DyadicRational(mpz_class(text.substr(0, slash)),
                          std::stoull(text.substr(slash + 3)));
  } catch (const std::exception&) {
    throw BadParameter("not a dyadic rational: '" + text + "'");
  }
}

// --- ValuationTuple --------------------------------------------------------

ValuationTuple::ValuationTuple(std::vector<std::uint32_t> entries)
    : entries_(std::move(entries)) {
  prefix_.reserve(entries_.size() + 1);
  prefix_.push_back(0);
  for (auto a : entries_) {
    if (a == 0) throw BadParameter("valuation tuple entries must be >= 1");
    prefix_.push_back(prefix_.back() + a);
  }
}

std::uint64_t ValuationTuple::partial_sum(std::size_t j, std::size_t k) const {
  if (j > k) return 0;
  if (j < 1 || k > entries_.size()) throw BadParameter("partial_sum index out of range");
  return prefix_[k] - prefix_[j - 1];
}

std::string ValuationTuple::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) os << ',';
    os << entries_[i];
  }
  os << ')';
  return os.str();
}

mpz_class pow3(unsigned n) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 3, n);
  return r;
}

// --- Collatz ---------------------------------------------------------------

Natural collatz_step(const Natural& n) {
  if (n < 1) throw BadParameter("collatz_step needs N >= 1");
  if (mpz_odd_p(n.get_mpz_t())) return 3 * n + 1;
  Natural half;
  mpz_fdiv_q_2exp(half.get_mpz_t(), n.get_mpz_t(), 1);
  return half;
}

OrbitMinimum collatz_min(const Natural& n, std::uint64_t cap) {
  if (n < 1) throw BadParameter("collatz_min needs N >= 1");
  OrbitMinimum out{n, n == 1, false, 0};
  Natural cur = n;
  while (!out.reached_one) {
    if (out.steps == cap) {
      out.cap_exceeded = true;
      break;
    }
    cur = collatz_step(cur);
    ++out.steps;
    if (cur < out.value) out.value = cur;
    out.reached_one = cur == 1;
  }
  return out;
}

OrbitMinimum syracuse_min(const OddNatural& n, std::uint64_t cap) {
  OrbitMinimum out{n.value(), n.value() == 1, false, 0};
  OddNatural cur = n;
  while (!out.reached_one) {
    if (out.steps == cap) {
      out.cap_exceeded = true;
      break;
    }
    cur = syracuse_step(cur);
    ++out.steps;
    if (cur.value() < out.value) out.value = cur.value();
    out.reached_one = cur.value() == 1;
  }
  return out;
}

std::uint64_t nu(unsigned long p, const mpz_class& m) {
  if (p < 2) throw BadParameter("nu needs a prime p >= 2");
  if (m == 0) throw ZeroInput("nu_p(0) is +infinity");
  if (p == 2) return mpz_scan1(m.get_mpz_t(), 0);
  mpz_class rest;
  mpz_class prime(p);
  return mpz_remove(rest.get_mpz_t(), m.get_mpz_t(), prime.get_mpz_t());
}

// --- Syracuse --------------------------------------------------------------

namespace {

// Largest odd divisor of 3N + 1 and the number of halvings it took.
std::uint64_t syracuse_in_place(mpz_class& n) {
  n = 3 * n + 1;
  const std::uint64_t a = mpz_scan1(n.get_mpz_t(), 0);
  mpz_fdiv_q_2exp(n.get_mpz_t(), n.get_mpz_t(), a);
  return a;
}

}  // namespace

OddNatural syracuse_step(const OddNatural& n) {
  mpz_class v = n.value();
  syracuse_in_place(v);
  return OddNatural(std::move(v));
}

OddNatural syr_iterate(const OddNatural& n, std::uint64_t steps) {
  mpz_class v = n.value();
  for (std::uint64_t i = 0; i < steps; ++i) syracuse_in_place(v);
  return OddNatural(std::move(v));
}

ValuationTuple syracuse_valuation(const OddNatural& n, std::size_t length) {
  std::vector<std::uint32_t> a;
  a.reserve(length);
  mpz_class v = n.value();
  for (std::size_t i = 0; i < length; ++i) {
    a.push_back(static_cast<std::uint32_t>(syracuse_in_place(v)));
  }
  return ValuationTuple(std::move(a));
}

DyadicRational affine_apply(const ValuationTuple& a, const DyadicRational& x) {
  DyadicRational cur = x;
  for (auto ai : a.entries()) {
    cur = (cur * mpz_class(3) + DyadicRational(1)).shifted_down(ai);
  }
  return cur;
}

DyadicRational offset(const ValuationTuple& a) {
  // Over the common denominator 2^|a|:
  //   F_n(a) = sum_m 3^(n-m) 2^(a_1 + ... + a_{m-1}) / 2^|a|.
  const std::size_t n = a.length();
  mpz_class sum = 0;
  for (std::size_t m = 1; m <= n; ++m) {
    mpz_class term = pow3(static_cast<unsigned>(n - m));
    mpz_mul_2exp(term.get_mpz_t(), term.get_mpz_t(), a.partial_sum(1, m - 1));
    sum += term;
  }
  return DyadicRational(sum, a.size());
}

Residue3 reduce_mod_3n(const DyadicRational& x, unsigned n) {
  Residue3 r{n, 0};
  if (n == 0) return r;
  const mpz_class mod = pow3(n);
  mpz_class inv2 = (mod + 1) / 2;
  mpz_class scale;
  mpz_class e(static_cast<unsigned long>(x.denom_exp()));
  mpz_powm(scale.get_mpz_t(), inv2.get_mpz_t(), e.get_mpz_t(), mod.get_mpz_t());
  mpz_class v = x.numerator() * scale;
  mpz_mod(r.value.get_mpz_t(), v.get_mpz_t(), mod.get_mpz_t());
  return r;
}

MinIdentity collatz_syracuse_min_identity(const Natural& n, std::uint64_t cap) {
  if (n < 1) throw BadParameter("identity needs N >= 1");
  MinIdentity out;
  out.collatz = collatz_min(n, cap);
  Natural odd_part;
  mpz_fdiv_q_2exp(odd_part.get_mpz_t(), n.get_mpz_t(), nu(2, n));
  out.syracuse = syracuse_min(OddNatural(odd_part), cap);
  if (out.cap_exceeded()) {
    throw CapExceeded("orbit of " + n.get_str() + " did not reach 1 within " + std::to_string(cap) + " steps");
  }
  out.equal = out.collatz.value == out.syracuse.value;
  return out;
}

}  // namespace syrlab

std::size_t std::hash<syrlab::DyadicRational>::operator()(
    const syrlab::DyadicRational& x) const noexcept {
  const mpz_srcptr z = x.numerator().get_mpz_t();
  std::size_t h = std::hash<std::uint64_t>{}(x.denom_exp());
  const std::size_t limbs = mpz_size(z);
  for (std::size_t i = 0; i < limbs; ++i) {
    h ^= std::hash<mp_limb_t>{}(mpz_getlimbn(z, i)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h ^ static_cast<std::size_t>(mpz_sgn(z) < 0);
}
