#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "syrlab/error.hpp"
#include "syrlab/geometry.hpp"

using namespace syrlab;

namespace {

mpz_class pow3(unsigned n) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 3, n);
  return r;
}

// Signed numerator of theta(j, l) computed with GMP: xi 3^(2j-2) 2^(1-l)
// mod 3^n, moved into (-3^n/2, 3^n/2].
mpz_class theta_oracle(const FreqContext& ctx, std::int64_t j, std::int64_t l) {
  const mpz_class mod = pow3(ctx.n());
  mpz_class two_pow;
  const mpz_class two = 2;
  const mpz_class e = mpz_class(static_cast<long>(1 - l));
  mpz_powm(two_pow.get_mpz_t(), two.get_mpz_t(), e.get_mpz_t(), mod.get_mpz_t());
  mpz_class v = mpz_class(static_cast<long>(ctx.xi())) * two_pow;
  if (2 * j - 2 >= 0) v *= pow3(static_cast<unsigned>(2 * j - 2));
  mpz_mod(v.get_mpz_t(), v.get_mpz_t(), mod.get_mpz_t());
  if (2 * v > mod) v -= mod;
  return v;
}

// f(x, b) as an average over a2 = 1..b-1 of chi(x (2^a2 + 3)), since
// a1 + a2 = b leaves a2 uniform on 1..b-1.
std::complex<double> f_oracle(const FreqContext& ctx, std::int64_t j, std::int64_t l, unsigned b) {
  const mpz_class mod = pow3(ctx.n());
  mpz_class inv;
  const mpz_class two = 2;
  const mpz_class e = mpz_class(static_cast<long>(-l));
  mpz_powm(inv.get_mpz_t(), two.get_mpz_t(), e.get_mpz_t(), mod.get_mpz_t());
  const mpz_class x = inv * pow3(static_cast<unsigned>(2 * j - 2)) % mod;
  std::complex<double> s = 0;
  for (unsigned a2 = 1; a2 < b; ++a2) {
    mpz_class y = x * ((mpz_class(1) << a2) + 3) * mpz_class(static_cast<long>(ctx.xi()));
    mpz_mod(y.get_mpz_t(), y.get_mpz_t(), mod.get_mpz_t());
    const double phase = -2.0 * std::numbers::pi * (mpq_class(y, mod)).get_d();
    s += std::polar(1.0, phase);
  }
  return s / static_cast<double>(b - 1);
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("eps parsing") {
  CHECK(Eps::parse("0.01").num == 1);
  CHECK(Eps::parse("0.01").den == 100);
  CHECK(Eps::parse("1/100").den == 100);
  CHECK(Eps::parse("2/400").den == 200);
  CHECK(Eps::parse("0.005").str() == "1/200");
  CHECK_THROWS_AS(Eps::parse("abc"), BadEps);
  CHECK_THROWS_AS(Eps::parse("0"), BadEps);
  CHECK_THROWS_AS(Eps::parse(""), BadEps);
  CHECK_THROWS_AS(FreqContext(10, 7, Eps::parse("0.02")), BadEps);
}

TEST_CASE("context validation") {
  CHECK_THROWS_AS(FreqContext(0, 1, Eps{}), BadLevel);
  CHECK_THROWS_AS(FreqContext(41, 1, Eps{}), LevelTooLarge);
  CHECK_THROWS_AS(FreqContext(10, 6, Eps{}), BadParameter);
  const FreqContext ctx(40, 7, Eps{});
  CHECK(ctx.strip_width() == 20);
  CHECK(ctx.period() == 2 * (ctx.modulus() / 3));
  CHECK(FreqContext(5, -7, Eps{}).xi_mod() == 243 - 7);
}

TEST_CASE("worked theta values") {
  const FreqContext ctx(2, 1, Eps{});
  CHECK(theta(ctx, 1, 1).value() == mpq_class(1, 9));
  CHECK(theta(ctx, 1, 0).value() == mpq_class(2, 9));
  CHECK(classify(ctx, 1, 1) == Color::White);
  CHECK_THROWS_AS(classify(ctx, 2, 0), OutOfStrip);
  CHECK_THROWS_AS(classify(ctx, 0, 0), OutOfStrip);
  CHECK(is_black(ctx, ThetaValue{0, 2}));
  // 3^4 kills the numerator at j = 3 for n = 4.
  const FreqContext c4(4, 5, Eps{});
  CHECK(theta(c4, 3, 17).numerator == 0);
}

TEST_CASE("theta against GMP, identity and periodicity") {
  for (unsigned n : {5u, 17u, 40u}) {
    const FreqContext ctx(n, n == 17 ? -11 : 7, Eps{});
    Rng rng(Seed{n}, 0);
    for (int i = 0; i < 2000; ++i) {
      const std::int64_t j = 1 + static_cast<std::int64_t>(rng.below(n / 2 + 1));
      const std::int64_t l = static_cast<std::int64_t>(rng.below(4001)) - 2000;
      const auto t = theta(ctx, j, l);
      CHECK(mpz_class(static_cast<long>(t.numerator)) == theta_oracle(ctx, j, l));
      CHECK(t == theta(ctx, j, l + static_cast<std::int64_t>(ctx.period())));
      const std::int64_t js = j + static_cast<std::int64_t>(rng.below(3));
      const std::int64_t ls = l - static_cast<std::int64_t>(rng.below(50));
      CHECK(theta_identity_holds(ctx, j, l, js, ls));
      // The identity as a GMP congruence.
      const mpz_class mod = pow3(n);
      mpz_class lhs = theta_oracle(ctx, j, l) * pow3(static_cast<unsigned>(2 * (js - j)));
      lhs <<= static_cast<unsigned>(l - ls);
      mpz_class diff = lhs - theta_oracle(ctx, js, ls);
      CHECK(mpz_divisible_p(diff.get_mpz_t(), mod.get_mpz_t()) != 0);
    }
  }
}

TEST_CASE("black classification matches exact thresholds") {
  const FreqContext ctx(40, 7, Eps{1, 100});
  Rng rng(Seed{2}, 0);
  const mpz_class mod = pow3(40);
  for (int i = 0; i < 20000; ++i) {
    const std::int64_t j = 1 + static_cast<std::int64_t>(rng.below(20));
    const std::int64_t l = static_cast<std::int64_t>(rng.below(1'000'000));
    const mpz_class num = abs(theta_oracle(ctx, j, l));
    const bool black = num * 100 <= mod;
    CHECK((classify(ctx, j, l) == Color::Black) == black);
  }
}

TEST_CASE("empty and oversized windows") {
  const FreqContext ctx(40, 7, Eps{});
  CHECK_THROWS_AS(decompose_black(ctx, Window{3, 2, 0, 10}), EmptyRange);
  CHECK_THROWS_AS(decompose_black(ctx, Window{1, 21, 0, 10}), OutOfStrip);
  GeometryLimits tiny;
  tiny.max_window_points = 10;
  CHECK_THROWS_AS(decompose_black(ctx, Window{1, 2, 0, 10}, tiny), WindowTooLarge);
  const FreqContext small(6, 1, Eps{});
  CHECK_THROWS_AS(decompose_black(small, Window{1, 1, 0, static_cast<std::int64_t>(small.period())}), WindowTooLarge);
}

TEST_CASE("triangle decomposition against brute force") {
  for (auto [n, xi] : {std::pair{40u, 7L}, std::pair{30u, 1L}, std::pair{24u, -5L}}) {
    const FreqContext ctx(n, xi, Eps{1, 100});
    const Window w{1, ctx.strip_width(), -500, 2000};
    const auto d = decompose_black(ctx, w);
    CAPTURE(n);
    CHECK(d.partition_ok);
    CHECK(d.triangles_black);
    CHECK(d.corners_ok);
    CHECK(d.neighbourhood_white);
    CHECK(d.points_scanned == w.points());
    CHECK(strip_bound_check(ctx, d.black_points));

    std::set<std::pair<std::int64_t, std::int64_t>> brute;
    for (std::int64_t j = w.jmin; j <= w.jmax; ++j) {
      for (std::int64_t l = w.lmin; l <= w.lmax; ++l) {
        if (classify(ctx, j, l) == Color::Black) brute.insert({j, l});
      }
    }
    CHECK(std::set(d.black_points.begin(), d.black_points.end()) == brute);
    for (const auto& [j, l] : brute) {
      int owners = 0;
      for (const auto& t : d.triangles) owners += t.contains(ctx, j, l);
      CHECK(owners == 1);
      const auto corner = black_corner(ctx, j, l);
      CHECK(triangle_at(ctx, corner.first, corner.second).contains(ctx, j, l));
    }
    for (std::size_t a = 0; a < d.triangles.size(); ++a) {
      for (std::size_t b = a + 1; b < d.triangles.size(); ++b) {
        const double dj = static_cast<double>(d.triangles[a].corner_j - d.triangles[b].corner_j);
        const double dl = static_cast<double>(d.triangles[a].corner_l - d.triangles[b].corner_l);
        CHECK(std::hypot(dj, dl) >= d.min_separation - 1e-12);
      }
    }
  }
}

TEST_CASE("exact membership agrees with floating point away from the edge") {
  const FreqContext ctx(40, 7, Eps{1, 100});
  const auto d = decompose_black(ctx, Window{1, 20, 0, 5000});
  REQUIRE_FALSE(d.triangles.empty());
  int compared = 0;
  for (const auto& t : d.triangles) {
    const long double c = std::fabs(static_cast<long double>(t.corner_numerator)) /
                          static_cast<long double>(ctx.modulus());
    CHECK(std::fabs(static_cast<double>(std::log(0.01L / c)) - t.size) < 1e-9);
    for (std::int64_t dj = 0; dj <= 3; ++dj) {
      for (std::int64_t dl = 0; dl <= 12; ++dl) {
        const long double lhs = std::pow(9.0L, dj) * std::pow(2.0L, dl) * c;
        if (std::fabs(lhs / 0.01L - 1) < 1e-12) continue;
        CHECK(t.contains(ctx, t.corner_j + dj, t.corner_l - dl) == (lhs <= 0.01L));
        ++compared;
      }
    }
  }
  CHECK(compared > 0);
}

TEST_CASE("strip bound") {
  const FreqContext ctx(10, 1, Eps{1, 100});
  CHECK_FALSE(strip_bound_check(ctx, {{5, 0}}));
  CHECK(strip_bound_check(ctx, {{1, 0}}));
  CHECK(strip_bound_check(ctx, {}));
}

TEST_CASE("conditional characteristic function") {
  const FreqContext ctx(40, 7, Eps{});
  Rng rng(Seed{6}, 0);
  for (int i = 0; i < 300; ++i) {
    const std::int64_t j = 1 + static_cast<std::int64_t>(rng.below(20));
    const std::int64_t l = static_cast<std::int64_t>(rng.below(2001)) - 1000;
    const double th = theta(ctx, j, l).value().get_d();
    CHECK(std::abs(f_cond(ctx, j, l, 3)) == doctest::Approx(std::cos(std::numbers::pi * th)).epsilon(1e-10));
    CHECK(std::abs(f_cond(ctx, j, l, 2)) == doctest::Approx(1.0).epsilon(1e-12));
    for (unsigned b = 2; b <= 12; ++b) CHECK(std::abs(f_cond(ctx, j, l, b) - f_oracle(ctx, j, l, b)) < 1e-9);
  }
  const FreqContext c4(4, 5, Eps{});
  CHECK(std::abs(f_cond(c4, 3, 5, 3)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(f_cond(ctx, 1, 0, 1), BadParameter);
  CHECK_THROWS_AS(f_cond(ctx, 1, 0, 13), UnsupportedB);
}

TEST_CASE("hold and renewal samples") {
  const auto h = hold_histogram(1'000'000, Seed{1});
  std::uint64_t total = 0;
  double sj = 0, sl = 0;
  for (const auto& [k, c] : h) {
    CHECK(k.first >= 1);
    CHECK(k.second >= 3);
    total += c;
    sj += static_cast<double>(k.first) * static_cast<double>(c);
    sl += static_cast<double>(k.second) * static_cast<double>(c);
  }
  REQUIRE(total == 1'000'000);
  CHECK(std::fabs(sj / 1e6 - 4.0) < 0.05);
  CHECK(std::fabs(sl / 1e6 - 16.0) < 0.2);
  CHECK(std::fabs(static_cast<double>(h.at({1, 3})) / 1e6 - 0.25) < 0.005);

  // The first Hold already has l >= 3 > 0.
  Rng a(Seed{3}, 0), b(Seed{3}, 0);
  for (int i = 0; i < 1000; ++i) CHECK(renewal_first_passage(0, a) == sample_hold(b));
  CHECK_THROWS_AS(renewal_first_passage(-1, a), BadParameter);
  Rng c(Seed{4}, 0);
  for (int i = 0; i < 1000; ++i) CHECK(renewal_first_passage(50, c).l > 50);
  CHECK(hold_histogram(50'000, Seed{2}, 1) == hold_histogram(50'000, Seed{2}, 3));
  CHECK(renewal_histogram(100, 50'000, Seed{2}, 1) == renewal_histogram(100, 50'000, Seed{2}, 4));
}

TEST_CASE("Q estimates") {
  const FreqContext ctx(40, 7, Eps{});
  const auto q = estimate_Q(ctx, 1, 0, 20'000, Seed{5});
  CHECK(q.estimate > 0);
  CHECK(q.estimate <= 1);
  CHECK(q.samples == 20'000);
  CHECK_THROWS_AS(estimate_Q(ctx, 21, 0, 10, Seed{5}), OutOfStrip);
  CHECK(estimate_Q(ctx, 1, 0, 20'000, Seed{5}, 1).estimate == estimate_Q(ctx, 1, 0, 20'000, Seed{5}, 3).estimate);

  // From the last column every Hold leaves the strip at once. There theta is
  // a multiple of 1/9 and never 0, so the start is white.
  REQUIRE(classify(ctx, 20, 0) == Color::White);
  const auto last = estimate_Q(ctx, 20, 0, 1000, Seed{5});
  CHECK(last.estimate == std::exp(-1e-6));
  CHECK(last.stderr_ == 0);

  const auto w = white_hit_bound(ctx, 20'000, Seed{5});
  CHECK(w.estimate > 0);
  CHECK(w.estimate <= 1);
}

TEST_CASE("standard error shrinks like 1/sqrt(N)") {
  const FreqContext ctx(40, 7, Eps{});
  const auto a = estimate_Q(ctx, 1, 0, 40'000, Seed{8});
  const auto b = estimate_Q(ctx, 1, 0, 80'000, Seed{8});
  REQUIRE(a.stderr_ > 0);
  const double ratio = b.stderr_ / a.stderr_;
  CAPTURE(ratio);
  CHECK(std::fabs(ratio * std::numbers::sqrt2 - 1) < 0.2);
}

TEST_CASE("walk traces") {
  const FreqContext ctx(40, 7, Eps{});
  Rng rng(Seed{9}, 0);
  for (int i = 0; i < 200; ++i) {
    const auto t = trace_walk(ctx, {1, 0}, 100, rng);
    REQUIRE(t.visited.size() == t.increments.size() + 1);
    CHECK(t.visited[0].at == LatticeStep{1, 0});
    for (std::size_t k = 0; k < t.increments.size(); ++k) {
      const auto& inc = t.increments[k];
      CHECK(inc.j >= 1);
      CHECK(inc.l >= 3);
      const auto& p = t.visited[k].at;
      CHECK(t.visited[k + 1].at == LatticeStep{p.j + inc.j, p.l + inc.l});
    }
    for (const auto& p : t.visited) {
      CHECK(p.color.has_value() == ctx.in_strip(p.at.j));
      if (p.color && *p.color == Color::Black) {
        REQUIRE(p.triangle.has_value());
        CHECK(*p.triangle == black_corner(ctx, p.at.j, p.at.l));
      } else {
        CHECK_FALSE(p.triangle.has_value());
      }
    }
    // Stops on leaving the strip.
    for (std::size_t k = 0; k + 1 < t.visited.size(); ++k) CHECK(ctx.in_strip(t.visited[k].at.j));
  }
}

}  // TEST_SUITE
