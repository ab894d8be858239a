#include "syrlab/selftest.hpp"

#include <cmath>
#include <functional>
#include <unordered_map>

#include "syrlab/dist3adic.hpp"
#include "syrlab/dynamics.hpp"
#include "syrlab/error.hpp"
#include "syrlab/geometry.hpp"
#include "syrlab/rng.hpp"
#include "syrlab/stochastic.hpp"

namespace syrlab {

bool SelftestReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::vector<std::string> SelftestReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.passed) out.push_back(c.name);
  }
  return out;
}

namespace {

std::vector<Rational> table(std::initializer_list<const char*> values) {
  std::vector<Rational> out;
  for (const char* v : values) out.emplace_back(v);
  for (auto& q : out) q.canonicalize();
  return out;
}

class Runner {
 public:
  explicit Runner(SelftestReport& report) : report_(report) {}

  // body returns an empty string on success, otherwise what went wrong.
  void check(const std::string& name, const std::function<std::string()>& body) {
    SelftestCheck c{name, false, ""};
    try {
      c.detail = body();
      c.passed = c.detail.empty();
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    report_.checks.push_back(std::move(c));
  }

 private:
  SelftestReport& report_;
};

mpz_class random_below_pow10(Rng& rng, unsigned digits) {
  mpz_class bound;
  mpz_ui_pow_ui(bound.get_mpz_t(), 10, digits);
  mpz_class v = 0;
  for (int i = 0; i < 2; ++i) {
    v <<= 64;
    v += mpz_class(static_cast<unsigned long>(rng.next_u64()));
  }
  return v % bound;
}

}  // namespace

SelftestReport run_selftest(const SelftestOptions& options) {
  SelftestReport report;
  Runner run(report);
  const unsigned threads = options.threads;

  run.check("orbit.example", [] {
    OddNatural n(std::uint64_t{3});
    const auto a = syracuse_step(n);
    const auto b = syracuse_step(a);
    return a.value() == 5 && b.value() == 1 ? "" : "Syr(3), Syr^2(3) != 5, 1";
  });

  std::vector<Dist3Adic> levels = syracuse_dist_exact_levels(7, {}, threads);
  if (options.corrupt_dist) {
    auto& p = levels[2].probs;
    const Rational moved(1, 63);
    p[1] -= moved;
    p[0] += moved;
  }

  run.check("dist.table_n1", [&] {
    return levels[1].probs == table({"0", "1/3", "2/3"}) ? "" : "level 1 table differs";
  });
  run.check("dist.table_n2", [&] {
    const auto expected = table({"0", "8/63", "16/63", "0", "11/63", "4/63", "0", "2/63", "22/63"});
    return levels[2].probs == expected ? "" : "level 2 table differs";
  });
  run.check("dist.total_mass", [&]() -> std::string {
    for (const auto& d : levels) {
      if (d.total() != 1) return "level " + std::to_string(d.level) + " total " + d.total().get_str();
    }
    return "";
  });
  run.check("dist.support_units", [&]() -> std::string {
    for (const auto& d : levels) {
      if (d.level == 0) continue;
      for (std::size_t y = 0; y < d.probs.size(); y += 3) {
        if (d.probs[y] != 0) {
          return "level " + std::to_string(d.level) + " puts mass on residue " + std::to_string(y);
        }
      }
    }
    return "";
  });
  run.check("dist.projection", [&]() -> std::string {
    for (unsigned n = 0; n < levels.size(); ++n) {
      for (unsigned k = 0; k <= n; ++k) {
        if (!(project(levels[n], k) == levels[k])) {
          return "project(dist(" + std::to_string(n) + "), " + std::to_string(k) + ") != dist(" +
                 std::to_string(k) + ")";
        }
      }
    }
    return "";
  });

  run.check("osc.diagonal_zero", [&]() -> std::string {
    for (const auto& d : levels) {
      if (oscillation(d, d.level) != 0) return "Osc_{n,n} != 0 at n = " + std::to_string(d.level);
    }
    return "";
  });
  run.check("osc.level2_direct", [&]() -> std::string {
    // Direct evaluation on the literal level-2 table.
    const auto c = table({"0", "8/63", "16/63", "0", "11/63", "4/63", "0", "2/63", "22/63"});
    Rational direct = 0;
    for (int y = 0; y < 9; ++y) {
      Rational fiber = 0;
      for (int y2 = y % 3; y2 < 9; y2 += 3) fiber += c[y2];
      direct += abs(c[y] - fiber / 3);
    }
    const Rational got = oscillation(levels[2], 1);
    return got == direct ? "" : "Osc_{1,2} = " + got.get_str() + ", direct " + direct.get_str();
  });

  run.check("char.level1_magnitude", [&]() -> std::string {
    const double mag = std::abs(char_sum(levels[1], 1));
    return std::fabs(mag - 1.0 / std::sqrt(3.0)) <= 1e-12 ? "" : "|char(1,1)| off by more than 1e-12";
  });
  run.check("char.zero_frequency", [&]() -> std::string {
    for (const auto& d : levels) {
      if (char_sum(d, 0) != ComplexValue(1.0, 0.0)) return "char(n, 0) != 1 at n = " + std::to_string(d.level);
    }
    return "";
  });
  run.check("charosc.levels_1_to_6", [&]() -> std::string {
    for (unsigned n = 1; n <= 6; ++n) {
      const auto r = char_osc_inequality_check(n);
      if (!r.holds) return "bound fails at n = " + std::to_string(n);
    }
    return "";
  });

  run.check("valuation.residue_counts", [&]() -> std::string {
    const unsigned m = 14;
    const auto tail = exact_valuation_distribution(4, m, {}, threads);
    std::uint64_t seen = 0;
    for (const auto& [a, count] : tail.in_range) {
      if (a.size() > m - 2) continue;
      if (count != (std::uint64_t{1} << (m - 1 - a.size()))) return "tuple " + a.str() + " has wrong count";
      ++seen;
    }
    // Number of 4-tuples of positive integers with |a| <= 12 is C(12, 4).
    return seen == 495 ? "" : "only " + std::to_string(seen) + " tuples with |a| <= 12";
  });
  run.check("valuation.tv_monotone", [&]() -> std::string {
    const auto coarse = tv_valuation_vs_geom(4, 10, {}, threads);
    const auto fine = tv_valuation_vs_geom(4, 20, {}, threads);
    return fine.tv < coarse.tv ? "" : "tv(4,20) = " + fine.tv.get_str() + " >= tv(4,10)";
  });

  run.check("offset.injectivity", []() -> std::string {
    // Offsets are injective for each fixed length; pairs share n.
    Rng rng(Seed{20240601}, 9);
    std::vector<std::unordered_map<DyadicRational, ValuationTuple>> seen(13);
    for (int i = 0; i < 100000; ++i) {
      const std::size_t n = 1 + rng.below(12);
      for (int side = 0; side < 2; ++side) {
        std::vector<std::uint32_t> e(n);
        for (auto& x : e) x = static_cast<std::uint32_t>(1 + rng.below(30));
        const ValuationTuple a(e);
        const auto [it, fresh] = seen[n].emplace(offset(a), a);
        if (!fresh && !(it->second == a)) return "offset collision between " + a.str() + " and " + it->second.str();
      }
    }
    return "";
  });
  run.check("orbit.affine_identity", []() -> std::string {
    Rng rng(Seed{20240601}, 10);
    for (int i = 0; i < 10000; ++i) {
      mpz_class v = random_below_pow10(rng, 30);
      if (mpz_even_p(v.get_mpz_t())) v += 1;
      const OddNatural n(v);
      const auto a = syracuse_valuation(n, 20);
      const DyadicRational image = affine_apply(a, DyadicRational(v, 0));
      if (!image.is_odd_integer() || image.numerator() != syr_iterate(n, 20).value()) {
        return "identity fails at N = " + v.get_str();
      }
    }
    return "";
  });

  const FreqContext ctx(40, 7, Eps{1, 100});
  run.check("geometry.triangle_partition", [&]() -> std::string {
    const auto d = decompose_black(ctx, Window{1, 20, 0, 300});
    if (!d.partition_ok) return "black points not partitioned by the triangles";
    if (!d.triangles_black) return "a triangle point in the window is white";
    if (!d.corners_ok) return "a corner is not maximal";
    if (!strip_bound_check(ctx, d.black_points)) return "a black point violates 3^(n+1-2j) eps >= 1/3";
    return "";
  });
  run.check("geometry.theta_identity", [&]() -> std::string {
    Rng rng(Seed{20240601}, 13);
    for (int i = 0; i < 10000; ++i) {
      const std::int64_t j = 1 + static_cast<std::int64_t>(rng.below(20));
      const std::int64_t js = j + static_cast<std::int64_t>(rng.below(21 - static_cast<std::uint64_t>(j)));
      const std::int64_t ls = static_cast<std::int64_t>(rng.below(601)) - 300;
      const std::int64_t l = ls + static_cast<std::int64_t>(rng.below(301));
      if (!theta_identity_holds(ctx, j, l, js, ls)) return "identity fails";
    }
    return "";
  });
  run.check("geometry.white_cancellation", [&]() -> std::string {
    Rng rng(Seed{20240601}, 14);
    const double bound = std::exp(-1e-6);
    for (int i = 0; i < 1000; ++i) {
      const std::int64_t j = 1 + static_cast<std::int64_t>(rng.below(20));
      const std::int64_t l = static_cast<std::int64_t>(rng.below(2001)) - 1000;
      const double f = std::abs(f_cond(ctx, j, l, 3));
      const double th = theta(ctx, j, l).value().get_d();
      if (std::fabs(f - std::cos(M_PI * th)) > 1e-10) return "|f| != cos(pi theta)";
      if (classify(ctx, j, l) == Color::White && f > bound) return "white point with |f| > exp(-eps^3)";
    }
    return "";
  });
  return report;
}

}  // namespace syrlab
