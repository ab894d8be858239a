#include "syrlab/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "syrlab/dist3adic.hpp"
#include "syrlab/error.hpp"
#include "syrlab/numeric.hpp"
#include "syrlab/parallel.hpp"
#include "syrlab/stochastic.hpp"

namespace syrlab {

namespace {

using Point = std::pair<std::int64_t, std::int64_t>;

std::int64_t signed_residue(std::uint64_t r, std::uint64_t m) {
  return r <= m / 2 ? static_cast<std::int64_t>(r) : -static_cast<std::int64_t>(m - r);
}

// 2^e mod m for any sign of e.
std::uint64_t pow2_signed(const FreqContext& ctx, std::int64_t e) {
  if (e >= 0) return powmod_u64(2, static_cast<std::uint64_t>(e), ctx.modulus());
  return powmod_u64(ctx.inv2(), static_cast<std::uint64_t>(-(e + 1)) + 1, ctx.modulus());
}

std::uint64_t theta_residue(const FreqContext& ctx, std::int64_t j, std::int64_t l) {
  if (j < 1) throw BadParameter("theta needs j >= 1");
  const std::uint64_t m = ctx.modulus();
  const std::uint64_t nine = powmod_u64(9, static_cast<std::uint64_t>(j - 1), m);
  return mulmod_u64(mulmod_u64(ctx.xi_mod(), nine, m), pow2_signed(ctx, 1 - l), m);
}

bool black_numerator(const FreqContext& ctx, std::int64_t num) {
  const unsigned __int128 lhs = static_cast<unsigned __int128>(num < 0 ? -num : num) * ctx.eps().den;
  const unsigned __int128 rhs = static_cast<unsigned __int128>(ctx.eps().num) * ctx.modulus();
  return lhs <= rhs;
}

bool black_at(const FreqContext& ctx, std::int64_t j, std::int64_t l) {
  return black_numerator(ctx, theta(ctx, j, l).numerator);
}

void require_strip(const FreqContext& ctx, std::int64_t j) {
  if (!ctx.in_strip(j)) {
    throw OutOfStrip("column " + std::to_string(j) + " outside [1, " + std::to_string(ctx.strip_width()) + "]");
  }
}

double distance(const Point& a, const Point& b) {
  const double dj = static_cast<double>(a.first - b.first);
  const double dl = static_cast<double>(a.second - b.second);
  return std::sqrt(dj * dj + dl * dl);
}

// Per-sample white counts; the estimate is a function of the histogram only.
using CountHistogram = std::map<std::uint64_t, std::uint64_t>;

McEstimate summarise(const CountHistogram& hist, double eps3, std::uint64_t samples, Seed seed) {
  McEstimate out;
  out.samples = samples;
  out.seed = seed;
  CompensatedSum sum;
  for (const auto& [count, times] : hist) {
    sum.add(static_cast<double>(times) * std::exp(-eps3 * static_cast<double>(count)));
  }
  const double n = static_cast<double>(samples);
  out.estimate = sum.value() / n;
  if (samples > 1) {
    CompensatedSum sq;
    for (const auto& [count, times] : hist) {
      const double d = std::exp(-eps3 * static_cast<double>(count)) - out.estimate;
      sq.add(static_cast<double>(times) * d * d);
    }
    out.stderr_ = std::sqrt(sq.value() / (n - 1.0) / n);
  }
  return out;
}

template <class Walk>
McEstimate run_counts(std::uint64_t samples, Seed seed, unsigned threads, double eps3, Walk walk) {
  if (samples < 1) throw BadParameter("Monte-Carlo estimate needs samples >= 1");
  const std::size_t blocks = block_count(samples);
  std::vector<CountHistogram> per_block(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    Rng rng(seed, b);
    const std::uint64_t count = block_size(samples, b);
    for (std::uint64_t i = 0; i < count; ++i) ++per_block[b][walk(rng)];
  });
  CountHistogram total;
  for (const auto& h : per_block) {
    for (const auto& [k, v] : h) total[k] += v;
  }
  return summarise(total, eps3, samples, seed);
}

}  // namespace

// --- eps and context -------------------------------------------------------

Eps Eps::parse(const std::string& text) {
  mpq_class q;
  const auto slash = text.find('/');
  bool ok = !text.empty();
  if (slash != std::string::npos) {
    ok = ok && q.set_str(text, 10) == 0;
  } else {
    const auto dot = text.find('.');
    std::string digits = text;
    std::size_t frac = 0;
    if (dot != std::string::npos) {
      digits = text.substr(0, dot) + text.substr(dot + 1);
      frac = text.size() - dot - 1;
    }
    ok = ok && !digits.empty() &&
         std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); });
    if (ok) {
      mpz_class num(digits, 10);
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
      q = mpq_class(num, den);
    }
  }
  if (!ok) throw BadEps("cannot parse eps '" + text + "'");
  q.canonicalize();
  if (q <= 0) throw BadEps("eps must be positive");
  if (!mpz_fits_ulong_p(q.get_num_mpz_t()) || !mpz_fits_ulong_p(q.get_den_mpz_t())) {
    throw BadEps("eps '" + text + "' has more than 64-bit numerator or denominator");
  }
  return Eps{q.get_num().get_ui(), q.get_den().get_ui()};
}

std::string Eps::str() const { return std::to_string(num) + "/" + std::to_string(den); }

FreqContext::FreqContext(unsigned n, std::int64_t xi, Eps eps) : n_(n), xi_(xi), eps_(eps) {
  if (n < 1) throw BadLevel("frequency level must be >= 1");
  if (n > kMaxLevel) throw LevelTooLarge("frequency level above " + std::to_string(kMaxLevel));
  if (xi % 3 == 0) throw BadParameter("xi must not be divisible by 3");
  if (eps.num == 0 || eps.den == 0 ||
      static_cast<unsigned __int128>(eps.num) * 100 > static_cast<unsigned __int128>(eps.den)) {
    throw BadEps("eps must lie in (0, 1/100]");
  }
  modulus_ = pow3_u64(n);
  const std::uint64_t mag = static_cast<std::uint64_t>(xi < 0 ? -(xi + 1) : xi) + (xi < 0 ? 1 : 0);
  xi_mod_ = mag % modulus_;
  if (xi < 0) xi_mod_ = (modulus_ - xi_mod_) % modulus_;
  inv2_ = (modulus_ + 1) / 2;
}

// --- theta and colour --------------------------------------------------------

mpq_class ThetaValue::value() const {
  mpq_class q(mpz_class(static_cast<long>(numerator)), mpz_class(static_cast<unsigned long>(pow3_u64(level))));
  q.canonicalize();
  return q;
}

const char* color_name(Color c) { return c == Color::Black ? "black" : "white"; }

ThetaValue theta(const FreqContext& ctx, std::int64_t j, std::int64_t l) {
  return ThetaValue{signed_residue(theta_residue(ctx, j, l), ctx.modulus()), ctx.n()};
}

bool theta_identity_holds(const FreqContext& ctx, std::int64_t j, std::int64_t l, std::int64_t j_star,
                          std::int64_t l_star) {
  if (j > j_star || l < l_star) throw BadParameter("identity needs j <= j* and l >= l*");
  const std::uint64_t m = ctx.modulus();
  const std::uint64_t lhs =
      mulmod_u64(mulmod_u64(powmod_u64(9, static_cast<std::uint64_t>(j_star - j), m),
                            powmod_u64(2, static_cast<std::uint64_t>(l - l_star), m), m),
                 theta_residue(ctx, j, l), m);
  return lhs == theta_residue(ctx, j_star, l_star);
}

bool is_black(const FreqContext& ctx, const ThetaValue& t) { return black_numerator(ctx, t.numerator); }

Color classify(const FreqContext& ctx, std::int64_t j, std::int64_t l) {
  require_strip(ctx, j);
  return black_at(ctx, j, l) ? Color::Black : Color::White;
}

// --- triangles -----------------------------------------------------------------

bool Triangle::contains(const FreqContext& ctx, std::int64_t j, std::int64_t l) const {
  if (j < corner_j || l > corner_l) return false;
  const std::int64_t dj = j - corner_j;
  const std::int64_t dl = corner_l - l;
  // 9^41 alone exceeds eps * 3^n < 2^128.
  if (dj > 41 || dl > 130) return false;
  mpz_class lhs;
  mpz_ui_pow_ui(lhs.get_mpz_t(), 9, static_cast<unsigned long>(dj));
  mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), static_cast<mp_bitcnt_t>(dl));
  lhs *= mpz_class(static_cast<unsigned long>(corner_numerator < 0 ? -corner_numerator : corner_numerator));
  lhs *= mpz_class(static_cast<unsigned long>(ctx.eps().den));
  const mpz_class rhs = mpz_class(static_cast<unsigned long>(ctx.eps().num)) *
                        mpz_class(static_cast<unsigned long>(ctx.modulus()));
  return lhs <= rhs;
}

Point black_corner(const FreqContext& ctx, std::int64_t j, std::int64_t l) {
  require_strip(ctx, j);
  if (!black_at(ctx, j, l)) throw BadParameter("corner requested for a white point");
  // Going up halves theta, and a nonzero numerator is at least 1, so a run
  // of black points above (j, l) is shorter than log2(3^40) < 64.
  int guard = 0;
  while (black_at(ctx, j, l + 1)) {
    ++l;
    if (++guard > 128) throw InvariantViolation("unbounded black column above a point");
  }
  while (j > 1 && black_at(ctx, j - 1, l)) --j;
  return {j, l};
}

Triangle triangle_at(const FreqContext& ctx, std::int64_t corner_j, std::int64_t corner_l) {
  Triangle t;
  t.corner_j = corner_j;
  t.corner_l = corner_l;
  t.corner_numerator = theta(ctx, corner_j, corner_l).numerator;
  const double mag = std::fabs(static_cast<double>(t.corner_numerator));
  t.size = std::log(static_cast<double>(ctx.eps().num)) - std::log(static_cast<double>(ctx.eps().den)) +
           std::log(static_cast<double>(ctx.modulus())) - std::log(mag);
  return t;
}

std::uint64_t Window::points() const {
  if (jmin > jmax || lmin > lmax) return 0;
  return static_cast<std::uint64_t>(jmax - jmin + 1) * static_cast<std::uint64_t>(lmax - lmin + 1);
}

Decomposition decompose_black(const FreqContext& ctx, const Window& w, const GeometryLimits& limits) {
  if (w.jmin > w.jmax || w.lmin > w.lmax) throw EmptyRange("empty window");
  require_strip(ctx, w.jmin);
  require_strip(ctx, w.jmax);
  const std::uint64_t height = static_cast<std::uint64_t>(w.lmax - w.lmin) + 1;
  if (height >= ctx.period()) {
    throw WindowTooLarge("window height " + std::to_string(height) + " reaches the vertical period " +
                         std::to_string(ctx.period()));
  }
  if (w.points() > limits.max_window_points) {
    throw WindowTooLarge(std::to_string(w.points()) + " points exceed the scan budget of " +
                         std::to_string(limits.max_window_points));
  }

  Decomposition out;
  const std::uint64_t m = ctx.modulus();
  for (std::int64_t j = w.jmin; j <= w.jmax; ++j) {
    std::uint64_t r = theta_residue(ctx, j, w.lmin);
    for (std::int64_t l = w.lmin; l <= w.lmax; ++l) {
      if (black_numerator(ctx, signed_residue(r, m))) out.black_points.emplace_back(j, l);
      r = mulmod_u64(r, ctx.inv2(), m);
      ++out.points_scanned;
    }
  }

  std::map<Point, std::vector<Point>> groups;
  for (const auto& p : out.black_points) groups[black_corner(ctx, p.first, p.second)].push_back(p);
  const std::set<Point> black(out.black_points.begin(), out.black_points.end());

  std::vector<std::vector<Point>> members;  // window points of each triangle
  for (const auto& [corner, pts] : groups) {
    Triangle t = triangle_at(ctx, corner.first, corner.second);
    t.truncated = !w.contains(corner.first, corner.second) || t.contains(ctx, corner.first, w.lmin - 1) ||
                  t.contains(ctx, w.jmax + 1, corner.second);

    if (black_at(ctx, corner.first, corner.second + 1)) out.corners_ok = false;
    if (corner.first > 1 && black_at(ctx, corner.first - 1, corner.second)) out.corners_ok = false;

    std::vector<Point> inside;
    for (std::int64_t j = std::max(corner.first, w.jmin); j <= w.jmax; ++j) {
      bool any = false;
      for (std::int64_t l = std::min(corner.second, w.lmax); l >= w.lmin; --l) {
        if (!t.contains(ctx, j, l)) break;  // membership only shrinks going down
        any = true;
        inside.emplace_back(j, l);
        if (!black.count({j, l})) out.triangles_black = false;
      }
      if (!any) break;  // and going right
    }
    std::sort(inside.begin(), inside.end());
    auto sorted_pts = pts;
    std::sort(sorted_pts.begin(), sorted_pts.end());
    if (sorted_pts != inside) out.partition_ok = false;

    out.triangles.push_back(t);
    members.push_back(std::move(inside));
  }

  // Exactly one triangle per black point.
  for (const auto& p : out.black_points) {
    int hits = 0;
    for (const auto& t : out.triangles) hits += t.contains(ctx, p.first, p.second) ? 1 : 0;
    if (hits != 1) out.partition_ok = false;
  }

  for (std::size_t k = 0; k < out.triangles.size(); ++k) {
    const auto& t = out.triangles[k];
    for (const auto& p : members[k]) {
      for (std::int64_t dj = -2; dj <= 2; ++dj) {
        for (std::int64_t dl = -2; dl <= 2; ++dl) {
          if (dj * dj + dl * dl > 4) continue;
          const std::int64_t j = p.first + dj;
          const std::int64_t l = p.second + dl;
          if (!w.contains(j, l) || t.contains(ctx, j, l)) continue;
          if (black.count({j, l})) out.neighbourhood_white = false;
        }
      }
    }
    for (std::size_t k2 = k + 1; k2 < out.triangles.size(); ++k2) {
      for (const auto& a : members[k]) {
        for (const auto& b : members[k2]) out.min_separation = std::min(out.min_separation, distance(a, b));
      }
    }
  }
  return out;
}

bool strip_bound_check(const FreqContext& ctx, const std::vector<Point>& points) {
  for (const auto& [j, l] : points) {
    (void)l;
    // 3^(n+1-2j) eps >= 1/3  <=>  3^(n+2-2j) num >= den
    const std::int64_t e = static_cast<std::int64_t>(ctx.n()) + 2 - 2 * j;
    mpz_class lhs(static_cast<unsigned long>(ctx.eps().num));
    mpz_class rhs(static_cast<unsigned long>(ctx.eps().den));
    mpz_class p3;
    mpz_ui_pow_ui(p3.get_mpz_t(), 3, static_cast<unsigned long>(e >= 0 ? e : -e));
    (e >= 0 ? lhs : rhs) *= p3;
    if (lhs < rhs) return false;
  }
  return true;
}

std::complex<double> f_cond(const FreqContext& ctx, std::int64_t j, std::int64_t l, unsigned b) {
  if (b < 2) throw BadParameter("f(x, b) needs b >= 2");
  if (b > 12) throw UnsupportedB("f(x, b) is enumerated only for b <= 12");
  if (j < 1) throw BadParameter("f(x, b) needs j >= 1");
  const std::uint64_t m = ctx.modulus();
  const std::uint64_t x =
      mulmod_u64(powmod_u64(9, static_cast<std::uint64_t>(j - 1), m), pow2_signed(ctx, -l), m);
  std::complex<long double> sum = 0;
  for (unsigned a2 = 1; a2 < b; ++a2) {
    const std::uint64_t y = mulmod_u64(x, ((std::uint64_t{1} << a2) + 3) % m, m);
    const std::int64_t r = signed_residue(mulmod_u64(ctx.xi_mod(), y, m), m);
    const long double phase = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(r) /
                              static_cast<long double>(m);
    sum += std::polar(1.0L, phase);
  }
  sum /= static_cast<long double>(b - 1);
  return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

// --- renewal process -------------------------------------------------------------

LatticeStep sample_hold(Rng& rng) {
  LatticeStep h;
  for (;;) {
    const std::uint64_t b = sample_pascal(rng);
    ++h.j;
    h.l += static_cast<std::int64_t>(b);
    if (b == 3) return h;
  }
}

LatticeStep renewal_first_passage(std::int64_t s, Rng& rng) {
  if (s < 0) throw BadParameter("row threshold must be >= 0");
  LatticeStep at;
  do {
    const LatticeStep h = sample_hold(rng);
    at.j += h.j;
    at.l += h.l;
  } while (at.l <= s);
  return at;
}

namespace {

template <class Draw>
StepHistogram histogram(std::uint64_t samples, Seed seed, unsigned threads, Draw draw) {
  const std::size_t blocks = block_count(samples);
  std::vector<StepHistogram> per_block(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    Rng rng(seed, b);
    const std::uint64_t count = block_size(samples, b);
    for (std::uint64_t i = 0; i < count; ++i) {
      const LatticeStep v = draw(rng);
      ++per_block[b][{v.j, v.l}];
    }
  });
  StepHistogram total;
  for (const auto& h : per_block) {
    for (const auto& [k, v] : h) total[k] += v;
  }
  return total;
}

}  // namespace

StepHistogram hold_histogram(std::uint64_t samples, Seed seed, unsigned threads) {
  return histogram(samples, seed, threads, [](Rng& rng) { return sample_hold(rng); });
}

StepHistogram renewal_histogram(std::int64_t s, std::uint64_t samples, Seed seed, unsigned threads) {
  if (s < 0) throw BadParameter("row threshold must be >= 0");
  return histogram(samples, seed, threads, [s](Rng& rng) { return renewal_first_passage(s, rng); });
}

McEstimate estimate_Q(const FreqContext& ctx, std::int64_t j, std::int64_t l, std::uint64_t samples, Seed seed,
                      unsigned threads) {
  require_strip(ctx, j);
  const double eps3 = std::pow(ctx.eps().value(), 3);
  const std::uint64_t start_white = black_at(ctx, j, l) ? 0 : 1;
  return run_counts(samples, seed, threads, eps3, [&](Rng& rng) {
    std::uint64_t count = start_white;
    LatticeStep at{j, l};
    for (;;) {
      const LatticeStep h = sample_hold(rng);
      at.j += h.j;
      at.l += h.l;
      if (at.j > ctx.strip_width()) return count;
      if (!black_at(ctx, at.j, at.l)) ++count;
    }
  });
}

McEstimate white_hit_bound(const FreqContext& ctx, std::uint64_t samples, Seed seed, unsigned threads) {
  const double eps = ctx.eps().value();
  const double eps3 = eps * eps * eps;
  if (std::cos(std::numbers::pi * eps) > std::exp(-eps3)) {
    throw BadEps("cos(pi eps) exceeds exp(-eps^3)");
  }
  return run_counts(samples, seed, threads, eps3, [&](Rng& rng) {
    std::uint64_t count = 0;
    std::int64_t l = 0;
    for (std::int64_t j = 1; j <= ctx.strip_width(); ++j) {
      const std::uint64_t b = sample_pascal(rng);
      l += static_cast<std::int64_t>(b);
      if (b == 3 && !black_at(ctx, j, l)) ++count;
    }
    return count;
  });
}

WalkTrace trace_walk(const FreqContext& ctx, LatticeStep start, std::uint64_t max_steps, Rng& rng) {
  WalkTrace trace;
  trace.start = start;
  auto annotate = [&](LatticeStep at) {
    WalkPoint p;
    p.at = at;
    if (ctx.in_strip(at.j)) {
      p.color = classify(ctx, at.j, at.l);
      if (*p.color == Color::Black) p.triangle = black_corner(ctx, at.j, at.l);
    }
    trace.visited.push_back(p);
  };
  annotate(start);
  LatticeStep at = start;
  for (std::uint64_t k = 0; k < max_steps && at.j <= ctx.strip_width(); ++k) {
    const LatticeStep h = sample_hold(rng);
    trace.increments.push_back(h);
    at.j += h.j;
    at.l += h.l;
    annotate(at);
  }
  return trace;
}

}  // namespace syrlab
