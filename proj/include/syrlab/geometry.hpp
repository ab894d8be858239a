#pragma once

// Frequency geometry on the lattice (j, l):
//   theta(j, l) = { xi 3^(2j-2) (2^(1-l) mod 3^n) / 3^n },
// the signed fractional part in (-1/2, 1/2]. A point of the strip
// 1 <= j <= floor(n/2) is black when |theta| <= eps and white otherwise.
// Also the holding-time renewal process that walks this lattice and the
// Monte-Carlo quantities built on it.

#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "syrlab/rng.hpp"

namespace syrlab {

/// eps = num / den, exactly.
struct Eps {
  std::uint64_t num = 1;
  std::uint64_t den = 100;

  static Eps parse(const std::string& text);  // "0.01" or "1/100"
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
};

class FreqContext {
 public:
  static constexpr unsigned kMaxLevel = 40;  // 3^40 < 2^64

  FreqContext(unsigned n, std::int64_t xi, Eps eps);

  unsigned n() const { return n_; }
  std::int64_t xi() const { return xi_; }
  const Eps& eps() const { return eps_; }
  std::uint64_t modulus() const { return modulus_; }
  /// floor(n/2), the last column of the strip.
  std::int64_t strip_width() const { return n_ / 2; }
  bool in_strip(std::int64_t j) const { return j >= 1 && j <= strip_width(); }
  /// Vertical period 2 * 3^(n-1) of the colouring.
  std::uint64_t period() const { return 2 * (modulus_ / 3); }
  std::uint64_t xi_mod() const { return xi_mod_; }
  std::uint64_t inv2() const { return inv2_; }

 private:
  unsigned n_;
  std::int64_t xi_;
  Eps eps_;
  std::uint64_t modulus_;
  std::uint64_t xi_mod_;
  std::uint64_t inv2_;
};

struct ThetaValue {
  std::int64_t numerator = 0;  // in (-3^n/2, 3^n/2]
  unsigned level = 0;

  mpq_class value() const;
  friend bool operator==(const ThetaValue&, const ThetaValue&) = default;
};

enum class Color { Black, White };
const char* color_name(Color c);

ThetaValue theta(const FreqContext& ctx, std::int64_t j, std::int64_t l);
/// True iff 3^(2(j*-j)) 2^(l-l*) theta(j, l) == theta(j*, l*) mod 1, checked
/// on numerators mod 3^n. Requires j <= j* and l >= l*.
bool theta_identity_holds(const FreqContext& ctx, std::int64_t j, std::int64_t l, std::int64_t j_star,
                          std::int64_t l_star);
bool is_black(const FreqContext& ctx, const ThetaValue& t);
Color classify(const FreqContext& ctx, std::int64_t j, std::int64_t l);

struct Triangle {
  std::int64_t corner_j = 0;
  std::int64_t corner_l = 0;
  std::int64_t corner_numerator = 0;  // theta(corner) * 3^n
  double size = 0;                    // log(eps / |theta(corner)|)
  bool truncated = false;

  /// Exact membership: 9^(j - j_c) 2^(l_c - l) |theta(corner)| <= eps.
  bool contains(const FreqContext& ctx, std::int64_t j, std::int64_t l) const;
};

/// Corner of the black point (j, l): walk up while black, then left.
std::pair<std::int64_t, std::int64_t> black_corner(const FreqContext& ctx, std::int64_t j, std::int64_t l);
Triangle triangle_at(const FreqContext& ctx, std::int64_t corner_j, std::int64_t corner_l);

struct Window {
  std::int64_t jmin = 1, jmax = 1;
  std::int64_t lmin = 0, lmax = 0;

  std::uint64_t points() const;
  bool contains(std::int64_t j, std::int64_t l) const {
    return j >= jmin && j <= jmax && l >= lmin && l <= lmax;
  }
};

struct GeometryLimits {
  std::uint64_t max_window_points = 100'000'000;
};

struct Decomposition {
  std::vector<Triangle> triangles;  // sorted by corner
  std::vector<std::pair<std::int64_t, std::int64_t>> black_points;
  std::uint64_t points_scanned = 0;
  bool partition_ok = true;        // each black point lies in exactly one triangle, its own
  bool triangles_black = true;     // every triangle point inside the window is black
  bool corners_ok = true;          // corner black, point above it white
  bool neighbourhood_white = true; // points within distance 2 outside a triangle are white
  double min_separation = std::numeric_limits<double>::infinity();
};

Decomposition decompose_black(const FreqContext& ctx, const Window& window, const GeometryLimits& limits = {});

/// True iff 3^(n+1-2j) eps >= 1/3 for every point.
bool strip_bound_check(const FreqContext& ctx, const std::vector<std::pair<std::int64_t, std::int64_t>>& points);

/// f(x, b) = E(chi(x (2^a2 + 3)) | a1 + a2 = b) at x = 3^(2j-2) 2^-l, with
/// chi(y) = exp(-2 pi i xi (y mod 3^n) / 3^n).
std::complex<double> f_cond(const FreqContext& ctx, std::int64_t j, std::int64_t l, unsigned b);

struct LatticeStep {
  std::int64_t j = 0;
  std::int64_t l = 0;
  friend bool operator==(const LatticeStep&, const LatticeStep&) = default;
};

/// (index, running Pascal sum) at the first Pascal draw equal to 3.
LatticeStep sample_hold(Rng& rng);
/// First point of the Hold renewal walk from (0, 0) with l > s.
LatticeStep renewal_first_passage(std::int64_t s, Rng& rng);

/// Sample histograms keyed by (j, l); independent of the worker count.
using StepHistogram = std::map<std::pair<std::int64_t, std::int64_t>, std::uint64_t>;
StepHistogram hold_histogram(std::uint64_t samples, Seed seed, unsigned threads = 1);
StepHistogram renewal_histogram(std::int64_t s, std::uint64_t samples, Seed seed, unsigned threads = 1);

struct McEstimate {
  double estimate = 0;
  double stderr_ = 0;
  std::uint64_t samples = 0;
  Seed seed{};
};

/// Q(j, l): mean over Hold walks from (j, l) of exp(-eps^3 #white visits),
/// the start included; walks stop once they leave the strip.
McEstimate estimate_Q(const FreqContext& ctx, std::int64_t j, std::int64_t l, std::uint64_t samples,
                      Seed seed, unsigned threads = 1);

/// E exp(-eps^3 #{j <= n/2 : b_j = 3, (j, b_[1,j]) white}) with b_j iid Pascal.
McEstimate white_hit_bound(const FreqContext& ctx, std::uint64_t samples, Seed seed, unsigned threads = 1);

struct WalkPoint {
  LatticeStep at;
  std::optional<Color> color;  // empty outside the strip
  std::optional<std::pair<std::int64_t, std::int64_t>> triangle;  // corner, for black points
};

struct WalkTrace {
  LatticeStep start;
  std::vector<LatticeStep> increments;
  std::vector<WalkPoint> visited;  // start, then each partial sum
};

/// Hold walk from `start` until it leaves the strip or makes max_steps steps.
WalkTrace trace_walk(const FreqContext& ctx, LatticeStep start, std::uint64_t max_steps, Rng& rng);

}  // namespace syrlab
