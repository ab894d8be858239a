#include "syrlab/first_passage.hpp"

#include <algorithm>
#include <cmath>

#include "syrlab/error.hpp"
#include "syrlab/parallel.hpp"

namespace syrlab {

namespace {

const double kLog43 = std::log(4.0 / 3.0);

double log_of(const Natural& n) {
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp) * std::log(2.0);
}

}  // namespace

PassageOutcome first_passage(const OddNatural& n, const Natural& x, std::uint64_t cap) {
  if (x < 1) throw BadParameter("first passage threshold must be >= 1");
  PassageOutcome out;
  mpz_class cur = n.value();
  out.trajectory_max = cur;
  out.prefix_min = 0;
  for (std::uint64_t s = 0;; ++s) {
    if (cur <= x) {
      out.time = s;
      out.location = cur;
      return out;
    }
    if (s == cap) break;
    if (out.prefix_min == 0 || cur < out.prefix_min) out.prefix_min = cur;
    cur = 3 * cur + 1;
    mpz_fdiv_q_2exp(cur.get_mpz_t(), cur.get_mpz_t(), mpz_scan1(cur.get_mpz_t(), 0));
    if (cur > out.trajectory_max) out.trajectory_max = cur;
  }
  out.location = 1;
  return out;
}

std::uint64_t default_passage_cap(const Natural& n) {
  return static_cast<std::uint64_t>(std::ceil(10.0 * std::max(log_of(n), 1.0) / kLog43));
}

// --- log-uniform sampling --------------------------------------------------

LogUniformOddSampler::LogUniformOddSampler(std::uint64_t lo, std::uint64_t hi) {
  if (lo < 3) throw BadParameter("log-uniform range needs lo >= 3");
  if (hi >= (std::uint64_t{1} << 62)) throw BadParameter("log-uniform range above 2^62");
  lo_ = lo | 1;
  hi_ = (hi % 2 == 1) ? hi : hi - 1;
  if (lo_ > hi_) throw EmptyRange("no odd integer in [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
  if (hi_ - lo_ <= kExactSpan) {
    cumulative_.reserve((hi_ - lo_) / 2 + 1);
    double acc = 0;
    for (std::uint64_t k = lo_; k <= hi_; k += 2) {
      acc += 1.0 / static_cast<double>(k);
      cumulative_.push_back(acc);
    }
    total_ = acc;
  } else {
    log_span_ = std::log(static_cast<double>(hi_ + 1) / static_cast<double>(lo_ - 1));
  }
}

std::uint64_t LogUniformOddSampler::operator()(Rng& rng) const {
  if (exact()) {
    const double u = rng.uniform() * total_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return lo_ + 2 * static_cast<std::uint64_t>(it - cumulative_.begin());
  }
  // Odd k owns [k-1, k+1), of log-measure log1p(2/(k-1)) > 2/k; accepting
  // with the ratio leaves P(k) proportional to 1/k.
  for (;;) {
    const double t = static_cast<double>(lo_ - 1) * std::exp(rng.uniform() * log_span_);
    const std::uint64_t k = 2 * static_cast<std::uint64_t>(t / 2.0) + 1;
    if (k < lo_ || k > hi_) continue;
    const double kd = static_cast<double>(k);
    const double accept = (2.0 / kd) / std::log1p(2.0 / (kd - 1.0));
    if (rng.uniform() < accept) return k;
  }
}

double LogUniformOddSampler::probability(std::uint64_t k) const {
  if (k < lo_ || k > hi_ || k % 2 == 0) return 0.0;
  double total = total_;
  if (!exact()) {
    total = 0;
    for (std::uint64_t j = lo_; j <= hi_; j += 2) total += 1.0 / static_cast<double>(j);
  }
  return (1.0 / static_cast<double>(k)) / total;
}

OddNatural sample_log_uniform(std::uint64_t lo, std::uint64_t hi, Rng& rng) {
  return OddNatural(Natural(static_cast<unsigned long>(LogUniformOddSampler(lo, hi)(rng))));
}

// --- experiment ------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (!(x >= 2)) throw BadParameter("experiment threshold x must be >= 2");
  if (!(alpha > 1)) throw BadParameter("experiment exponent alpha must be > 1");
  if (cap && *cap < 1) throw BadParameter("experiment cap must be >= 1");
  if (std::pow(x, alpha * alpha * alpha) >= std::ldexp(1.0, 62)) {
    throw BudgetExceeded("x^(alpha^3) exceeds the 2^62 sampling range");
  }
}

std::uint64_t ExperimentConfig::n0() const {
  return static_cast<std::uint64_t>(std::floor(std::log(x) / (10.0 * std::log(2.0))));
}

std::uint64_t ExperimentConfig::m0() const {
  return static_cast<std::uint64_t>(std::floor((alpha - 1.0) / 100.0 * std::log(x)));
}

std::uint64_t ExperimentConfig::threshold() const {
  return static_cast<std::uint64_t>(std::floor(x));
}

PassageReport passage_experiment(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  PassageReport report;
  report.config = cfg;
  report.x = cfg.threshold();
  const Natural x(static_cast<unsigned long>(report.x));
  const double log_x = std::log(cfg.x);
  const std::uint64_t probe_n = cfg.n0() / 2;
  const double probe_bound = 10.0 * std::pow(log_x, 0.6);

  const std::size_t blocks = block_count(cfg.samples);
  std::vector<std::vector<PassageSample>> per_block(2 * blocks);
  std::vector<std::uint64_t> probe_hits(2 * blocks, 0);

  for (int tag = 1; tag <= 2; ++tag) {
    const double y = std::pow(cfg.x, tag == 1 ? cfg.alpha : cfg.alpha * cfg.alpha);
    const LogUniformOddSampler sampler(static_cast<std::uint64_t>(std::ceil(y)),
                                       static_cast<std::uint64_t>(std::floor(std::pow(y, cfg.alpha))));
    parallel_for(blocks, threads, [&](std::size_t b) {
      const std::size_t slot = (tag - 1) * blocks + b;
      Rng rng(cfg.seed, (static_cast<std::uint64_t>(tag) << 32) | b);
      auto& out = per_block[slot];
      const std::uint64_t count = block_size(cfg.samples, b);
      out.reserve(count);
      for (std::uint64_t i = 0; i < count; ++i) {
        const OddNatural n(Natural(static_cast<unsigned long>(sampler(rng))));
        PassageSample s;
        s.y_tag = tag;
        s.start = n.value();
        s.outcome = first_passage(n, x, cfg.cap ? *cfg.cap : default_passage_cap(n.value()));
        s.predicted_time = (log_of(n.value()) - log_x) / kLog43;
        const double drift = log_of(syr_iterate(n, probe_n).value()) - log_of(n.value()) -
                             static_cast<double>(probe_n) * std::log(0.75);
        if (std::fabs(drift) <= probe_bound) ++probe_hits[slot];
        out.push_back(std::move(s));
      }
    });
  }

  std::uint64_t exhausted[2] = {0, 0};
  std::uint64_t hits = 0;
  std::vector<double> ratios;
  for (std::size_t slot = 0; slot < per_block.size(); ++slot) {
    hits += probe_hits[slot];
    for (auto& s : per_block[slot]) {
      auto& locations = s.y_tag == 1 ? report.locations_y1 : report.locations_y2;
      if (s.outcome.exhausted()) {
        ++exhausted[s.y_tag - 1];
      } else {
        locations.add(s.outcome.location.get_ui());
        if (s.predicted_time > 0) {
          ratios.push_back(static_cast<double>(*s.outcome.time) / s.predicted_time);
        }
      }
      report.samples.push_back(std::move(s));
    }
  }
  const double total = static_cast<double>(cfg.samples);
  report.exhaustion_rate_y1 = cfg.samples ? static_cast<double>(exhausted[0]) / total : 0.0;
  report.exhaustion_rate_y2 = cfg.samples ? static_cast<double>(exhausted[1]) / total : 0.0;
  if (report.locations_y1.total > 0 && report.locations_y2.total > 0) {
    report.tv = tv_distance(report.locations_y1, report.locations_y2);
  }
  if (!ratios.empty()) {
    auto mid = ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2);
    std::nth_element(ratios.begin(), mid, ratios.end());
    report.median_time_ratio = *mid;
  }
  report.decay_probe_fraction = cfg.samples ? static_cast<double>(hits) / (2.0 * total) : 1.0;
  return report;
}

bool passage_support_check(const PassageReport& report) {
  const Natural x(static_cast<unsigned long>(report.x));
  Natural floor_bound;
  mpz_fdiv_q_2exp(floor_bound.get_mpz_t(), x.get_mpz_t(), 64);
  for (const auto& s : report.samples) {
    const auto& o = s.outcome;
    if (o.exhausted()) {
      if (o.location != 1) return false;
      continue;
    }
    if (mpz_even_p(o.location.get_mpz_t()) || o.location > x || o.location <= floor_bound) {
      return false;
    }
    if (*o.time > 0 && o.prefix_min <= x) return false;
  }
  return true;
}

MinimalityCheck minimality_spot_check(const PassageReport& report, std::uint64_t count, Seed seed) {
  MinimalityCheck result;
  std::vector<std::size_t> finite;
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    if (!report.samples[i].outcome.exhausted()) finite.push_back(i);
  }
  if (finite.empty()) return result;
  const Natural x(static_cast<unsigned long>(report.x));
  Rng rng(seed, 0x6d696e);
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto& s = report.samples[finite[rng.below(finite.size())]];
    const std::uint64_t t = *s.outcome.time;
    OddNatural cur(s.start);
    for (std::uint64_t step = 0; step < t; ++step) {
      if (cur.value() <= x) result.passed = false;
      cur = syracuse_step(cur);
    }
    if (cur.value() > x || cur.value() != s.outcome.location) result.passed = false;
    ++result.checked;
  }
  return result;
}

}  // namespace syrlab
