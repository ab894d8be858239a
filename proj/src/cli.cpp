#include "syrlab/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "syrlab/dist3adic.hpp"
#include "syrlab/dynamics.hpp"
#include "syrlab/error.hpp"
#include "syrlab/first_passage.hpp"
#include "syrlab/geometry.hpp"
#include "syrlab/selftest.hpp"
#include "syrlab/stochastic.hpp"

namespace syrlab::cli {

using nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw InvariantViolation("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_atomic(const std::string& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw BadParameter("cannot open " + tmp.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw BadParameter("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw BadParameter("cannot rename onto " + path + ": " + ec.message());
  }
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string rational(const Rational& q) {
  return q.get_den() == 1 ? q.get_num().get_str() + "/1" : q.get_str();
}

struct Result {
  std::string data;
  ordered_json params = ordered_json::object();
  ordered_json summary;  // optional extra manifest section
  int exit_code = 0;
};

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
  std::string format;
  std::uint64_t budget_mb = 2048;

  DistLimits dist_limits() const {
    DistLimits l;
    l.budget_bytes = budget_mb << 20;
    return l;
  }
};

std::string pick_format(const Globals& g, const char* fallback) {
  return g.format.empty() ? fallback : g.format;
}

// --- distribution tables ---------------------------------------------------

Result table_output(const Globals& g, const Dist3Adic* exact, const Dist3AdicFloat* fl) {
  Result r;
  const std::string format = pick_format(g, "csv");
  std::ostringstream os;
  if (format == "csv") {
    if (exact) {
      os << "residue,prob_num,prob_den\n";
      for (std::size_t y = 0; y < exact->probs.size(); ++y) {
        os << y << ',' << exact->probs[y].get_num().get_str() << ',' << exact->probs[y].get_den().get_str()
           << '\n';
      }
    } else {
      os << "residue,prob\n";
      for (std::size_t y = 0; y < fl->probs.size(); ++y) os << y << ',' << num(fl->probs[y]) << '\n';
    }
  } else {
    ordered_json j;
    j["n"] = exact ? exact->level : fl->level;
    j["mode"] = exact ? "exact" : "float";
    ordered_json probs = ordered_json::array();
    if (exact) {
      for (const auto& p : exact->probs) probs.push_back(rational(p));
    } else {
      for (double p : fl->probs) probs.push_back(p);
    }
    j["probs"] = probs;
    os << j.dump(2) << '\n';
  }
  r.data = os.str();
  return r;
}

// --- geometry helpers -----------------------------------------------------------

struct FreqArgs {
  unsigned n = 40;
  std::int64_t xi = 1;
  std::string eps = "1/100";

  void add(CLI::App* sub) {
    sub->add_option("--n", n, "level")->required();
    sub->add_option("--xi", xi, "frequency, not divisible by 3")->required();
    sub->add_option("--eps", eps, "threshold as a decimal or p/q")->capture_default_str();
  }
  FreqContext context() const { return FreqContext(n, xi, Eps::parse(eps)); }
  void record(ordered_json& p) const {
    p["n"] = n;
    p["xi"] = xi;
    p["eps"] = Eps::parse(eps).str();
  }
};

struct WindowArgs {
  Window w;
  void add(CLI::App* sub) {
    sub->add_option("--jmin", w.jmin)->required();
    sub->add_option("--jmax", w.jmax)->required();
    sub->add_option("--lmin", w.lmin)->required();
    sub->add_option("--lmax", w.lmax)->required();
  }
  void record(ordered_json& p) const {
    p["jmin"] = w.jmin;
    p["jmax"] = w.jmax;
    p["lmin"] = w.lmin;
    p["lmax"] = w.lmax;
  }
};

ordered_json estimate_json(const McEstimate& e) {
  ordered_json j;
  j["estimate"] = e.estimate;
  j["stderr"] = e.stderr_;
  j["samples"] = e.samples;
  j["seed"] = e.seed.value;
  return j;
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case Error::Category::Argument: return 2;
    case Error::Category::Budget: return 3;
    case Error::Category::Invariant: return 1;
  }
  return 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Syracuse dynamics laboratory", "syrlab"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker cap; results do not depend on it")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", g.out, "output file (written atomically)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--budget-mb", g.budget_mb, "memory budget for tables")->capture_default_str();

  std::map<CLI::App*, std::function<Result()>> handlers;

  // orbit
  {
    auto* sub = app.add_subcommand("orbit", "Syracuse orbit of an odd start");
    auto start = std::make_shared<std::string>();
    auto steps = std::make_shared<std::uint64_t>(0);
    sub->add_option("--n-start", *start, "odd starting value")->required();
    sub->add_option("--steps", *steps, "number of Syracuse steps")->required();
    handlers[sub] = [&g, start, steps] {
      mpz_class v;
      if (v.set_str(*start, 10) != 0 || v < 1) throw BadParameter("--n-start must be a positive integer");
      OddNatural n(v);
      std::vector<std::string> orbit{n.str()};
      for (std::uint64_t s = 0; s < *steps; ++s) {
        n = syracuse_step(n);
        orbit.push_back(n.str());
      }
      Result r;
      r.params = {{"n_start", *start}, {"steps", *steps}};
      std::ostringstream os;
      if (g.format == "json") {
        os << ordered_json{{"orbit", orbit}}.dump(2) << '\n';
      } else if (g.format == "csv") {
        os << "step,value\n";
        for (std::size_t i = 0; i < orbit.size(); ++i) os << i << ',' << orbit[i] << '\n';
      } else {
        for (std::size_t i = 0; i < orbit.size(); ++i) os << (i ? " " : "") << orbit[i];
        os << '\n';
      }
      r.data = os.str();
      return r;
    };
  }

  // dist / project
  {
    auto* sub = app.add_subcommand("dist", "distribution of Syrac(Z/3^n)");
    auto n = std::make_shared<unsigned>(1);
    auto mode = std::make_shared<std::string>("exact");
    sub->add_option("--n", *n, "level")->required();
    sub->add_option("--mode", *mode, "exact or float")->check(CLI::IsMember({"exact", "float"}));
    handlers[sub] = [&g, n, mode] {
      Result r;
      if (*mode == "exact") {
        const auto d = syracuse_dist_exact(*n, g.dist_limits(), g.threads);
        r = table_output(g, &d, nullptr);
      } else {
        const auto d = syracuse_dist_float(*n, g.dist_limits(), g.threads);
        r = table_output(g, nullptr, &d);
      }
      r.params = {{"n", *n}, {"mode", *mode}};
      return r;
    };
  }
  {
    auto* sub = app.add_subcommand("project", "reduce dist(n) mod 3^k");
    auto n = std::make_shared<unsigned>(1);
    auto k = std::make_shared<unsigned>(0);
    auto mode = std::make_shared<std::string>("exact");
    sub->add_option("--n", *n, "source level")->required();
    sub->add_option("--k", *k, "target level")->required();
    sub->add_option("--mode", *mode, "exact or float")->check(CLI::IsMember({"exact", "float"}));
    handlers[sub] = [&g, n, k, mode] {
      Result r;
      if (*mode == "exact") {
        const auto d = project(syracuse_dist_exact(*n, g.dist_limits(), g.threads), *k);
        r = table_output(g, &d, nullptr);
      } else {
        const auto d = project(syracuse_dist_float(*n, g.dist_limits(), g.threads), *k);
        r = table_output(g, nullptr, &d);
      }
      r.params = {{"n", *n}, {"k", *k}, {"mode", *mode}};
      return r;
    };
  }

  // osc
  {
    auto* sub = app.add_subcommand("osc", "oscillation Osc_{m,n} of dist(n)");
    auto n = std::make_shared<unsigned>(1);
    auto m = std::make_shared<unsigned>(0);
    auto mode = std::make_shared<std::string>("exact");
    sub->add_option("--n", *n, "level")->required();
    sub->add_option("--m", *m, "coarse level, 0 <= m <= n")->required();
    sub->add_option("--mode", *mode, "exact or float")->check(CLI::IsMember({"exact", "float"}));
    handlers[sub] = [&g, n, m, mode] {
      std::string value;
      if (*mode == "exact") {
        value = rational(oscillation(syracuse_dist_exact(*n, g.dist_limits(), g.threads), *m));
      } else {
        value = num(oscillation(syracuse_dist_float(*n, g.dist_limits(), g.threads), *m));
      }
      Result r;
      r.params = {{"n", *n}, {"m", *m}, {"mode", *mode}};
      if (pick_format(g, "csv") == "csv") {
        r.data = "n,m,osc\n" + std::to_string(*n) + "," + std::to_string(*m) + "," + value + "\n";
      } else {
        r.data = ordered_json{{"n", *n}, {"m", *m}, {"osc", value}}.dump(2) + "\n";
      }
      return r;
    };
  }

  // charfn
  {
    auto* sub = app.add_subcommand("charfn", "characteristic function probes (float path)");
    auto levels = std::make_shared<std::vector<unsigned>>();
    auto xis = std::make_shared<std::vector<std::uint64_t>>(kDefaultCharProbes);
    auto random = std::make_shared<unsigned>(0);
    sub->add_option("--levels", *levels, "levels n")->required()->delimiter(',');
    sub->add_option("--xi", *xis, "fixed frequencies")->delimiter(',');
    sub->add_option("--random-probes", *random, "extra seeded frequencies per level");
    handlers[sub] = [&g, levels, xis, random, &err] {
      const auto table = char_probe_table(*levels, *xis, *random, Seed{g.seed}, g.dist_limits(), g.threads);
      for (const auto& [n, xi] : table.rejected) {
        err << "charfn: skipped xi = " << xi << " at n = " << n << " (divisible by 3)\n";
      }
      Result r;
      r.params = {{"levels", *levels}, {"xi", *xis}, {"random_probes", *random}};
      std::ostringstream os;
      if (pick_format(g, "json") == "json") {
        ordered_json rows = ordered_json::array();
        for (const auto& row : table.rows) {
          rows.push_back({{"n", row.level},
                          {"xi", row.xi},
                          {"re", row.value.real()},
                          {"im", row.value.imag()},
                          {"abs", std::abs(row.value)}});
        }
        os << rows.dump(2) << '\n';
      } else {
        os << "n,xi,re,im,abs\n";
        for (const auto& row : table.rows) {
          os << row.level << ',' << row.xi << ',' << num(row.value.real()) << ',' << num(row.value.imag()) << ','
             << num(std::abs(row.value)) << '\n';
        }
      }
      r.data = os.str();
      return r;
    };
  }

  // charosc
  {
    auto* sub = app.add_subcommand("charosc", "|char_sum| <= Osc_{n-1,n} for all xi, levels 1..n-max");
    auto nmax = std::make_shared<unsigned>(6);
    sub->add_option("--n-max", *nmax, "largest level")->capture_default_str();
    handlers[sub] = [&g, nmax] {
      Result r;
      r.params = {{"n_max", *nmax}};
      std::ostringstream os;
      const bool csv = pick_format(g, "csv") == "csv";
      ordered_json rows = ordered_json::array();
      if (csv) os << "n,osc,max_abs_char,max_slack,frequencies,holds\n";
      bool all = true;
      for (unsigned n = 1; n <= *nmax; ++n) {
        const auto rep = char_osc_inequality_check(n, g.dist_limits());
        all = all && rep.holds;
        if (csv) {
          os << n << ',' << rational(rep.osc) << ',' << num(rep.max_abs_char) << ',' << num(rep.max_slack) << ','
             << rep.frequencies_checked << ',' << (rep.holds ? "true" : "false") << '\n';
        } else {
          rows.push_back({{"n", n},
                          {"osc", rational(rep.osc)},
                          {"max_abs_char", rep.max_abs_char},
                          {"max_slack", rep.max_slack},
                          {"frequencies", rep.frequencies_checked},
                          {"holds", rep.holds}});
        }
      }
      if (!csv) os << rows.dump(2) << '\n';
      r.data = os.str();
      r.summary = {{"holds", all}};
      return r;
    };
  }

  // valuation-tv
  {
    auto* sub = app.add_subcommand("valuation-tv", "d_TV between Syracuse valuations and Geom(2)^n");
    auto n = std::make_shared<unsigned>(4);
    auto ms = std::make_shared<std::vector<unsigned>>();
    sub->add_option("--n", *n, "tuple length")->required();
    sub->add_option("--m", *ms, "modulus exponents")->required()->delimiter(',');
    handlers[sub] = [&g, n, ms] {
      Result r;
      r.params = {{"n", *n}, {"m", *ms}};
      std::ostringstream os;
      const bool csv = pick_format(g, "csv") == "csv";
      ordered_json rows = ordered_json::array();
      if (csv) os << "n,m,tv,escaped_mass_model,escaped_mass_geom\n";
      for (unsigned m : *ms) {
        const auto rep = tv_valuation_vs_geom(*n, m, {}, g.threads);
        if (csv) {
          os << *n << ',' << m << ',' << rational(rep.tv) << ',' << rational(rep.escaped_mass_model) << ','
             << rational(rep.escaped_mass_geom) << '\n';
        } else {
          rows.push_back({{"n", *n},
                          {"m", m},
                          {"tv", rational(rep.tv)},
                          {"tv_float", rep.tv.get_d()},
                          {"escaped_mass_model", rational(rep.escaped_mass_model)},
                          {"escaped_mass_geom", rational(rep.escaped_mass_geom)}});
        }
      }
      if (!csv) os << rows.dump(2) << '\n';
      r.data = os.str();
      return r;
    };
  }

  // firstpass
  {
    auto* sub = app.add_subcommand("firstpass", "first passage below x from log-uniform starts");
    auto cfg = std::make_shared<ExperimentConfig>();
    auto cap = std::make_shared<std::uint64_t>(0);
    sub->add_option("--x", cfg->x, "threshold")->capture_default_str();
    sub->add_option("--alpha", cfg->alpha, "exponent > 1")->capture_default_str();
    sub->add_option("--samples", cfg->samples, "samples per y")->capture_default_str();
    sub->add_option("--cap", *cap, "iteration cap (default per start)");
    handlers[sub] = [&g, cfg, cap] {
      cfg->seed = Seed{g.seed};
      if (*cap) cfg->cap = *cap;
      const auto rep = passage_experiment(*cfg, g.threads);
      Result r;
      r.params = {{"x", cfg->x}, {"alpha", cfg->alpha}, {"samples", cfg->samples}};
      r.params["cap"] = *cap ? ordered_json(*cap) : ordered_json("default");
      ordered_json summary{{"x", cfg->x},
                           {"alpha", cfg->alpha},
                           {"tv", rational(rep.tv)},
                           {"tv_float", rep.tv.get_d()},
                           {"exhaustion_rate_y1", rep.exhaustion_rate_y1},
                           {"exhaustion_rate_y2", rep.exhaustion_rate_y2},
                           {"n0", cfg->n0()},
                           {"m0", cfg->m0()},
                           {"median_time_ratio", rep.median_time_ratio},
                           {"decay_probe_fraction", rep.decay_probe_fraction},
                           {"support_ok", passage_support_check(rep)}};
      std::ostringstream os;
      if (pick_format(g, "csv") == "csv") {
        os << "y_tag,N,time,location,predicted_time\n";
        for (const auto& s : rep.samples) {
          os << s.y_tag << ',' << s.start.get_str() << ','
             << (s.outcome.time ? std::to_string(*s.outcome.time) : std::string()) << ','
             << s.outcome.location.get_str() << ',' << num(s.predicted_time) << '\n';
        }
        r.summary = summary;
      } else {
        os << summary.dump(2) << '\n';
      }
      r.data = os.str();
      return r;
    };
  }

  // triangles / gridmap
  {
    auto* sub = app.add_subcommand("triangles", "triangle decomposition of the black set in a window");
    auto fa = std::make_shared<FreqArgs>();
    auto wa = std::make_shared<WindowArgs>();
    fa->add(sub);
    wa->add(sub);
    handlers[sub] = [&g, fa, wa] {
      const auto ctx = fa->context();
      GeometryLimits limits;
      limits.max_window_points = std::max<std::uint64_t>(1, g.budget_mb << 16);
      const auto d = decompose_black(ctx, wa->w, limits);
      Result r;
      fa->record(r.params);
      wa->record(r.params);
      std::ostringstream os;
      if (pick_format(g, "json") == "json") {
        ordered_json rows = ordered_json::array();
        for (const auto& t : d.triangles) {
          rows.push_back({{"corner_j", t.corner_j},
                          {"corner_l", t.corner_l},
                          {"size", t.size},
                          {"truncated", t.truncated}});
        }
        os << rows.dump(2) << '\n';
      } else {
        os << "corner_j,corner_l,size,truncated\n";
        for (const auto& t : d.triangles) {
          os << t.corner_j << ',' << t.corner_l << ',' << num(t.size) << ',' << (t.truncated ? "true" : "false")
             << '\n';
        }
      }
      r.data = os.str();
      r.summary = {{"black_points", d.black_points.size()},
                   {"partition_ok", d.partition_ok},
                   {"triangles_black", d.triangles_black},
                   {"corners_ok", d.corners_ok},
                   {"neighbourhood_white", d.neighbourhood_white},
                   {"strip_bound", strip_bound_check(ctx, d.black_points)}};
      r.summary["min_separation"] =
          std::isinf(d.min_separation) ? ordered_json(nullptr) : ordered_json(d.min_separation);
      return r;
    };
  }
  {
    auto* sub = app.add_subcommand("gridmap", "colour and theta numerator of every window point");
    auto fa = std::make_shared<FreqArgs>();
    auto wa = std::make_shared<WindowArgs>();
    fa->add(sub);
    wa->add(sub);
    handlers[sub] = [&g, fa, wa] {
      const auto ctx = fa->context();
      const Window& w = wa->w;
      if (w.points() > (g.budget_mb << 12)) throw WindowTooLarge("gridmap window exceeds the output budget");
      Result r;
      fa->record(r.params);
      wa->record(r.params);
      std::ostringstream os;
      const bool csv = pick_format(g, "csv") == "csv";
      ordered_json rows = ordered_json::array();
      if (csv) os << "j,l,color,theta_num\n";
      for (std::int64_t j = w.jmin; j <= w.jmax; ++j) {
        for (std::int64_t l = w.lmin; l <= w.lmax; ++l) {
          const char* color = color_name(classify(ctx, j, l));
          const std::int64_t t = theta(ctx, j, l).numerator;
          if (csv) {
            os << j << ',' << l << ',' << color << ',' << t << '\n';
          } else {
            rows.push_back({{"j", j}, {"l", l}, {"color", color}, {"theta_num", t}});
          }
        }
      }
      if (!csv) os << rows.dump(2) << '\n';
      r.data = os.str();
      return r;
    };
  }

  // renewal
  {
    auto* sub = app.add_subcommand("renewal", "Hold renewal walk: first passage above row s");
    auto s = std::make_shared<std::int64_t>(400);
    auto samples = std::make_shared<std::uint64_t>(100000);
    auto hold = std::make_shared<bool>(false);
    sub->add_option("--s", *s, "row threshold")->capture_default_str();
    sub->add_option("--samples", *samples, "walks")->capture_default_str();
    sub->add_flag("--hold", *hold, "sample single holding times instead");
    handlers[sub] = [&g, s, samples, hold] {
      if (*samples < 1) throw BadParameter("--samples must be >= 1");
      const auto hist = *hold ? hold_histogram(*samples, Seed{g.seed}, g.threads)
                              : renewal_histogram(*s, *samples, Seed{g.seed}, g.threads);
      Result r;
      r.params = {{"mode", *hold ? "hold" : "passage"}, {"samples", *samples}};
      if (!*hold) r.params["s"] = *s;
      double sj = 0, sl = 0;
      std::uint64_t tail = 0;
      for (const auto& [v, c] : hist) {
        sj += static_cast<double>(v.first) * static_cast<double>(c);
        sl += static_cast<double>(v.second) * static_cast<double>(c);
        if (*hold ? v == std::pair<std::int64_t, std::int64_t>{1, 3} : v.second - *s > 20) tail += c;
      }
      const double total = static_cast<double>(*samples);
      ordered_json summary{{"samples", *samples}, {"seed", g.seed}, {"mean_j", sj / total}, {"mean_l", sl / total}};
      summary[*hold ? "p_hold_1_3" : "p_overshoot_gt_20"] = static_cast<double>(tail) / total;
      std::ostringstream os;
      if (pick_format(g, "json") == "json") {
        os << summary.dump(2) << '\n';
      } else {
        os << "j,l,count\n";
        for (const auto& [v, c] : hist) os << v.first << ',' << v.second << ',' << c << '\n';
        r.summary = summary;
      }
      r.data = os.str();
      return r;
    };
  }

  // qest / whitebound
  {
    auto* sub = app.add_subcommand("qest", "Monte-Carlo estimate of Q(j, l)");
    auto fa = std::make_shared<FreqArgs>();
    auto j = std::make_shared<std::int64_t>(1);
    auto l = std::make_shared<std::int64_t>(0);
    auto samples = std::make_shared<std::uint64_t>(100000);
    fa->add(sub);
    sub->add_option("--j", *j)->required();
    sub->add_option("--l", *l)->required();
    sub->add_option("--samples", *samples)->capture_default_str();
    handlers[sub] = [&g, fa, j, l, samples] {
      const auto e = estimate_Q(fa->context(), *j, *l, *samples, Seed{g.seed}, g.threads);
      Result r;
      fa->record(r.params);
      r.params["j"] = *j;
      r.params["l"] = *l;
      r.params["samples"] = *samples;
      r.data = estimate_json(e).dump(2) + "\n";
      return r;
    };
  }
  {
    auto* sub = app.add_subcommand("whitebound", "Monte-Carlo white-hit bound on |char_sum|");
    auto fa = std::make_shared<FreqArgs>();
    auto samples = std::make_shared<std::uint64_t>(100000);
    fa->add(sub);
    sub->add_option("--samples", *samples)->capture_default_str();
    handlers[sub] = [&g, fa, samples] {
      const auto e = white_hit_bound(fa->context(), *samples, Seed{g.seed}, g.threads);
      Result r;
      fa->record(r.params);
      r.params["samples"] = *samples;
      r.data = estimate_json(e).dump(2) + "\n";
      return r;
    };
  }

  // selftest
  {
    auto* sub = app.add_subcommand("selftest", "exact-equality suite");
    auto corrupt = std::make_shared<bool>(false);
    sub->add_flag("--corrupt-dist", *corrupt, "test mode: corrupt the level-2 table first");
    handlers[sub] = [&g, corrupt] {
      SelftestOptions opts;
      opts.threads = g.threads;
      opts.corrupt_dist = *corrupt;
      const auto rep = run_selftest(opts);
      Result r;
      r.params = {{"corrupt_dist", *corrupt}};
      std::ostringstream os;
      if (g.format == "json") {
        ordered_json rows = ordered_json::array();
        for (const auto& c : rep.checks) rows.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        os << rows.dump(2) << '\n';
      } else {
        for (const auto& c : rep.checks) {
          os << (c.passed ? "PASS " : "FAIL ") << c.name;
          if (!c.passed) os << ": " << c.detail;
          os << '\n';
        }
      }
      r.data = os.str();
      r.summary = {{"passed", rep.passed()}, {"failures", rep.failures()}};
      r.exit_code = rep.passed() ? 0 : 1;
      return r;
    };
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    Result r = handlers.at(chosen)();
    ordered_json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["subcommand"] = chosen->get_name();
    manifest["params"] = r.params;
    manifest["format"] = g.format.empty() ? "default" : g.format;
    manifest["seed"] = g.seed;
    manifest["version"] = kVersion;
    manifest["outputs"] = ordered_json::array(
        {{{"path", g.out.empty() ? "-" : g.out}, {"bytes", r.data.size()}, {"sha256", sha256_hex(r.data)}}});
    if (!r.summary.is_null()) manifest["summary"] = r.summary;
    if (g.out.empty()) {
      out << r.data;
      err << manifest.dump(2) << '\n';
    } else {
      write_atomic(g.out, r.data);
      out << manifest.dump(2) << '\n';
    }
    return r.exit_code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.category() == Error::Category::Argument) err << chosen->help();
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace syrlab::cli
