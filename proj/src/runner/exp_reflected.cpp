#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

#include "catmouse/errors.hpp"
#include "catmouse/reflected.hpp"
#include "experiments.hpp"

namespace catmouse::runner {

namespace {

using namespace reflected;

double checked_p(const Params& P) {
  const double p = P.real("p");
  if (!(p > 0.0 && p < 0.5)) throw ConfigError(P.experiment() + ": p must lie in (0, 1/2)");
  return p;
}

void hitting(RunContext& ctx) {
  const auto& P = ctx.params;
  const double p = checked_p(P);
  const double rho = rho_of(p);
  const auto n = static_cast<int>(P.count("n"));
  const std::uint64_t replicas = P.count("replicas");
  const auto down_n = static_cast<std::int64_t>(P.count("down_n"));
  const std::uint64_t down_replicas = P.count("down_replicas");
  if (n < 1 || n > 60 || replicas < 2 || down_n < 1 || down_replicas < 1)
    throw ConfigError("reflected-hitting: need 1 <= n <= 60, replicas >= 2, down_n >= 1, down_replicas >= 1");
  const double exact = expected_hitting_up(p, n);
  const double down_steps = static_cast<double>(down_replicas) * downward_rate(p) * static_cast<double>(down_n);
  check_budget("reflected-hitting downward runs", down_steps, ctx.step_budget());
  ctx.declare_work(static_cast<double>(replicas) * exact + down_steps);

  const std::uint64_t seed = ctx.seed("up");
  const auto t = hitting_time_up(p, n, replicas, seed, ctx.workers(), ctx.step_budget());
  const MeanSe m = mean_se(t);
  const double rn = std::pow(rho, n);
  Verdict& a = ctx.add(relative_error("mean(T_n) rho^n vs (1+rho)/(1-rho)^2", m.mean * rn, limit_constant(p), 0.05));
  a.n1 = replicas;
  a.se = m.se * rn;
  a.seed = seed;
  std::vector<double> scaled;
  scaled.reserve(t.size());
  for (double x : t) scaled.push_back(x / m.mean);
  Verdict& k = ctx.add(ks_verdict("T_n/mean vs Exp(1)", scaled, [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); }, 0.03));
  k.seed = seed;
  ctx.diagnostic("exact E_0(T_n) rho^n", exact * rn);

  const std::uint64_t dseed = ctx.seed("down");
  std::vector<double> down(down_replicas);
  const ReflectedWalk walk(p);
  for (std::uint64_t r = 0; r < down_replicas; ++r) {
    Stream rng = replica_stream(dseed, 0, r);
    down[r] = static_cast<double>(downward_hitting_time(walk, down_n, rng)) / static_cast<double>(down_n);
  }
  const MeanSe d = mean_se(down);
  Verdict& dv = ctx.add(relative_error("T_0/n from n vs (1+rho)/(1-rho)", d.mean, downward_rate(p), 0.02));
  dv.n1 = down_replicas;
  dv.se = d.se;
  dv.seed = dseed;

  auto out = ctx.csv("hitting.csv", {"kind", "replica", "n", "value"});
  for (std::size_t r = 0; r < t.size(); ++r) out.row("rho_n_T_n", static_cast<std::uint64_t>(r), n, t[r] * rn);
  for (std::size_t r = 0; r < down.size(); ++r) out.row("T_0_over_n", static_cast<std::uint64_t>(r), down_n, down[r]);
}

void free_jump(RunContext& ctx) {
  const auto& P = ctx.params;
  const double p = checked_p(P);
  const double rho = rho_of(p);
  const std::uint64_t count = P.count("samples");
  const std::vector<double> thetas = P.reals("thetas");
  if (count < 2) throw ConfigError("reflected-free-jump: need samples >= 2");
  const std::uint64_t seed = ctx.seed("free");
  const auto jumps = free_jump_samples(p, count, seed, ctx.workers());
  std::vector<double> values(jumps.begin(), jumps.end()), moments;
  moments.reserve(jumps.size());
  for (auto k : jumps) moments.push_back(std::pow(rho, -static_cast<double>(k)));
  Verdict& m = ctx.add(mean_within_sigma("mean of M'inf vs -1/rho", values, -1.0 / rho));
  m.seed = seed;
  Verdict& e = ctx.add(mean_within_sigma("E rho^(-M'inf) vs 1", moments, 1.0));
  e.seed = seed;
  const auto cf = empirical_char_function(values, thetas);
  for (const auto& c : cf) {
    const auto exact = free_jump_gf(rho, std::polar(1.0, c.theta));
    Verdict& v = ctx.add(make_verdict("characteristic function at theta=" + cell(c.theta), "char-function",
                                      char_function_z(c, exact), 3.0));
    v.n1 = count;
    v.seed = seed;
    v.estimate = std::abs(c.value);
    v.target = std::abs(exact);
  }
  std::map<std::int64_t, std::uint64_t> hist;
  for (auto k : jumps) ++hist[k];
  std::vector<std::int64_t> ints(jumps.begin(), jumps.end());
  ctx.diagnostic("discrete KS vs exact law", ks_distance_discrete(ints, [rho](std::int64_t k) { return free_jump_cdf(rho, k); }));
  auto out = ctx.csv("free_jump_pmf.csv", {"k", "count", "frequency", "pmf"});
  for (const auto& [k, c] : hist)
    out.row(k, c, static_cast<double>(c) / static_cast<double>(count), free_jump_pmf(rho, k));
}

void w_growth(RunContext& ctx) {
  const auto& P = ctx.params;
  const double p = checked_p(P);
  const std::uint64_t small = P.count("small");
  const std::uint64_t large = P.count("large");
  if (small < 2 || large <= small) throw ConfigError("reflected-w: need 2 <= small < large");
  const std::uint64_t seed = ctx.seed("W");
  const auto ws = w_samples(p, large, seed, ctx.workers());
  std::vector<double> v;
  v.reserve(ws.size());
  double tail = 0.0;
  for (const auto& s : ws) v.push_back(s.value), tail = std::max(tail, s.tail_ratio);
  double sum_small = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) (i < small ? sum_small : sum) += v[i];
  sum += sum_small;
  const double mean_small = sum_small / static_cast<double>(small), mean_large = sum / static_cast<double>(large);
  Verdict& r = ctx.add(make_verdict("running mean of W grows from small to large", "mean-ratio",
                                    mean_large / mean_small, 1.5, Bound::at_least));
  r.n1 = small;
  r.n2 = large;
  r.estimate = mean_large;
  r.target = mean_small;
  r.seed = seed;
  ctx.diagnostic("median W", quantile(v, 0.5));
  ctx.diagnostic("Hill tail index (k = small)", hill_tail_index(v, static_cast<std::size_t>(small)), "index 1 expected");
  ctx.diagnostic("max tail ratio", tail, "truncation error bound factor");
  auto out = ctx.csv("w_quantiles.csv", {"q", "value"});
  for (double q : {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999}) out.row(q, quantile(v, q));
  auto rm = ctx.csv("w_running_mean.csv", {"samples", "mean"});
  double acc = 0.0;
  for (std::size_t i = 0, next = 10; i < v.size(); ++i) {
    acc += v[i];
    if (i + 1 == next || i + 1 == v.size()) {
      rm.row(static_cast<std::uint64_t>(i + 1), acc / static_cast<double>(i + 1));
      next *= 10;
    }
  }
}

// Largest C with n |profile - 1| <= C over the uncensored profile entries.
double profile_constant(const std::vector<CollapseRecord>& recs, int n) {
  double c = 0.0;
  for (const auto& r : recs)
    for (double x : r.profile)
      if (std::isfinite(x)) c = std::max(c, n * std::abs(x - 1.0));
  return c;
}

void collapse(RunContext& ctx) {
  const auto& P = ctx.params;
  const double p = checked_p(P);
  const double rho = rho_of(p);
  const auto n = static_cast<int>(P.count("n"));
  const std::uint64_t replicas = P.count("replicas");
  const std::uint64_t w_count = P.count("w_samples");
  CollapseConfig cfg;
  cfg.censor = P.real("censor");
  cfg.t_grid = P.reals("t_grid");
  cfg.step_budget = ctx.step_budget();
  if (n < 4 || replicas < 2 || w_count < 2 || !(cfg.censor > 0.0))
    throw ConfigError("reflected-collapse: need n >= 4, replicas >= 2, w_samples >= 2 and censor > 0");
  const double declared = collapse_declared_steps(p, n, replicas, cfg) + collapse_declared_steps(p, n - 2, replicas, cfg);
  check_budget("reflected-collapse", declared, ctx.step_budget());
  ctx.declare_work(declared);

  const std::uint64_t seed = ctx.seed("collapse");
  const auto recs = collapse_experiment(p, n, replicas, seed, ctx.workers(), cfg);
  const std::uint64_t wseed = ctx.seed("W");
  const auto ws = w_samples(p, w_count, wseed, ctx.workers());
  std::vector<double> h0, w, t1;
  std::vector<std::int64_t> jumps;
  std::uint64_t censored = 0;
  for (const auto& r : recs) {
    h0.push_back(std::min(r.rho_n_H0, cfg.censor));
    censored += r.censored ? 1 : 0;
    if (std::isfinite(r.rho_n_t1)) t1.push_back(r.rho_n_t1), jumps.push_back(r.jump);
  }
  for (const auto& s : ws) w.push_back(std::min(s.value, cfg.censor));
  Verdict& k = ctx.add(ks_two_sample_verdict("rho^n H_0 vs W, both censored", h0, w, 0.05));
  k.seed = seed;
  k.note = "censor " + cell(cfg.censor);
  const double jks = ks_distance_discrete(jumps, [rho](std::int64_t j) { return free_jump_cdf(rho, j); });
  Verdict& j = ctx.add(make_verdict("M_t1 - n vs M'inf", "KS", jks, 0.03));
  j.n1 = jumps.size();
  j.seed = seed;
  j.note = "exact law of M'inf";
  ctx.diagnostic("censored runs", static_cast<double>(censored));
  ctx.diagnostic("KS rho^n t_1 vs exponential", ks_distance(t1, [p](double x) {
                   return x <= 0 ? 0.0 : -std::expm1(-x / limit_constant(p));
                 }), "mean (1+rho)/(1-rho)^2");

  const auto calib = collapse_experiment(p, n - 2, replicas, ctx.seed("calibration"), ctx.workers(), cfg);
  const double C = profile_constant(calib, n - 2);
  std::uint64_t inside = 0, total = 0;
  for (const auto& r : recs)
    for (double x : r.profile)
      if (std::isfinite(x)) ++total, inside += n * std::abs(x - 1.0) <= C ? 1 : 0;
  ctx.diagnostic("profile constant C fitted at n-2", C);
  ctx.diagnostic("profile coverage of [1-C/n, 1+C/n] at n", total ? static_cast<double>(inside) / static_cast<double>(total) : NAN);

  auto out = ctx.csv("collapse.csv", {"replica", "n", "rho_n_H0", "censored", "rho_n_t1", "jump"});
  for (std::size_t r = 0; r < recs.size(); ++r)
    out.row(static_cast<std::uint64_t>(r), n, recs[r].rho_n_H0, recs[r].censored ? 1 : 0, recs[r].rho_n_t1, recs[r].jump);
  auto prof = ctx.csv("profile.csv", {"replica", "n", "t", "profile"});
  for (std::size_t r = 0; r < recs.size(); ++r)
    for (std::size_t g = 0; g < cfg.t_grid.size(); ++g)
      if (std::isfinite(recs[r].profile[g])) prof.row(static_cast<std::uint64_t>(r), n, cfg.t_grid[g], recs[r].profile[g]);
}

void oscillation(RunContext& ctx) {
  const auto& P = ctx.params;
  const double p = checked_p(P);
  const auto n_small = static_cast<int>(P.count("n_small"));
  const auto n_large = static_cast<int>(P.count("n_large"));
  const double s = P.real("s"), t = P.real("t");
  const std::uint64_t replicas = P.count("replicas");
  if (n_small < 1 || n_large <= n_small || !(s >= 0.0 && t > s) || replicas < 1)
    throw ConfigError("reflected-oscillation: need 1 <= n_small < n_large, 0 <= s < t, replicas >= 1");
  const OscillationResult a = oscillation_probe(p, n_small, s, t, replicas, ctx.seed("small"), ctx.workers(), ctx.step_budget());
  const OscillationResult b = oscillation_probe(p, n_large, s, t, replicas, ctx.seed("large"), ctx.workers(), ctx.step_budget());
  Verdict& v = ctx.add(make_verdict("estimate at n_large exceeds n_small", "one-sided-z",
                                    trend_z(a.hits_window, a.replicas, b.hits_window, b.replicas), 1.6448536269514722,
                                    Bound::at_least));
  v.n1 = a.replicas;
  v.n2 = b.replicas;
  v.estimate = b.estimate_window;
  v.target = a.estimate_window;
  auto out = ctx.csv("oscillation.csv", {"n", "replicas", "hits_window", "estimate_window", "wilson_lo", "wilson_hi",
                                         "hits_from_zero", "estimate_from_zero"});
  for (const auto& [n, r] : {std::pair{n_small, &a}, std::pair{n_large, &b}})
    out.row(n, r->replicas, r->hits_window, r->estimate_window, r->wilson_window.lo, r->wilson_window.hi,
            r->hits_from_zero, r->estimate_from_zero);
}

}  // namespace

double char_function_z(const CharValue& c, std::complex<double> exact) {
  const double zr = c.se_re > 0 ? std::abs(c.value.real() - exact.real()) / c.se_re : (c.value.real() == exact.real() ? 0 : INFINITY);
  const double zi = c.se_im > 0 ? std::abs(c.value.imag() - exact.imag()) / c.se_im : (c.value.imag() == exact.imag() ? 0 : INFINITY);
  return std::max(zr, zi);
}

std::vector<Experiment> reflected_experiments() {
  return {
      {"reflected-hitting",
       "upward hitting time on the exponential scale and the downward rate",
       {{"p", "0.3", "up probability"},
        {"n", "15", "target level"},
        {"replicas", "10000", "upward replicas"},
        {"down_n", "10000", "start level of the downward runs"},
        {"down_replicas", "1000", "downward replicas"}},
       hitting},
      {"reflected-free-jump",
       "jump law of the free process",
       {{"p", "0.3", "up probability"}, {"samples", "1000000", "samples"}, {"thetas", "0.5,1", "characteristic function points"}},
       free_jump},
      {"reflected-w",
       "growth of the running mean of the heavy-tailed W",
       {{"p", "0.3", "up probability"},
        {"small", "10000", "samples in the first mean"},
        {"large", "1000000", "samples in the second mean"}},
       w_growth},
      {"reflected-collapse",
       "mouse's time to the origin, first jump and level profile",
       {{"p", "0.3", "up probability"},
        {"n", "12", "start level of cat and mouse"},
        {"replicas", "5000", "replicas"},
        {"w_samples", "100000", "reference W samples"},
        {"censor", "200", "runs stop at censor * rho^-n steps"},
        {"t_grid", "0,0.25,0.5,1,2,4", "profile times on the rho^-n scale"}},
       collapse},
      {"reflected-oscillation",
       "probability that the mouse reaches n/2 within the window, at two levels",
       {{"p", "0.35", "up probability"},
        {"n_small", "8", "smaller level"},
        {"n_large", "12", "larger level"},
        {"s", "0.5", "window start"},
        {"t", "2", "window end"},
        {"replicas", "100000", "replicas per level"}},
       oscillation},
  };
}

}  // namespace catmouse::runner
