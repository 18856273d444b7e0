#include <algorithm>
#include <cmath>
#include <numeric>

#include "catmouse/ctmc.hpp"
#include "catmouse/errors.hpp"
#include "catmouse/stationary_analysis.hpp"
#include "experiments.hpp"

namespace catmouse::runner {

namespace {

using namespace ctmc;

std::vector<double> checked_rhos(const Params& P) {
  auto rhos = P.reals("rho");
  for (double r : rhos)
    if (!(r > 0.0)) throw ConfigError(P.experiment() + ": every rho must be positive");
  return rhos;
}

double exp1_cdf(double x) { return x <= 0 ? 0.0 : -std::expm1(-x); }

void f_law(RunContext& ctx) {
  const auto& P = ctx.params;
  const auto rhos = checked_rhos(P);
  const auto n = static_cast<std::int64_t>(P.count("n"));
  const std::uint64_t replicas = P.count("replicas");
  if (n < 2 || replicas < 2) throw ConfigError("mminf-F: need n >= 2 and replicas >= 2");
  auto out = ctx.csv("samples.csv", {"rho", "replica", "value"});
  for (double rho : rhos) {
    const std::uint64_t seed = ctx.seed("F/" + cell(rho));
    const FSamples f = mminf_F_sample(rho, n, replicas, seed, ctx.workers());
    Verdict& v = ctx.add(ks_verdict("M(T_0)/n vs x^rho at rho=" + cell(rho), f.values,
                                    [rho](double x) { return x <= 0 ? 0.0 : x >= 1 ? 1.0 : std::pow(x, rho); }, 0.03));
    v.seed = seed;
    ctx.diagnostic("samples above 1+2/n at rho=" + cell(rho), static_cast<double>(f.above_bound));
    ctx.diagnostic("mean at rho=" + cell(rho), mean_se(f.values).mean, "limit rho/(rho+1)");
    for (std::size_t r = 0; r < f.values.size(); ++r) out.row(rho, static_cast<std::uint64_t>(r), f.values[r]);
  }
}

double factorial(std::int64_t k) { return std::tgamma(static_cast<double>(k) + 1.0); }

void hitting(RunContext& ctx) {
  const auto& P = ctx.params;
  const double rho = P.real("rho");
  const auto n = static_cast<std::int64_t>(P.count("n"));
  const std::uint64_t replicas = P.count("replicas");
  const auto down_n = static_cast<std::int64_t>(P.count("down_n"));
  const std::uint64_t down_replicas = P.count("down_replicas");
  const std::vector<double> trend = P.reals("trend_n");
  if (!(rho > 0.0) || n < 2 || n > 150 || replicas < 2 || down_n < 2 || down_replicas < 2)
    throw ConfigError("mminf-hitting: need rho > 0, 2 <= n <= 150, down_n >= 2, replicas >= 2");

  const std::uint64_t seed = ctx.seed("up");
  ctx.declare_work(static_cast<double>(replicas) * mminf_expected_jumps_up(rho, 0, n));
  const auto t = mminf_hitting_up(rho, 0, n, replicas, seed, ctx.workers(), ctx.step_budget());
  const MeanSe m = mean_se(t);
  const double scale = std::pow(rho, static_cast<double>(n)) / factorial(n - 1);
  Verdict& c = ctx.add(relative_error("E(T_n) rho^n/(n-1)! vs e^-rho", m.mean * scale, std::exp(-rho), 0.10));
  c.n1 = replicas;
  c.se = m.se * scale;
  c.seed = seed;
  c.note = "from x=0";
  ctx.diagnostic("exact scaled mean from 0", mminf_expected_hitting(rho, 0, n) * scale);
  ctx.diagnostic("exact scaled mean from n-1", mminf_expected_hitting(rho, n - 1, n) * scale);
  ctx.diagnostic("e^rho", std::exp(rho));
  std::vector<double> scaled;
  for (double x : t) scaled.push_back(x / m.mean);
  ctx.diagnostic("KS T_n/mean vs Exp(1)", ks_distance(scaled, exp1_cdf));

  const std::uint64_t dseed = ctx.seed("down");
  const auto d = mminf_hitting_down(rho, down_n, down_replicas, dseed, ctx.workers());
  const MeanSe dm = mean_se(d);
  const double logn = std::log(static_cast<double>(down_n));
  Verdict& dv = ctx.add(relative_error("T_0/log n from n vs 1", dm.mean / logn, 1.0, 0.10));
  dv.n1 = down_replicas;
  dv.se = dm.se / logn;
  dv.seed = dseed;
  ctx.diagnostic("exact E(T_0)/log n", mminf_expected_down(rho, down_n) / logn);

  auto out = ctx.csv("hitting.csv", {"kind", "n", "replica", "value"});
  for (std::size_t r = 0; r < t.size(); ++r) out.row("T_n", n, static_cast<std::uint64_t>(r), t[r]);
  for (std::size_t r = 0; r < d.size(); ++r) out.row("T_0", down_n, static_cast<std::uint64_t>(r), d[r]);
  auto tr = ctx.csv("down_trend.csv", {"n", "mean_T0_over_log_n", "se"});
  tr.row(down_n, dm.mean / logn, dm.se / logn);
  for (double nn : trend) {
    if (!(nn >= 2.0 && nn <= 9.0e15)) throw ConfigError("mminf-hitting: trend_n entries must lie in [2, 9e15]");
    const auto k = static_cast<std::int64_t>(nn);
    const auto s = mminf_hitting_down(rho, k, down_replicas, ctx.seed("trend/" + cell(nn)), ctx.workers());
    const MeanSe sm = mean_se(s);
    const double l = std::log(nn);
    tr.row(k, sm.mean / l, sm.se / l);
    ctx.diagnostic("T_0/log n at n=" + cell(nn), sm.mean / l);
  }
}

void time_change(RunContext& ctx) {
  const auto& P = ctx.params;
  const double rho = P.real("rho");
  const double t_max = P.real("t_max");
  const std::uint64_t replicas = P.count("replicas");
  const auto max_state = static_cast<std::size_t>(P.count("max_state"));
  const std::uint64_t min_holds = P.count("min_holds");
  if (!(rho > 0.0) || !(t_max > 0.0) || replicas < 1)
    throw ConfigError("mminf-time-change: need rho > 0, t_max > 0 and replicas >= 1");
  // Jumps per unit time stay below rho + 2 rho + 1 in the long run; declared generously.
  const double declared = static_cast<double>(replicas) * t_max * (3.0 * rho + 1.0);
  if (declared > ctx.step_budget()) throw BudgetExceeded("mminf-time-change: declared jumps above budget", declared, ctx.step_budget());
  ctx.declare_work(declared);
  const std::uint64_t seed = ctx.seed("pair");
  const TimeChangeReport rep = time_change_check(rho, t_max, replicas, seed, ctx.workers(), max_state);
  auto out = ctx.csv("holds.csv", {"process", "state", "count", "ks", "up_fraction"});
  for (std::size_t x = 0; x <= max_state; ++x) {
    const double rate = rho + static_cast<double>(x);
    auto cdf = [rate](double h) { return exp1_cdf(rate * h); };
    const auto& ms = rep.mouse[x];
    Verdict& v = ctx.add(ks_verdict("M(S(.)) holding time at state " + std::to_string(x) + " vs Exp(rho+x)", ms.holds, cdf, 0.03));
    v.seed = seed;
    if (ms.holds.size() < min_holds) v.pass = false, v.note = "fewer holds than min_holds";
    const double ks_cat = ks_distance(rep.cat[x].holds, cdf);
    ctx.diagnostic("cat holding KS at state " + std::to_string(x), ks_cat);
    out.row("mouse", static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(ms.holds.size()), v.value,
            static_cast<double>(ms.up) / static_cast<double>(std::max<std::uint64_t>(1, ms.up + ms.down)));
    out.row("cat", static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(rep.cat[x].holds.size()), ks_cat,
            static_cast<double>(rep.cat[x].up) / static_cast<double>(std::max<std::uint64_t>(1, rep.cat[x].up + rep.cat[x].down)));
  }
  ctx.diagnostic("mean U(t)/t", mean_se(rep.u_over_t).mean);
  ctx.diagnostic("apart holds KS vs Exp(1) after rate scaling", ks_distance(rep.apart_holds_rate_scaled, exp1_cdf));
  ctx.diagnostic("partial trajectories", static_cast<double>(rep.partial));
}

void cascade(RunContext& ctx) {
  const auto& P = ctx.params;
  const auto rhos = checked_rhos(P);
  const auto rounds = P.reals("rounds");
  const auto n = static_cast<std::int64_t>(P.count("n"));
  const std::uint64_t replicas = P.count("replicas");
  const std::vector<double> trend = P.reals("trend_n");
  if (rounds.size() != rhos.size()) throw ConfigError("mminf-cascade: rounds needs one entry per rho");
  const auto min_level = static_cast<std::int64_t>(P.count("min_level"));
  if (n < 20 || replicas < 2 || min_level < 1 || min_level > n)
    throw ConfigError("mminf-cascade: need n >= 20, replicas >= 2 and 1 <= min_level <= n");
  auto out = ctx.csv("cascade.csv", {"rho", "replica", "round", "level"});
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    const double rho = rhos[i];
    const int p = static_cast<int>(rounds[i]);
    if (p < 1 || rounds[i] != p) throw ConfigError("mminf-cascade: rounds must be positive integers");
    const std::uint64_t seed = ctx.seed("cascade/" + cell(rho));
    const auto recs = multiplicative_cascade(rho, n, p, replicas, seed, ctx.workers());
    // A round enters the pool when its start level is at least min_level.
    // Given that level the round is independent of the past, so the selection
    // does not bias the decrement.
    std::vector<double> pooled, first, second, log_level;
    std::uint64_t zero_ends = 0;
    for (const auto& r : recs) {
      for (int k = 1; k <= p && static_cast<std::size_t>(k) < r.levels.size(); ++k) {
        const auto from = r.levels[static_cast<std::size_t>(k - 1)], to = r.levels[static_cast<std::size_t>(k)];
        if (from < min_level) break;
        if (to <= 0) {
          ++zero_ends;
          break;
        }
        pooled.push_back(std::log(static_cast<double>(from) / static_cast<double>(to)));
      }
      if (r.levels.size() > 2 && r.levels[1] >= min_level && r.levels[2] > 0) {
        first.push_back(std::log(static_cast<double>(r.levels[0]) / static_cast<double>(r.levels[1])));
        second.push_back(std::log(static_cast<double>(r.levels[1]) / static_cast<double>(r.levels[2])));
      }
      if (r.levels.size() > static_cast<std::size_t>(p) && r.levels[static_cast<std::size_t>(p)] > 0)
        log_level.push_back(std::log(static_cast<double>(r.levels[static_cast<std::size_t>(p)]) / static_cast<double>(n)));
    }
    for (std::size_t r = 0; r < recs.size(); ++r)
      for (std::size_t k = 0; k < recs[r].levels.size(); ++k)
        out.row(rho, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(k), recs[r].levels[k]);
    Verdict& v = ctx.add(mean_within_sigma("log decrement per round vs 1/rho at rho=" + cell(rho), pooled, 1.0 / rho));
    v.seed = seed;
    v.note = "rounds 1.." + std::to_string(p) + " starting at level >= " + std::to_string(min_level);
    ctx.diagnostic("rounds from level >= min_level ending at 0, rho=" + cell(rho), static_cast<double>(zero_ends));
    ctx.diagnostic("E log(M_p/n) at rho=" + cell(rho), mean_se(log_level).mean, "limit -p/rho, positive levels only");
    if (first.size() > 2) {
      const MeanSe a = mean_se(first), b = mean_se(second);
      double cov = 0.0;
      for (std::size_t j = 0; j < first.size(); ++j) cov += (first[j] - a.mean) * (second[j] - b.mean);
      cov /= static_cast<double>(first.size() - 1);
      ctx.diagnostic("correlation of successive decrements at rho=" + cell(rho), cov / (a.sd * b.sd));
    }
    if (trend.size() == 2) {
      double means[2];
      for (int j = 0; j < 2; ++j) {
        const auto tn = static_cast<std::int64_t>(trend[static_cast<std::size_t>(j)]);
        const auto tr = multiplicative_cascade(rho, tn, 1, replicas, ctx.seed("trend/" + cell(rho) + "/" + cell(trend[static_cast<std::size_t>(j)])), ctx.workers());
        std::vector<double> rf;
        for (const auto& r : tr) rf.push_back(static_cast<double>(r.rounds_to_floor));
        means[j] = mean_se(rf).mean;
      }
      ctx.diagnostic("rounds-to-floor difference at rho=" + cell(rho), means[1] - means[0],
                     "rho log(n2/n1) = " + cell(rho * std::log(trend[1] / trend[0])));
    }
  }
}

void occupation(RunContext& ctx) {
  const auto& P = ctx.params;
  const double rho = P.real("rho");
  const double t_max = P.real("t_max");
  const std::uint64_t replicas = P.count("replicas");
  const auto K = static_cast<std::size_t>(P.count("truncation"));
  const auto w = static_cast<std::size_t>(P.count("max_state"));
  if (!(rho > 0.0) || !(t_max > 0.0) || replicas < 2 || K < w + 4 || K > 18)
    throw ConfigError("mminf-occupation: need rho > 0, t_max > 0, replicas >= 2, max_state + 4 <= truncation <= 18");
  const std::uint64_t seed = ctx.seed("pair");
  const PairOccupation occ = pair_occupation(rho, t_max, replicas, seed, ctx.workers(), w);
  Eigen::MatrixXd Pm = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K + 1), static_cast<Eigen::Index>(K + 1));
  for (std::size_t x = 0; x <= K; ++x) {
    const double up = rho / (rho + static_cast<double>(x));
    const auto i = static_cast<Eigen::Index>(x);
    (x < K ? Pm(i, i + 1) : Pm(i, i)) += up;
    if (x > 0) Pm(i, i - 1) = 1.0 - up;
    else Pm(i, i) += 1.0 - up;
  }
  const NuTable nt = nu_exact(FiniteChain(Pm, ChainOptions{true, true}));
  std::vector<double> total(w * w + 2 * w + 1, 0.0);
  for (const auto& r : occ.table)
    for (std::size_t i = 0; i < r.size(); ++i) total[i] += r[i];
  const std::size_t side = w + 1;
  auto out = ctx.csv("occupation.csv", {"x", "y", "relative_time", "relative_nu_over_rate"});
  double worst = 0.0;
  for (std::size_t x = 0; x < side; ++x)
    for (std::size_t y = 0; y < side; ++y) {
      const double a = total[x * side + y] / total[0];
      const double b = nt.nu(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) / (rho + static_cast<double>(x)) /
                       (nt.nu(0, 0) / rho);
      worst = std::max(worst, std::abs(a / b - 1.0));
      out.row(static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y), a, b);
    }
  Verdict& v = ctx.add(make_verdict("time at (x,y) proportional to nu(x,y)/(rho+x)", "max-rel-error", worst,
                                    P.real("tolerance")));
  v.n1 = replicas;
  v.seed = seed;
  ctx.diagnostic("mean together fraction", mean_se(occ.together_fraction).mean);
}

}  // namespace

std::vector<Experiment> mminf_experiments() {
  return {
      {"mminf-F",
       "relative level of the mouse after one round trip of the cat",
       {{"rho", "1,2", "arrival rates"}, {"n", "1000", "start level"}, {"replicas", "10000", "replicas per rho"}},
       f_law},
      {"mminf-hitting",
       "upward hitting constant and downward hitting time",
       {{"rho", "1", "arrival rate"},
        {"n", "10", "upward target"},
        {"replicas", "20000", "upward replicas"},
        {"down_n", "10000", "start of the downward runs"},
        {"down_replicas", "10000", "downward replicas"},
        {"trend_n", "1e6,1e9,1e12", "extra downward start levels, reported only"}},
       hitting},
      {"mminf-time-change",
       "mouse observed on the together clock against the cat",
       {{"rho", "1", "arrival rate"},
        {"t_max", "200000", "time horizon"},
        {"replicas", "64", "pair runs"},
        {"max_state", "2", "largest state checked"},
        {"min_holds", "100000", "holds required at each checked state"}},
       time_change},
      {"mminf-cascade",
       "successive multiplicative jumps of the mouse level",
       {{"rho", "1,2", "arrival rates"},
        {"rounds", "3,5", "rounds pooled, one entry per rho"},
        {"n", "10000", "start level"},
        {"min_level", "1000", "rounds starting below this level are not pooled"},
        {"replicas", "4000", "replicas per rho"},
        {"trend_n", "500,2000", "two start levels for the rounds-to-floor trend, reported only"}},
       cascade},
      {"mminf-occupation",
       "occupation times of the pair against the invariant measure",
       {{"rho", "1", "arrival rate"},
        {"t_max", "20000", "time horizon"},
        {"replicas", "64", "pair runs"},
        {"max_state", "3", "largest state in the table"},
        {"truncation", "12", "truncation of the embedded chain for nu"},
        {"tolerance", "0.05", "largest relative error"}},
       occupation},
  };
}

}  // namespace catmouse::runner
