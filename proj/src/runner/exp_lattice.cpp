#include <algorithm>
#include <cmath>
#include <numbers>

#include "catmouse/errors.hpp"
#include "catmouse/lattice.hpp"
#include "catmouse/oracles.hpp"
#include "experiments.hpp"

namespace catmouse::runner {

namespace {

using namespace lattice;

void lemma_localtime(RunContext& ctx) {
  const auto& P = ctx.params;
  const std::uint64_t n = P.count("n");
  const std::uint64_t replicas = P.count("replicas");
  const std::vector<double> grid = P.reals("t_grid");
  const double t_check = P.real("t");
  if (n < 16 || replicas < 2) throw ConfigError("lemma-localtime: need n >= 16 and replicas >= 2");
  const auto at = std::find(grid.begin(), grid.end(), t_check);
  if (at == grid.end()) throw ConfigError("lemma-localtime: t must be one of t_grid");
  const std::uint64_t seed = ctx.seed("meetings");
  const auto samples = meeting_counter(n, grid, replicas, seed, ctx.workers());

  auto out = ctx.csv("localtime.csv", {"t", "replica", "u_over_sqrt_n"});
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t r = 0; r < replicas; ++r) out.row(grid[g], static_cast<std::uint64_t>(r), samples[g][r]);

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double t = grid[g];
    std::vector<double> scaled;
    scaled.reserve(replicas);
    for (double u : samples[g]) scaled.push_back(2.0 * u);
    if (t <= 0.0) continue;
    const double ks = ks_distance(scaled, [t](double x) { return oracle::half_normal_cdf(x, t); });
    if (t == t_check) {
      Verdict& v = ctx.add(make_verdict("2u/sqrt(n) vs half-normal at t", "KS", ks, 0.03));
      v.n1 = replicas;
      v.seed = seed;
      v.note = "t=" + cell(t);
      const MeanSe m = mean_se(samples[g]);
      ctx.diagnostic("mean u/sqrt(n) at t", m.mean, "limit sqrt(t/(2 pi)) = " + cell(std::sqrt(t / (2 * std::numbers::pi))));
      ctx.diagnostic("se of mean u/sqrt(n) at t", m.se);
    } else {
      ctx.diagnostic("KS half-normal at t=" + cell(t), ks);
    }
  }
}

void srws(RunContext& ctx) {
  const auto& P = ctx.params;
  const std::uint64_t n = P.count("n");
  const std::uint64_t replicas = P.count("replicas");
  const double t = P.real("t");
  if (n < 16 || replicas < 2 || !(t > 0.0)) throw ConfigError("srws: need n >= 16, replicas >= 2 and t > 0");
  const std::uint64_t seed = ctx.seed("mouse");
  const auto xs = scaling_1d(n, t, replicas, seed, ctx.workers());
  Verdict& ks = ctx.add(ks_verdict("M/n^(1/4) vs B1(L_B2(t))", xs,
                                   [t](double x) { return oracle::brownian_at_local_time_cdf(x, t); }, 0.05));
  ks.seed = seed;
  Verdict& m = ctx.add(mean_within_sigma("mean of M/n^(1/4)", xs, 0.0));
  m.seed = seed;
  double second = 0.0;
  for (double x : xs) second += x * x;
  ctx.diagnostic("second moment", second / static_cast<double>(xs.size()),
                 "limit t^(1/2) sqrt(2/pi) = " + cell(std::sqrt(t) * std::sqrt(2.0 / std::numbers::pi)));
  auto out = ctx.csv("samples.csv", {"replica", "value"});
  for (std::size_t r = 0; r < xs.size(); ++r) out.row(static_cast<std::uint64_t>(r), xs[r]);
}

void dirichlet(RunContext& ctx) {
  const auto& P = ctx.params;
  const auto radius = static_cast<int>(P.count("radius"));
  const std::uint64_t excursions = P.count("excursions");
  const std::uint64_t meetings = P.count("meetings");
  const auto box = static_cast<int>(P.count("mc_radius"));
  if (radius < 20 || box < 20) throw ConfigError("dirichlet: radius and mc_radius must be at least 20");
  if (excursions < 2 || meetings < 2) throw ConfigError("dirichlet: need at least 2 excursions and meetings");

  const DirichletSolution a = solve_dirichlet(radius), b = solve_dirichlet(2 * radius);
  const ReturnKernel rich = richardson(a, b);
  const double stability = std::max({std::abs(a.r.same - b.r.same), std::abs(a.r.opposite - b.r.opposite),
                                     std::abs(a.r.perp - b.r.perp)});
  Verdict& s = ctx.add(make_verdict("r-values stable across radii R and 2R", "max-abs-error", stability, 5e-4));
  s.note = "R=" + std::to_string(radius);
  ctx.diagnostic("harmonic residual at R", harmonic_residual(a));
  ctx.diagnostic("harmonic residual at 2R", harmonic_residual(b));
  ctx.diagnostic("Richardson row sum - 1", rich.sum() - 1.0);

  const std::uint64_t mc_seed = ctx.seed("return-kernel");
  const DirichletSolution at_box = solve_dirichlet(box);
  const ReturnKernelMc mc = return_kernel_mc(excursions, box, mc_seed, ctx.workers());
  const double z = std::max({std::abs(mc.estimate.same - at_box.r.same) / mc.se.same,
                             std::abs(mc.estimate.opposite - at_box.r.opposite) / mc.se.opposite,
                             std::abs(mc.estimate.perp - at_box.r.perp) / mc.se.perp});
  Verdict& m = ctx.add(make_verdict("Dirichlet r-values vs Monte Carlo at the same box", "max-z", z, 3.0));
  m.n1 = excursions;
  m.seed = mc_seed;
  m.note = "box radius " + std::to_string(box);
  ctx.diagnostic("excursions reaching the box", static_cast<double>(mc.exits));

  const RelativeChain rc = build_relative_chain(rich);
  const std::uint64_t dm_seed = ctx.seed("relative-visits");
  const DiagMassMc dm = relative_visits_mc(meetings, box, dm_seed, ctx.workers());
  Verdict& d = ctx.add(make_verdict("mu_R diagonal mass vs pair simulation", "mean-3sigma",
                                    std::abs(dm.estimate - rc.diag_mass) / dm.se, 3.0));
  d.n1 = dm.visits;
  d.se = dm.se;
  d.estimate = dm.estimate;
  d.target = rc.diag_mass;
  d.seed = dm_seed;
  ctx.diagnostic("alpha0", rc.alpha0());

  auto k = ctx.csv("return_kernel.csv", {"source", "radius", "same", "opposite", "perp", "se_same", "se_opposite", "se_perp"});
  k.row("solve", radius, a.r.same, a.r.opposite, a.r.perp, 0.0, 0.0, 0.0);
  k.row("solve", 2 * radius, b.r.same, b.r.opposite, b.r.perp, 0.0, 0.0, 0.0);
  k.row("richardson", 2 * radius, rich.same, rich.opposite, rich.perp, 0.0, 0.0, 0.0);
  k.row("solve", box, at_box.r.same, at_box.r.opposite, at_box.r.perp, 0.0, 0.0, 0.0);
  k.row("monte-carlo", box, mc.estimate.same, mc.estimate.opposite, mc.estimate.perp, mc.se.same, mc.se.opposite,
        mc.se.perp);

  auto h = ctx.csv("residual_history.csv", {"radius", "sweep", "residual"});
  for (const auto* sol : {&a, &b})
    for (std::size_t i = 0; i < sol->residual_history.size(); ++i)
      h.row(sol->radius, static_cast<std::int64_t>((i + 1) * static_cast<std::size_t>(sol->checkpoint_every)),
            sol->residual_history[i]);

  auto q = ctx.csv("relative_chain.csv", {"from", "to", "probability", "mu_R_from"});
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j)
      if (rc.kernel.p(i, j) != 0.0) q.row(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j), rc.kernel.p(i, j), rc.mu_R[i]);
}

void plane_marginal(RunContext& ctx) {
  const auto& P = ctx.params;
  const double n = P.real("n");
  const double t = P.real("t");
  const std::uint64_t replicas = P.count("replicas");
  const auto radius = static_cast<int>(P.count("radius"));
  if (replicas < 2 || radius < 20) throw ConfigError("plane-marginal: need replicas >= 2 and radius >= 20");
  const RelativeChain rc = build_relative_chain(solve_dirichlet(radius).r);
  const double a0 = rc.alpha0();
  const std::uint64_t seed = ctx.seed("mouse");
  const auto xs = scaling_2d_marginal(n, t, replicas, seed, ctx.workers());
  Verdict& v = ctx.add(ks_verdict("first coordinate vs bilateral exponential", xs,
                                  [&](double x) { return oracle::bilateral_exponential_cdf(x, a0, t); }, 0.08));
  v.seed = seed;
  v.note = "N = floor(e^(n t)) = " + cell(std::floor(std::exp(n * t)));
  ctx.diagnostic("alpha0", a0);
  const MeanSe m = mean_se(xs);
  ctx.diagnostic("mean", m.mean);
  auto out = ctx.csv("samples.csv", {"replica", "value"});
  for (std::size_t r = 0; r < xs.size(); ++r) out.row(static_cast<std::uint64_t>(r), xs[r]);
}

}  // namespace

std::vector<Experiment> lattice_experiments() {
  return {
      {"lemma-localtime",
       "meeting counter of the pair on Z against the half-normal local time",
       {{"n", "67108864", "time scale, 4^13"},
        {"replicas", "10000", "replicas"},
        {"t_grid", "0.25,0.5,1,2", "times t at which u_floor(nt) is read"},
        {"t", "1", "time of the KS verdict"}},
       lemma_localtime},
      {"srws",
       "mouse position on Z scaled by n^(1/4)",
       {{"n", "67108864", "time scale, 4^13"}, {"replicas", "10000", "replicas"}, {"t", "1", "time"}},
       srws},
      {"dirichlet",
       "return kernel of the plane walk, its Monte Carlo check and the relative chain",
       {{"radius", "200", "Dirichlet box radius R; R and 2R are solved"},
        {"excursions", "10000000", "Monte Carlo excursions from e1"},
        {"mc_radius", "64", "box radius of both Monte Carlo runs"},
        {"meetings", "1000000", "meetings of the pair simulation"}},
       dirichlet},
      {"plane-marginal",
       "first coordinate of the plane mouse on the logarithmic time scale",
       {{"n", "20", "log time scale"},
        {"t", "1", "time"},
        {"replicas", "20000", "replicas"},
        {"radius", "200", "Dirichlet radius for alpha0"}},
       plane_marginal},
  };
}

}  // namespace catmouse::runner
