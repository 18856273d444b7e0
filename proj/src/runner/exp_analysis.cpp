#include <algorithm>
#include <cmath>

#include "catmouse/errors.hpp"
#include "catmouse/reflected.hpp"
#include "catmouse/stationary_analysis.hpp"
#include "experiments.hpp"

namespace catmouse::runner {

namespace {

const char* kKinds[] = {"dense", "sparse", "reversible", "reversible-sparse"};

FiniteChain draw_chain(int kind, std::size_t n, Stream& rng) {
  switch (kind) {
    case 0: return random_chain(n, rng, 1.0);
    case 1: return random_chain(n, rng, 0.5);
    case 2: return random_reversible_chain(n, rng, 1.0);
    default: return random_reversible_chain(n, rng, 0.6);
  }
}

void exact_suite(RunContext& ctx) {
  const auto& P = ctx.params;
  const std::uint64_t chains = P.count("chains");
  const auto n_min = static_cast<std::size_t>(P.count("n_min"));
  const auto n_max = static_cast<std::size_t>(P.count("n_max"));
  if (chains == 0 || n_min < 3 || n_max < n_min || n_max > 16)
    throw ConfigError("exact-suite: need chains >= 1 and 3 <= n_min <= n_max <= 16");
  const std::uint64_t seed = ctx.seed("chains");

  double residual = 0, diagonal = 0, row_sum = 0, alpha_excess = -INFINITY, rev_error = 0, h_spread = 0;
  std::uint64_t reversible_count = 0;
  auto out = ctx.csv("chains.csv", {"chain", "kind", "N", "alpha", "bound", "reversible", "residual", "diagonal_error",
                                    "row_sum_error", "reversible_error"});
  for (std::uint64_t i = 0; i < chains; ++i) {
    Stream rng = replica_stream(seed, 0, i);
    const int kind = static_cast<int>(i % 4);
    const std::size_t n = n_min + rng.uniform_index(n_max - n_min + 1);
    const FiniteChain base = draw_chain(kind, n, rng);
    const NuTable t = nu_exact(base);
    const NuTableCheck c = check_nu_table(t);
    const double res = verify_invariance(t.nu, base).max_residual;
    const double bound = static_cast<double>(n) - 1.0;
    const bool rev = is_reversible(base, t.pi);
    double rerr = 0.0;
    if (rev) {
      ++reversible_count;
      for (std::size_t y = 0; y < n; ++y) rerr = std::max(rerr, std::abs(t.nu2[y] - (1.0 - t.pi[y])));
      rerr = std::max(rerr, std::abs(t.alpha - bound));
      rev_error = std::max(rev_error, rerr);
    }
    residual = std::max(residual, res);
    diagonal = std::max(diagonal, c.diagonal_error);
    row_sum = std::max({row_sum, c.row_sum_error, c.alpha_error});
    alpha_excess = std::max(alpha_excess, t.alpha - bound);
    h_spread = std::max(h_spread, c.h_spread);
    out.row(i, kKinds[kind], static_cast<std::uint64_t>(n), t.alpha, bound, rev ? 1 : 0, res, c.diagonal_error,
            c.row_sum_error, rerr);
  }
  auto add = [&](std::string name, std::string stat, double value, double threshold) {
    Verdict& v = ctx.add(make_verdict(std::move(name), std::move(stat), value, threshold));
    v.n1 = chains;
    v.seed = seed;
    return std::ref(v);
  };
  add("nu invariance residual", "max-abs-error", residual, 1e-9);
  add("nu diagonal equals pi", "max-abs-error", diagonal, 1e-10);
  add("row sums proportional to pi", "max-abs-error", row_sum, 1e-10).get().note = "also |alpha - total nu2 mass|";
  add("alpha at most N-1", "max(alpha-(N-1))", alpha_excess, 1e-9);
  Verdict& rv = add("reversible nu2 = 1-pi and alpha = N-1", "max-abs-error", rev_error, 1e-9);
  rv.n1 = reversible_count;
  if (reversible_count == 0) rv.pass = false, rv.note = "no reversible chain drawn";
  ctx.diagnostic("reversible chains", static_cast<double>(reversible_count));
  ctx.diagnostic("max h spread", h_spread, "h(x) should be constant");

  // Two cycles of sizes 1 and 2 glued at 0.
  const FiniteChain rc = r_cycles_chain({1, 2});
  const NuTable t = nu_exact(rc);
  const double expected[] = {2.0 / 5, 3.0 / 5, 1.0 / 5, 2.0 / 5};
  double nu2_error = 0.0;
  auto rc_out = ctx.csv("rcycles.csv", {"state", "label", "nu2", "listed"});
  for (std::size_t y = 0; y < rc.size(); ++y) {
    nu2_error = std::max(nu2_error, std::abs(t.nu2[y] - expected[y]));
    rc_out.row(static_cast<std::uint64_t>(y), rc.label(y), t.nu2[y], expected[y]);
  }
  Verdict& a = ctx.add(make_verdict("r-cycles nu2 values (2/5,3/5,1/5,2/5)", "max-abs-error", nu2_error, 1e-12));
  a.note = "state order 0,(1,1),(2,1),(2,2)";
  Verdict& b = ctx.add(make_verdict("r-cycles alpha = 8/5", "abs-error", std::abs(t.alpha - 1.6), 1e-12));
  b.estimate = t.alpha;
  b.target = 1.6;
  ctx.diagnostic("r-cycles diagonal mass 1/alpha", 1.0 / t.alpha);
}

// Balance residual (nu K - nu)(x', y') for the reflected pair kernel, max over
// x', y' <= limit and, separately, over y' >= 1.
struct Residuals {
  double all = 0.0;
  double off_column0 = 0.0;
  Eigen::MatrixXd table;
};

Residuals reflected_residuals(const Eigen::MatrixXd& nu, const FiniteChain& base, std::size_t limit) {
  const auto K = static_cast<std::size_t>(nu.rows());
  Residuals r;
  r.table = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(limit + 1), static_cast<Eigen::Index>(limit + 1));
  auto P = [&](std::size_t a, std::size_t b) { return base.p(a, b); };
  for (std::size_t xp = 0; xp <= limit; ++xp)
    for (std::size_t yp = 0; yp <= limit; ++yp) {
      double in = 0.0;
      const std::size_t lo = xp == 0 ? 0 : xp - 1, hi = std::min(K - 1, xp + 1);
      for (std::size_t x = lo; x <= hi; ++x)
        if (x != yp) in += nu(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(yp)) * P(x, xp);
      const std::size_t zlo = std::max(xp, yp) == 0 ? 0 : std::max(xp, yp) - 1;
      const std::size_t zhi = std::min(K - 1, std::min(xp, yp) + 1);
      for (std::size_t z = zlo; z <= zhi; ++z)
        in += nu(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(z)) * P(z, xp) * P(z, yp);
      const double d = std::abs(in - nu(static_cast<Eigen::Index>(xp), static_cast<Eigen::Index>(yp)));
      r.table(static_cast<Eigen::Index>(xp), static_cast<Eigen::Index>(yp)) = d;
      r.all = std::max(r.all, d);
      if (yp >= 1) r.off_column0 = std::max(r.off_column0, d);
    }
  return r;
}

void reflected_nu(RunContext& ctx) {
  const auto& P = ctx.params;
  const double p = P.real("p");
  const auto limit = static_cast<std::size_t>(P.count("limit"));
  const auto K = static_cast<std::size_t>(P.count("truncation"));
  if (!(p > 0.0 && p < 0.5)) throw ConfigError("reflected-nu: p must lie in (0, 1/2)");
  if (K < limit + 40) throw ConfigError("reflected-nu: truncation must exceed limit by at least 40");
  const FiniteChain base = truncated_reflected_walk(p, K);
  Eigen::MatrixXd nu(static_cast<Eigen::Index>(K + 1), static_cast<Eigen::Index>(K + 1));
  for (std::size_t x = 0; x <= K; ++x)
    for (std::size_t y = 0; y <= K; ++y)
      nu(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) =
          reflected::nu_reflected_explicit(p, static_cast<std::int64_t>(x), static_cast<std::int64_t>(y));
  const ResidualReport rep = verify_invariance(nu, base, limit, 1e-12);
  Verdict& v = ctx.add(make_verdict("explicit nu balance on x,y <= limit", "max-abs-error", rep.max_residual, 1e-12));
  v.note = "worst at x=" + std::to_string(rep.at_x) + " y=" + std::to_string(rep.at_y);
  const Residuals r = reflected_residuals(nu, base, limit);
  ctx.diagnostic("residual excluding mouse at 0", r.off_column0);
  ctx.diagnostic("residual recomputed", r.all, "independent sum over the pair kernel");
  auto out = ctx.csv("residuals.csv", {"x", "y", "nu", "residual"});
  for (std::size_t x = 0; x <= limit; ++x)
    for (std::size_t y = 0; y <= limit; ++y)
      out.row(static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y),
              nu(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)),
              r.table(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)));
}

}  // namespace

std::vector<Experiment> analysis_experiments() {
  return {
      {"exact-suite",
       "exact nu tables of random finite chains and the r-cycles example",
       {{"chains", "600", "number of random chains"},
        {"n_min", "3", "smallest state count"},
        {"n_max", "8", "largest state count"}},
       exact_suite},
      {"reflected-nu",
       "balance of the explicit nu table of the reflected walk",
       {{"p", "0.3", "up probability"},
        {"limit", "50", "check x, y <= limit"},
        {"truncation", "140", "state space {0..truncation} for the kernel"}},
       reflected_nu},
  };
}

}  // namespace catmouse::runner
