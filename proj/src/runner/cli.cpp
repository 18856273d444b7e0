#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "catmouse/catmouse.hpp"
#include "catmouse/ctmc.hpp"
#include "catmouse/errors.hpp"
#include "catmouse/oracles.hpp"
#include "catmouse/reflected.hpp"
#include "catmouse/stationary_analysis.hpp"
#include "experiments.hpp"

namespace catmouse::runner {

namespace {

bool truthy(const Params& P, std::string_view key) {
  const std::string v = P.text(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError(P.experiment() + ": key '" + std::string(key) + "' must be 0/1/true/false, got '" + v + "'");
}

FiniteChain matrix_from(const Params& P) {
  const std::string path = P.text("matrix");
  if (path.empty()) throw ConfigError(P.experiment() + ": key 'matrix' is required");
  return load_matrix_file(path, P.text("labels"), ChainOptions{truthy(P, "allow_loops"), truthy(P, "allow_periodic")});
}

void analyze(RunContext& ctx) {
  const auto& P = ctx.params;
  const FiniteChain base = matrix_from(P);
  const NuTable t = nu_exact(base);
  const NuTableCheck c = check_nu_table(t);
  const TetaliReport tet = tetali_bound_check(base);
  const double tol = P.real("tolerance");
  const std::size_t n = base.size();
  const ResidualReport res = verify_invariance(t.nu, base, std::numeric_limits<std::size_t>::max(), tol);
  ctx.add(make_verdict("nu invariance residual", "max-abs-error", res.max_residual, tol));
  ctx.add(make_verdict("nu diagonal equals pi", "max-abs-error", c.diagonal_error, tol));
  ctx.add(make_verdict("row sums proportional to pi", "max-abs-error", std::max(c.row_sum_error, c.alpha_error), tol));
  ctx.add(make_verdict("alpha at most N-1", "alpha-(N-1)", t.alpha - tet.bound, tol));
  if (tet.reversible) ctx.add(make_verdict("reversible: alpha = N-1", "abs-error", std::abs(t.alpha - tet.bound), tol));
  ctx.value("alpha", t.alpha);
  ctx.value("bound", tet.bound);
  ctx.value("states", static_cast<double>(n));
  ctx.value("meeting_probability", 1.0 / t.alpha);
  ctx.flag("reversible", tet.reversible);
  ctx.flag("bound_attained", tet.equality);
  auto nu = ctx.csv("nu.csv", {"x", "y", "value"});
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      nu.row(base.label(x), base.label(y), t.nu(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)));
  auto nu2 = ctx.csv("nu2.csv", {"y", "value", "pi"});
  for (std::size_t y = 0; y < n; ++y) nu2.row(base.label(y), t.nu2[y], t.pi[y]);
}

// Admissibility of each recorded pair move: the mouse moves only when
// together and every coordinate move has positive probability.
template <class S, class Ok>
std::uint64_t count_bad_moves(const std::vector<CatMouseState<S>>& path, Ok&& ok) {
  std::uint64_t bad = 0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto& a = path[i - 1];
    const auto& b = path[i];
    if (!ok(a.cat, b.cat)) ++bad;
    if (a.together() ? !ok(a.mouse, b.mouse) : !(a.mouse == b.mouse)) ++bad;
  }
  return bad;
}

void simulate(RunContext& ctx) {
  const auto& P = ctx.params;
  const std::string model = P.text("model");
  const std::uint64_t steps = P.count("steps");
  if (static_cast<double>(steps) > ctx.step_budget())
    throw BudgetExceeded("simulate: steps above step_budget", static_cast<double>(steps), ctx.step_budget());
  ctx.declare_work(static_cast<double>(steps));
  const std::uint64_t seed = ctx.seed("trajectory");
  Stream rng(seed, 0);
  const auto cat = P.integer("cat"), mouse = P.integer("mouse");
  std::uint64_t bad = 0;
  auto simple = [&](const auto& base, auto start, auto&& ok) {
    std::vector<CatMouseState<decltype(start.cat)>> path{start};
    for (std::uint64_t i = 0; i < steps; ++i) path.push_back(cm_step(path.back(), base, rng));
    bad = count_bad_moves(path, ok);
    return path;
  };
  if (model == "matrix") {
    const FiniteChain base = matrix_from(P);
    if (cat < 0 || mouse < 0 || static_cast<std::size_t>(std::max(cat, mouse)) >= base.size())
      throw ConfigError("simulate: cat and mouse must be states of the matrix");
    const auto path = simple(base, CatMouseState<std::size_t>{static_cast<std::size_t>(cat), static_cast<std::size_t>(mouse)},
                             [&](std::size_t a, std::size_t b) { return base.p(a, b) > 0.0; });
    auto out = ctx.csv("trajectory.csv", {"step", "cat", "mouse"});
    for (std::size_t i = 0; i < path.size(); ++i) out.row(static_cast<std::uint64_t>(i), base.label(path[i].cat), base.label(path[i].mouse));
  } else if (model == "zline" || model == "reflected") {
    std::vector<CatMouseState<std::int64_t>> path;
    if (model == "zline") {
      path = simple(ZLine{}, CatMouseState<std::int64_t>{cat, mouse}, [](std::int64_t a, std::int64_t b) { return std::abs(a - b) == 1; });
    } else {
      if (cat < 0 || mouse < 0) throw ConfigError("simulate: reflected walk starts must be nonnegative");
      const ReflectedWalk walk(P.real("p"));
      path = simple(walk, CatMouseState<std::int64_t>{cat, mouse},
                    [](std::int64_t a, std::int64_t b) { return b >= 0 && (std::abs(a - b) == 1 || (a == 0 && b == 0)); });
    }
    auto out = ctx.csv("trajectory.csv", {"step", "cat", "mouse"});
    for (std::size_t i = 0; i < path.size(); ++i) out.row(static_cast<std::uint64_t>(i), path[i].cat, path[i].mouse);
  } else if (model == "z2") {
    const auto path = simple(Z2Plane{}, CatMouseState<Point2>{{cat, 0}, {mouse, 0}},
                             [](Point2 a, Point2 b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1; });
    auto out = ctx.csv("trajectory.csv", {"step", "cat_x", "cat_y", "mouse_x", "mouse_y"});
    for (std::size_t i = 0; i < path.size(); ++i)
      out.row(static_cast<std::uint64_t>(i), path[i].cat.x, path[i].cat.y, path[i].mouse.x, path[i].mouse.y);
  } else if (model == "mminf") {
    if (cat < 0 || mouse < 0) throw ConfigError("simulate: M/M/infinity starts must be nonnegative");
    const MMInf q(P.real("rho"));
    std::vector<CatMouseState<std::int64_t>> path{{cat, mouse, 0.0}};
    for (std::uint64_t i = 0; i < steps; ++i) path.push_back(ctmc::ct_step(path.back(), q, rng).next);
    bad = count_bad_moves(path, [](std::int64_t a, std::int64_t b) { return b >= 0 && std::abs(a - b) == 1; });
    auto out = ctx.csv("trajectory.csv", {"step", "clock", "cat", "mouse"});
    for (std::size_t i = 0; i < path.size(); ++i) out.row(static_cast<std::uint64_t>(i), path[i].clock, path[i].cat, path[i].mouse);
  } else {
    throw ConfigError("simulate: model must be matrix, zline, z2, reflected or mminf, got '" + model + "'");
  }
  Verdict& v = ctx.add(make_verdict("pair moves admissible", "count", static_cast<double>(bad), 0.0));
  v.n1 = steps;
  v.seed = seed;
}

void oracle_samples(RunContext& ctx) {
  const auto& P = ctx.params;
  const std::string law = P.text("law");
  const std::uint64_t count = P.count("samples");
  const double t = P.real("t");
  if (count < 1) throw ConfigError("oracle: samples must be positive");
  const std::uint64_t seed = ctx.seed(law);
  std::vector<double> xs(count);
  std::function<double(double)> cdf;
  if (law == "half-normal" || law == "brownian-local-time" || law == "bilateral-exponential") {
    if (!(t > 0.0)) throw ConfigError("oracle: t must be positive");
    const double a0 = P.real("alpha0");
    if (law == "bilateral-exponential" && !(a0 > 0.0)) throw ConfigError("oracle: alpha0 must be positive");
    for (std::uint64_t i = 0; i < count; ++i) {
      Stream rng = replica_stream(seed, 0, i);
      xs[i] = law == "half-normal"           ? oracle::half_normal(t, rng)
              : law == "brownian-local-time" ? oracle::brownian_at_local_time(t, rng)
                                             : oracle::bilateral_exponential(a0, t, rng);
    }
    cdf = law == "half-normal"           ? std::function<double(double)>([t](double x) { return oracle::half_normal_cdf(x, t); })
          : law == "brownian-local-time" ? std::function<double(double)>([t](double x) { return oracle::brownian_at_local_time_cdf(x, t); })
                                         : std::function<double(double)>([a0, t](double x) { return oracle::bilateral_exponential_cdf(x, a0, t); });
    ctx.add(ks_verdict("samples vs the law's CDF", xs, cdf, 1.9495 / std::sqrt(static_cast<double>(count))))
        .note = "threshold is the 0.001 asymptotic KS critical value";
  } else if (law == "free-jump") {
    const double p = P.real("p");
    if (!(p > 0.0 && p < 0.5)) throw ConfigError("oracle: p must lie in (0, 1/2)");
    const double rho = reflected::rho_of(p);
    const auto kmin = P.integer("kmin"), kmax = P.integer("kmax");
    if (kmin >= 1 || kmax <= 1) throw ConfigError("oracle: need kmin < 1 < kmax");
    // Inversion of the exact CDF, searching outward from k = 0.
    std::vector<std::int64_t> ks(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      Stream rng = replica_stream(seed, 0, i);
      const double u = rng.uniform();
      std::int64_t k = 0;
      while (reflected::free_jump_cdf(rho, k) < u) ++k;
      while (k > -1'000'000 && reflected::free_jump_cdf(rho, k - 1) >= u) --k;
      ks[i] = k;
      xs[i] = static_cast<double>(k);
    }
    cdf = [rho](double x) { return reflected::free_jump_cdf(rho, static_cast<std::int64_t>(std::floor(x))); };
    ctx.add(make_verdict("samples vs the exact CDF", "KS",
                         ks_distance_discrete(ks, [rho](std::int64_t k) { return reflected::free_jump_cdf(rho, k); }),
                         1.9495 / std::sqrt(static_cast<double>(count))))
        .note = "threshold is the 0.001 asymptotic KS critical value";
    auto pmf = ctx.csv("pmf.csv", {"k", "pmf", "cdf"});
    for (auto k = kmin; k <= kmax; ++k) pmf.row(k, reflected::free_jump_pmf(rho, k), reflected::free_jump_cdf(rho, k));
  } else {
    throw ConfigError("oracle: law must be half-normal, brownian-local-time, bilateral-exponential or free-jump, got '" + law + "'");
  }
  auto out = ctx.csv("samples.csv", {"sample", "value", "cdf"});
  for (std::uint64_t i = 0; i < count; ++i) out.row(i, xs[i], cdf(xs[i]));
}

const std::vector<ParamSpec> kMatrixParams{
    {"matrix", "", "matrix file"},
    {"labels", "", "optional label file, one label per line"},
    {"allow_loops", "0", "accept nonzero diagonal entries"},
    {"allow_periodic", "0", "accept periodic chains"},
};

const std::vector<Experiment>& commands() {
  static const std::vector<Experiment> all = [] {
    auto with_matrix = [](std::vector<ParamSpec> extra) {
      extra.insert(extra.begin(), kMatrixParams.begin(), kMatrixParams.end());
      return extra;
    };
    return std::vector<Experiment>{
        {"analyze", "exact nu, nu2 and alpha of a finite chain", with_matrix({{"tolerance", "1e-9", "tolerance of every check"}}), analyze},
        {"simulate", "trajectory dump of the pair chain",
         with_matrix({{"model", "matrix", "matrix | zline | z2 | reflected | mminf"},
                      {"steps", "1000", "steps (jumps for mminf)"},
                      {"cat", "0", "cat start (first coordinate on z2)"},
                      {"mouse", "0", "mouse start (first coordinate on z2)"},
                      {"p", "0.3", "up probability of the reflected walk"},
                      {"rho", "1", "arrival rate of M/M/infinity"}}),
         simulate},
        {"oracle", "samples of a limit law with its CDF",
         {{"law", "", "half-normal | brownian-local-time | bilateral-exponential | free-jump"},
          {"samples", "10000", "sample count"},
          {"t", "1", "time parameter"},
          {"alpha0", "1.9315", "scale of the bilateral exponential"},
          {"p", "0.3", "up probability for free-jump"},
          {"kmin", "-40", "smallest k in pmf.csv"},
          {"kmax", "20", "largest k in pmf.csv"}},
         oracle_samples},
    };
  }();
  return all;
}

// "--key value" and "--key=value" pairs after the subcommand.
void apply_flags(const std::vector<std::string>& extras, Config& config) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() < 3) throw ConfigError("unexpected argument '" + tok + "'");
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      config.set(tok.substr(2, eq - 2), tok.substr(eq + 1), tok.substr(0, eq));
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("flag " + tok + " needs a value");
      config.set(tok.substr(2), extras[i + 1], tok);
      ++i;
    }
  }
}

void print_report(const ExperimentReport& r, const std::filesystem::path& out) {
  for (const auto& v : r.verdicts)
    std::cout << fmt::format("{} {}: {} {:.6g} {} {:.6g}\n", v.pass ? "PASS" : "FAIL", v.name, v.statistic, v.value,
                             v.bound == Bound::at_most ? "<=" : ">=", v.threshold);
  std::cout << fmt::format("{} {} ({:.2f} s) -> {}\n", r.pass() ? "PASS" : "FAIL", r.experiment, r.wall_seconds,
                           (out / "summary.json").string());
}

void list_experiments() {
  auto show = [](const Experiment& e) {
    std::cout << e.name << ": " << e.summary << '\n';
    for (const auto& p : e.params) std::cout << fmt::format("    --{:<16} {:<16} {}\n", p.key, p.default_value, p.help);
  };
  std::cout << "commands:\n";
  for (const auto& e : commands()) show(e);
  std::cout << "\nexperiments:\n";
  for (const auto& e : experiments()) show(e);
  std::cout << "\ncommon keys:\n";
  for (const auto& p : common_params()) std::cout << fmt::format("    --{:<16} {:<16} {}\n", p.key, p.default_value, p.help);
}

int run(int argc, const char* const* argv) {
  CLI::App app{"catmouse: exact analysis and experiments for the cat-and-mouse Markov chain"};
  app.require_subcommand(1);
  std::string config_file, report_file, out_dir;
  auto common = [&](CLI::App* sub) {
    sub->allow_extras();
    sub->add_option("--config", config_file, "flat key = value file; flags override it");
    sub->add_option("--out", out_dir, "output directory");
  };
  auto* analyze_cmd = app.add_subcommand("analyze", "exact nu of a finite chain (--matrix FILE)");
  auto* simulate_cmd = app.add_subcommand("simulate", "pair trajectory dump (--model ...)");
  auto* oracle_cmd = app.add_subcommand("oracle", "samples of a limit law: oracle LAW [--key value ...]");
  auto* experiment_cmd = app.add_subcommand("experiment", "run one named experiment: experiment NAME [--key value ...]");
  auto* suite_cmd = app.add_subcommand("suite", "run every acceptance experiment");
  auto* list_cmd = app.add_subcommand("list", "list commands, experiments and their keys");
  for (auto* s : {analyze_cmd, simulate_cmd, oracle_cmd, experiment_cmd, suite_cmd}) common(s);
  experiment_cmd->add_option("--from-report", report_file, "re-run from the header of a report CSV");
  app.footer("Per-command keys are given as --key value; 'catmouse list' shows them. "
             "Exit codes: 0 pass, 1 check failed, 2 config error, 3 budget refusal, 4 internal error.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }
  if (list_cmd->parsed()) {
    list_experiments();
    return kPass;
  }
  CLI::App* sub = app.get_subcommands().front();
  Config config;
  if (!config_file.empty()) config.load_file(config_file);
  if (!report_file.empty()) config.load_report_header(report_file);
  // The experiment or law name is the first bare word after the subcommand.
  std::vector<std::string> extras = sub->remaining();
  if ((sub == experiment_cmd || sub == oracle_cmd) && !extras.empty() && extras.front().rfind("-", 0) != 0) {
    config.set(sub == oracle_cmd ? "law" : "experiment", extras.front(), "argument");
    extras.erase(extras.begin());
  }
  apply_flags(extras, config);
  if (!out_dir.empty()) config.set("out", out_dir, "--out");

  auto out_for = [&](const std::string& fallback) {
    const Setting* o = config.find("out");
    return std::filesystem::path(o ? o->value : "out/" + fallback);
  };

  if (sub == suite_cmd) {
    const auto out = out_for("suite");
    const SuiteResult r = run_suite(config, out);
    for (const auto& rep : r.reports) print_report(rep, out / rep.experiment);
    std::cout << (r.pass() ? "PASS suite\n" : "FAIL suite\n");
    return r.pass() ? kPass : kFail;
  }
  const Experiment* e = nullptr;
  if (sub == experiment_cmd) {
    const Setting* s = config.find("experiment");
    if (!s) throw ConfigError("experiment: no name given");
    e = &find_experiment(s->value);
  } else {
    for (const auto& c : commands())
      if (c.name == sub->get_name()) e = &c;
  }
  const auto out = out_for(e->name);
  const ExperimentReport r = run_experiment(*e, config, out);
  print_report(r, out);
  return r.pass() ? kPass : kFail;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ChainError& e) {
    std::cerr << "invalid chain: " << e.what() << '\n';
    return kConfigError;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget refused: " << e.what() << '\n';
    return kBudgetRefusal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace catmouse::runner
