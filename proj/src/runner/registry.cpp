#include <algorithm>

#include "catmouse/errors.hpp"
#include "experiments.hpp"

namespace catmouse::runner {

const std::vector<Experiment>& experiments() {
  static const std::vector<Experiment> all = [] {
    std::vector<Experiment> v;
    for (auto part : {analysis_experiments, lattice_experiments, reflected_experiments, mminf_experiments})
      for (auto& e : part()) v.push_back(std::move(e));
    return v;
  }();
  return all;
}

const Experiment& find_experiment(std::string_view name) {
  for (const auto& e : experiments())
    if (e.name == name) return e;
  std::string known;
  for (const auto& e : experiments()) known += (known.empty() ? "" : ", ") + e.name;
  throw ConfigError("unknown experiment '" + std::string(name) + "' (known: " + known + ")");
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"exact-analysis", "exact nu tables over random finite chains and the r-cycles example", {"exact-suite"}, 60},
      {"reflected-nu", "explicit nu of the reflected walk balances on x,y <= 50", {"reflected-nu"}, 1},
      {"reflected-hitting", "exponential limit of the upward hitting time and the downward rate", {"reflected-hitting"}, 600},
      {"free-jump", "free-process jump law: mean, exponential moment, characteristic function", {"reflected-free-jump"}, 600},
      {"collapse", "time to the origin vs W, first-jump law, growth of the W mean", {"reflected-collapse", "reflected-w"}, 3600},
      {"srws", "local time and mouse position of the pair on Z", {"lemma-localtime", "srws"}, 3600},
      {"plane-2d", "Dirichlet return kernel, relative chain and the plane marginal", {"dirichlet", "plane-marginal"}, 3600},
      {"mminf", "M/M/infinity: F law, hitting times, time change, cascade",
       {"mminf-F", "mminf-hitting", "mminf-time-change", "mminf-cascade"}, 2400},
      {"oscillation", "oscillation probe increases from n=8 to n=12", {"reflected-oscillation"}, 0},
  };
  return all;
}

SuiteResult run_suite(const Config& common, const std::filesystem::path& out_dir) {
  for (const auto& [key, s] : common.entries()) {
    const bool known = key == "out" || key == "experiment" ||
                       std::any_of(common_params().begin(), common_params().end(), [&](const ParamSpec& p) { return p.key == key; });
    if (!known) throw ConfigError(s.origin + ": key '" + key + "' is not accepted by suite (only seed, workers, step_budget)");
  }
  SuiteResult result;
  std::vector<std::string> done;
  for (const auto& c : criteria())
    for (const auto& name : c.experiments) {
      if (std::find(done.begin(), done.end(), name) != done.end()) continue;
      done.push_back(name);
      result.reports.push_back(run_experiment(find_experiment(name), common, out_dir / name));
    }
  const Params p("suite", common, {});
  CsvWriter w(out_dir / "suite.csv", p.header(), {"criterion", "experiment", "verdicts", "failed", "pass"});
  for (const auto& c : criteria())
    for (const auto& name : c.experiments)
      for (const auto& r : result.reports)
        if (r.experiment == name) {
          const auto failed = std::count_if(r.verdicts.begin(), r.verdicts.end(), [](const Verdict& v) { return !v.pass; });
          w.row(c.id, name, static_cast<std::uint64_t>(r.verdicts.size()), static_cast<std::int64_t>(failed), r.pass() ? 1 : 0);
        }
  return result;
}

}  // namespace catmouse::runner
