#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "catmouse/errors.hpp"
#include "catmouse/rng.hpp"
#include "catmouse/runner.hpp"

namespace catmouse::runner {

namespace {

const char* bound_name(Bound b) { return b == Bound::at_most ? "at_most" : "at_least"; }

// JSON has no NaN or infinity; those become null.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

bool ExperimentReport::pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return !verdicts.empty();
}

RunContext::RunContext(const Params& p, std::filesystem::path out_dir, ExperimentReport& report)
    : params(p), out_(std::move(out_dir)), report_(report) {}

std::uint64_t RunContext::seed(std::string_view label) const {
  return derive_seed(params.seed(), params.experiment() + "/" + std::string(label));
}

CsvWriter RunContext::csv(const std::string& file, const std::vector<std::string>& columns) {
  CsvWriter w(out_ / file, report_.config, columns);
  report_.artifacts.push_back(file);
  return w;
}

Verdict& RunContext::add(Verdict v) {
  if (v.seed == 0) v.seed = params.seed();
  report_.verdicts.push_back(std::move(v));
  return report_.verdicts.back();
}

void RunContext::diagnostic(std::string name, double value, std::string note) {
  report_.diagnostics.push_back({std::move(name), value, std::move(note)});
}

void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir) {
  {
    CsvWriter w(out_dir / "verdicts.csv", report.config,
                {"name", "statistic", "value", "threshold", "bound", "pass", "n1", "n2", "se", "estimate", "target",
                 "seed", "note"});
    for (const auto& v : report.verdicts)
      w.row(v.name, v.statistic, v.value, v.threshold, bound_name(v.bound), v.pass ? 1 : 0, v.n1, v.n2, v.se,
            v.estimate, v.target, v.seed, v.note);
  }
  {
    CsvWriter w(out_dir / "diagnostics.csv", report.config, {"name", "value", "note"});
    for (const auto& d : report.diagnostics) w.row(d.name, d.value, d.note);
  }
  nlohmann::json j;
  j["experiment"] = report.experiment;
  j["config"] = nlohmann::json::object();
  for (const auto& [k, v] : report.config) j["config"][k] = v;
  j["pass"] = report.pass();
  for (const auto& [k, v] : report.values) j[k] = number(v);
  for (const auto& [k, v] : report.flags) j[k] = v;
  j["verdicts"] = nlohmann::json::array();
  for (const auto& v : report.verdicts)
    j["verdicts"].push_back({{"name", v.name},
                             {"statistic", v.statistic},
                             {"value", number(v.value)},
                             {"threshold", number(v.threshold)},
                             {"bound", bound_name(v.bound)},
                             {"pass", v.pass},
                             {"note", v.note}});
  j["diagnostics"] = nlohmann::json::array();
  for (const auto& d : report.diagnostics)
    j["diagnostics"].push_back({{"name", d.name}, {"value", number(d.value)}, {"note", d.note}});
  j["artifacts"] = report.artifacts;
  j["declared_work"] = report.declared_work;
  j["wall_seconds"] = report.wall_seconds;
  std::ofstream out(out_dir / "summary.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (out_dir / "summary.json").string());
  out << j.dump(2) << '\n';
}

ExperimentReport run_experiment(const Experiment& e, const Config& config, const std::filesystem::path& out_dir) {
  const Params params(e.name, config, e.params);
  ExperimentReport report;
  report.experiment = e.name;
  report.config = params.header();
  RunContext ctx(params, out_dir, report);
  const auto start = std::chrono::steady_clock::now();
  e.run(ctx);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_report(report, out_dir);
  return report;
}

bool SuiteResult::pass() const {
  for (const auto& r : reports)
    if (!r.pass()) return false;
  return !reports.empty();
}

}  // namespace catmouse::runner
