#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "catmouse/csv.hpp"
#include "catmouse/stats.hpp"

namespace catmouse::runner {

// 0 all verdicts pass, 1 a statistical or numerical check failed, 2 invalid
// configuration or input, 3 budget refusal, 4 unexpected internal error.
enum ExitCode : int { kPass = 0, kFail = 1, kConfigError = 2, kBudgetRefusal = 3, kInternalError = 4 };

struct Setting {
  std::string value;
  std::string origin;  // "path:line", "--flag" or "default"
};

// Flat key=value configuration. Later sets override earlier ones, so flags
// applied after a file win.
class Config {
 public:
  static std::string normalize_key(std::string_view key);

  void set(std::string_view key, std::string value, std::string origin);
  // key = value lines; '#' starts a comment. Errors carry "path:line:".
  void load_file(const std::filesystem::path& path);
  // The "# key=value" block at the top of a report CSV.
  void load_report_header(const std::filesystem::path& csv);

  const Setting* find(std::string_view key) const;
  const std::map<std::string, Setting>& entries() const { return entries_; }

 private:
  std::map<std::string, Setting> entries_;
};

struct ParamSpec {
  std::string key;
  std::string default_value;
  std::string help;
};

// Keys every experiment accepts.
const std::vector<ParamSpec>& common_params();

// Typed view of a Config validated against a parameter list. Unknown keys
// and malformed values raise ConfigError naming the key and its origin.
class Params {
 public:
  Params(std::string experiment, const Config& config, const std::vector<ParamSpec>& specs);

  const std::string& experiment() const { return experiment_; }
  std::string text(std::string_view key) const;
  double real(std::string_view key) const;
  std::int64_t integer(std::string_view key) const;
  std::uint64_t count(std::string_view key) const;
  std::vector<double> reals(std::string_view key) const;

  std::uint64_t seed() const { return count("seed"); }
  unsigned workers() const { return static_cast<unsigned>(count("workers")); }

  // experiment=<name> followed by every effective key=value in key order.
  ConfigHeader header() const;

 private:
  const Setting& get(std::string_view key) const;
  [[noreturn]] void bad_value(std::string_view key, std::string_view expected) const;

  std::string experiment_;
  std::map<std::string, Setting> values_;
};

struct Diagnostic {
  std::string name;
  double value = 0.0;
  std::string note;
};

struct ExperimentReport {
  std::string experiment;
  ConfigHeader config;
  std::vector<Verdict> verdicts;
  std::vector<Diagnostic> diagnostics;  // reported, never gate pass/fail
  std::vector<std::string> artifacts;
  // Top-level fields of summary.json beyond the generic ones.
  std::map<std::string, double> values;
  std::map<std::string, bool> flags;
  double declared_work = 0.0;  // simulated steps or jumps declared up front
  double wall_seconds = 0.0;
  bool pass() const;
};

class RunContext {
 public:
  RunContext(const Params& params, std::filesystem::path out_dir, ExperimentReport& report);

  const Params& params;
  std::uint64_t seed(std::string_view label) const;
  unsigned workers() const { return params.workers(); }
  double step_budget() const { return params.real("step_budget"); }

  CsvWriter csv(const std::string& file, const std::vector<std::string>& columns);
  Verdict& add(Verdict v);
  void diagnostic(std::string name, double value, std::string note = {});
  void declare_work(double units) { report_.declared_work += units; }
  void value(const std::string& key, double v) { report_.values[key] = v; }
  void flag(const std::string& key, bool v) { report_.flags[key] = v; }

 private:
  std::filesystem::path out_;
  ExperimentReport& report_;
};

struct Experiment {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
  std::function<void(RunContext&)> run;
};

const std::vector<Experiment>& experiments();
const Experiment& find_experiment(std::string_view name);

// Validates the config, runs, writes verdicts.csv, diagnostics.csv and
// summary.json into out_dir. Library errors propagate.
ExperimentReport run_experiment(const Experiment& e, const Config& config, const std::filesystem::path& out_dir);

void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir);

// One acceptance criterion and the experiments whose verdicts decide it.
struct Criterion {
  std::string id;
  std::string title;
  std::vector<std::string> experiments;
  double max_seconds = 0.0;  // 0 when no runtime bound applies
};

const std::vector<Criterion>& criteria();

struct SuiteResult {
  std::vector<ExperimentReport> reports;
  bool pass() const;
};

// Every experiment named by the criteria, in order, under out_dir/<name>.
SuiteResult run_suite(const Config& common, const std::filesystem::path& out_dir);

int cli_main(int argc, const char* const* argv);

}  // namespace catmouse::runner
