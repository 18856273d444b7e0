// One PASS/FAIL line per acceptance criterion. Each criterion runs its
// experiments with the default parameters; runtime bounds are checked here
// because wall-clock time never enters the report CSVs.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "catmouse/errors.hpp"
#include "catmouse/runner.hpp"

namespace fs = std::filesystem;
using namespace catmouse;
using namespace catmouse::runner;

namespace {

std::map<std::string, std::string> csv_files(const fs::path& root) {
  std::map<std::string, std::string> files;
  if (!fs::exists(root)) return files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".csv") {
      std::ifstream in(e.path(), std::ios::binary);
      files[fs::relative(e.path(), root).generic_string()] =
          std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
  return files;
}

// Runs `catmouse suite` twice through the CLI entry point and compares every CSV.
bool determinism(const fs::path& out, const std::string& seed, const std::string& workers, std::string& detail) {
  std::vector<int> codes;
  for (const char* run : {"run1", "run2"}) {
    fs::remove_all(out / run);
    const std::string dir = (out / run).string();
    const char* argv[] = {"catmouse", "suite", "--seed", seed.c_str(), "--workers", workers.c_str(), "--out", dir.c_str()};
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    codes.push_back(cli_main(static_cast<int>(std::size(argv)), argv));
    std::cout.rdbuf(old);
  }
  for (int c : codes)
    if (c != kPass && c != kFail) {
      detail = fmt::format("suite exited with code {}", c);
      return false;
    }
  const auto a = csv_files(out / "run1"), b = csv_files(out / "run2");
  std::size_t differing = 0;
  std::string first;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) {
      if (first.empty()) first = name;
      ++differing;
    }
  }
  if (a.size() != b.size() || differing > 0 || a.empty()) {
    detail = fmt::format("{} of {} CSV files differ (first: {})", differing + (a.size() != b.size()), a.size(), first);
    return false;
  }
  detail = fmt::format("{} CSV files byte-identical across two runs", a.size());
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance: one PASS/FAIL line per acceptance criterion"};
  std::vector<std::string> only;
  std::string out = "acceptance_out", seed = "42", workers = "0";
  app.add_option("--only", only, "criterion ids to run (default: all)")->delimiter(',');
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "root seed");
  app.add_option("--workers", workers, "worker threads, 0 = one per hardware thread");
  bool list = false;
  app.add_flag("--list", list, "list criterion ids");
  CLI11_PARSE(app, argc, argv);

  std::vector<std::string> ids;
  for (const auto& c : criteria()) ids.push_back(c.id);
  ids.push_back("determinism");
  if (list) {
    for (const auto& id : ids) std::cout << id << '\n';
    return 0;
  }
  for (const auto& id : only)
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
      std::cerr << "unknown criterion '" << id << "'\n";
      return kConfigError;
    }
  auto selected = [&](const std::string& id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

  Config config;
  config.set("seed", seed, "--seed");
  config.set("workers", workers, "--workers");
  std::map<std::string, ExperimentReport> reports;
  bool all = true;
  for (const auto& c : criteria()) {
    if (!selected(c.id)) continue;
    bool pass = true;
    double seconds = 0.0;
    std::size_t verdicts = 0;
    std::vector<std::string> failed;
    std::string error;
    for (const auto& name : c.experiments) {
      try {
        if (!reports.count(name)) reports.emplace(name, run_experiment(find_experiment(name), config, fs::path(out) / name));
      } catch (const std::exception& e) {
        error = name + ": " + e.what();
        pass = false;
        break;
      }
      const auto& r = reports.at(name);
      seconds += r.wall_seconds;
      verdicts += r.verdicts.size();
      for (const auto& v : r.verdicts)
        if (!v.pass) failed.push_back(fmt::format("{} ({:.4g} vs {:.4g})", v.name, v.value, v.threshold));
      pass = pass && r.pass();
    }
    std::string detail;
    if (!error.empty()) {
      detail = "error: " + error;
    } else {
      detail = fmt::format("{}/{} verdicts pass, {:.1f} s", verdicts - failed.size(), verdicts, seconds);
      if (c.max_seconds > 0) {
        detail += fmt::format(" (limit {:.0f} s)", c.max_seconds);
        if (seconds >= c.max_seconds) pass = false, failed.push_back("runtime");
      }
      if (!failed.empty()) {
        detail += "; failed:";
        for (const auto& f : failed) detail += " " + f + ";";
        detail.pop_back();
      }
    }
    std::cout << fmt::format("{} {}: {} | {}", pass ? "PASS" : "FAIL", c.id, c.title, detail) << std::endl;
    all = all && pass;
  }
  if (selected("determinism")) {
    std::string detail;
    const bool pass = determinism(fs::path(out) / "determinism", seed, workers, detail);
    std::cout << fmt::format("{} determinism: suite --seed {} twice yields byte-identical CSVs | {}", pass ? "PASS" : "FAIL",
                             seed, detail)
              << std::endl;
    all = all && pass;
  }
  return all ? kPass : kFail;
}
