#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <iterator>
#include <set>

#include "catmouse/errors.hpp"
#include "catmouse/runner.hpp"

using namespace catmouse;
using namespace catmouse::runner;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("catmouse_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "catmouse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("config file parsing is line precise") {
  const fs::path dir = scratch("config");
  write(dir / "good.cfg", "# comment\n\n  seed = 7   # trailing\nstep-budget=1e6\n");
  Config c;
  c.load_file(dir / "good.cfg");
  REQUIRE(c.find("seed"));
  CHECK(c.find("seed")->value == "7");
  CHECK(c.find("seed")->origin == (dir / "good.cfg").string() + ":3");
  CHECK(c.find("step_budget")->value == "1e6");

  write(dir / "bad.cfg", "seed = 1\nno equals sign here\n");
  Config d;
  CHECK(error_text([&] { d.load_file(dir / "bad.cfg"); }).find("bad.cfg:2:") != std::string::npos);
  write(dir / "bad2.cfg", "= 3\n");
  CHECK(error_text([&] { d.load_file(dir / "bad2.cfg"); }).find("bad2.cfg:1:") != std::string::npos);
  CHECK_THROWS_AS(d.load_file(dir / "missing.cfg"), ConfigError);
}

TEST_CASE("parameters are validated against the experiment") {
  const std::vector<ParamSpec> specs{{"n", "10", ""}, {"rho", "1,2", ""}, {"name", "x", ""}};
  Config c;
  Params p("demo", c, specs);
  CHECK(p.count("n") == 10);
  CHECK(p.reals("rho") == std::vector<double>{1.0, 2.0});
  CHECK(p.seed() == 42);
  CHECK(p.header().front() == std::pair<std::string, std::string>{"experiment", "demo"});

  c.set("n", "1e6", "--n");
  CHECK(Params("demo", c, specs).count("n") == 1'000'000);
  c.set("n", "2.5", "file.cfg:4");
  const std::string msg = error_text([&] { Params("demo", c, specs).count("n"); });
  CHECK(msg.find("file.cfg:4") != std::string::npos);
  CHECK(msg.find("'n'") != std::string::npos);
  c.set("n", "10", "--n");

  c.set("typo", "1", "--typo");
  CHECK_THROWS_AS(Params("demo", c, specs), ConfigError);
  Config bad_seed;
  bad_seed.set("seed", "-1", "--seed");
  CHECK_THROWS_AS(Params("demo", bad_seed, specs), ConfigError);
  Config bad_list;
  bad_list.set("rho", "1,,2", "--rho");
  CHECK_THROWS_AS(Params("demo", bad_list, specs).reals("rho"), ConfigError);
}

TEST_CASE("registry covers every criterion") {
  std::set<std::string> names;
  for (const auto& e : experiments()) CHECK(names.insert(e.name).second);
  for (const auto& c : criteria())
    for (const auto& e : c.experiments) CHECK(names.count(e) == 1);
  CHECK_THROWS_AS(find_experiment("nope"), ConfigError);
  CHECK_FALSE(ExperimentReport{}.pass());
}

TEST_CASE("analyze on the reversible 6-ring gives alpha = 5") {
  const fs::path out = scratch("analyze");
  const std::string matrix = std::string(CATMOUSE_SOURCE_DIR) + "/examples_data/ring6.txt";
  REQUIRE(cli({"analyze", "--matrix", matrix, "--out", out.string()}) == kPass);
  const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(j["alpha"].get<double>() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(j["bound"].get<double>() == 5.0);
  CHECK(j["reversible"].get<bool>());
  CHECK(j["config"]["matrix"] == matrix);

  // Column sums of nu.csv equal nu2 and total alpha.
  std::ifstream nu(out / "nu.csv");
  std::string line;
  double total = 0.0;
  int rows = 0;
  while (std::getline(nu, line)) {
    if (line.rfind("# ", 0) == 0 || line == "x,y,value") continue;
    total += std::stod(line.substr(line.rfind(',') + 1));
    ++rows;
  }
  CHECK(rows == 36);
  CHECK(total == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("exit codes distinguish failure kinds") {
  const fs::path out = scratch("codes");
  const std::string o = out.string();
  CHECK(cli({"experiment", "mminf-F", "--rho", "1", "--n", "1000", "--replicas", "4000", "--out", o + "/pass"}) == kPass);
  CHECK(cli({"experiment", "mminf-F", "--unknown-key", "1", "--out", o + "/x"}) == kConfigError);
  CHECK(cli({"experiment", "mminf-F", "--n", "ten", "--out", o + "/x"}) == kConfigError);
  CHECK(cli({"experiment", "no-such-experiment"}) == kConfigError);
  CHECK(cli({"experiment", "mminf-F", "--n"}) == kConfigError);
  CHECK(cli({"analyze", "--matrix", o + "/missing.txt", "--out", o + "/x"}) == kConfigError);
  CHECK(cli({"experiment", "reflected-hitting", "--step-budget", "1000", "--out", o + "/x"}) == kBudgetRefusal);
  // A zero tolerance cannot be met by a Monte Carlo estimate.
  CHECK(cli({"experiment", "mminf-occupation", "--t-max", "200", "--replicas", "4", "--tolerance", "0", "--out",
             o + "/fail"}) == kFail);
  CHECK(cli({"suite", "--n", "3", "--out", o + "/x"}) == kConfigError);
  CHECK(cli({"bogus-subcommand"}) == kConfigError);
}

TEST_CASE("flags override the config file and outputs carry the header") {
  const fs::path out = scratch("override");
  write(out / "run.cfg", "rho = 2\nn = 500\nreplicas = 100\nseed = 5\n");
  REQUIRE(cli({"experiment", "mminf-F", "--config", (out / "run.cfg").string(), "--n", "300", "--out",
               (out / "r").string()}) != kConfigError);
  const std::string v = slurp(out / "r" / "verdicts.csv");
  CHECK(v.find("# n=300\n") != std::string::npos);
  CHECK(v.find("# rho=2\n") != std::string::npos);
  CHECK(v.find("# seed=5\n") != std::string::npos);
  for (const auto& e : fs::directory_iterator(out / "r"))
    if (e.path().extension() == ".csv") CHECK(slurp(e.path()).rfind("# experiment=mminf-F\n", 0) == 0);
}

TEST_CASE("a report header alone re-runs the experiment byte for byte") {
  const fs::path out = scratch("rerun");
  REQUIRE(cli({"experiment", "mminf-cascade", "--n", "200", "--min-level", "50", "--replicas", "200", "--trend-n", "100,200", "--seed", "9",
               "--out", (out / "a").string()}) != kConfigError);
  REQUIRE(cli({"experiment", "--from-report", (out / "a" / "cascade.csv").string(), "--out", (out / "b").string()}) !=
          kConfigError);
  for (const char* f : {"cascade.csv", "verdicts.csv", "diagnostics.csv"}) CHECK(slurp(out / "a" / f) == slurp(out / "b" / f));
}

TEST_CASE("results do not depend on the worker count") {
  const fs::path out = scratch("workers");
  for (const char* w : {"1", "3"})
    REQUIRE(cli({"experiment", "reflected-collapse", "--n", "6", "--replicas", "300", "--w-samples", "2000", "--workers", w,
                 "--out", (out / w).string()}) != kConfigError);
  for (const char* f : {"collapse.csv", "profile.csv", "verdicts.csv", "diagnostics.csv"})
    CHECK(slurp(out / "1" / f) == slurp(out / "3" / f));
}

TEST_CASE("oracle and simulate commands") {
  const fs::path out = scratch("tools");
  CHECK(cli({"oracle", "half-normal", "--samples", "5000", "--out", (out / "h").string()}) == kPass);
  CHECK(cli({"oracle", "free-jump", "--samples", "5000", "--out", (out / "f").string()}) == kPass);
  CHECK(cli({"oracle", "no-such-law", "--out", (out / "x").string()}) == kConfigError);
  for (const char* m : {"zline", "z2", "reflected", "mminf"})
    CHECK(cli({"simulate", "--model", m, "--steps", "200", "--out", (out / m).string()}) == kPass);
  const std::string matrix = std::string(CATMOUSE_SOURCE_DIR) + "/examples_data/ring6.txt";
  CHECK(cli({"simulate", "--matrix", matrix, "--steps", "200", "--cat", "2", "--out", (out / "m").string()}) == kPass);
  CHECK(cli({"simulate", "--matrix", matrix, "--cat", "9", "--out", (out / "x").string()}) == kConfigError);
  CHECK(cli({"simulate", "--model", "zline", "--steps", "1e12", "--step-budget", "1e6", "--out", (out / "x").string()}) ==
        kBudgetRefusal);
  const std::string traj = slurp(out / "mminf" / "trajectory.csv");
  CHECK(traj.find("step,clock,cat,mouse\n0,0,0,0\n") != std::string::npos);
}

TEST_CASE("text cells are quoted") {
  CHECK(cell(std::string("plain")) == "plain");
  CHECK(cell(std::string("a,b")) == "\"a,b\"");
  CHECK(cell(std::string("say \"hi\"")) == "\"say \"\"hi\"\"\"");
}
