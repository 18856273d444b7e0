#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include "catmouse/errors.hpp"
#include "catmouse/runner.hpp"

namespace catmouse::runner {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string Config::normalize_key(std::string_view key) {
  std::string k(key);
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

void Config::set(std::string_view key, std::string value, std::string origin) {
  entries_[normalize_key(key)] = Setting{std::move(value), std::move(origin)};
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const std::string where = path.string() + ":" + std::to_string(number);
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value, got '" + body + "'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": missing key before '='");
    set(key, trim(std::string_view(body).substr(eq + 1)), where);
  }
}

void Config::load_report_header(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw ConfigError(csv.string() + ": cannot open report");
  std::string line;
  for (int number = 1; std::getline(in, line) && line.rfind("# ", 0) == 0; ++number) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(csv.string() + ":" + std::to_string(number) + ": malformed header line");
    set(line.substr(2, eq - 2), line.substr(eq + 1), csv.string() + ":" + std::to_string(number));
  }
}

const Setting* Config::find(std::string_view key) const {
  const auto it = entries_.find(normalize_key(key));
  return it == entries_.end() ? nullptr : &it->second;
}

const std::vector<ParamSpec>& common_params() {
  static const std::vector<ParamSpec> specs{
      {"seed", "42", "root seed of every random stream"},
      {"workers", "0", "worker threads, 0 = one per hardware thread"},
      {"step_budget", "2e11", "cap on declared simulated steps or jumps"},
  };
  return specs;
}

Params::Params(std::string experiment, const Config& config, const std::vector<ParamSpec>& specs)
    : experiment_(std::move(experiment)) {
  for (const auto* list : {&common_params(), &specs})
    for (const auto& s : *list) values_[s.key] = Setting{s.default_value, "default"};
  for (const auto& [key, setting] : config.entries()) {
    if (key == "experiment" || key == "out") continue;
    if (!values_.count(key))
      throw ConfigError(setting.origin + ": unknown key '" + key + "' for experiment " + experiment_);
    values_[key] = setting;
  }
  // Parse everything up front so bad values fail before any compute.
  for (const auto& s : common_params()) (void)real(s.key);
  (void)seed();
  (void)workers();
}

const Setting& Params::get(std::string_view key) const {
  const auto it = values_.find(std::string(key));
  if (it == values_.end()) throw std::logic_error("Params: undeclared key " + std::string(key));
  return it->second;
}

void Params::bad_value(std::string_view key, std::string_view expected) const {
  const auto& s = get(key);
  throw ConfigError(s.origin + ": key '" + std::string(key) + "': expected " + std::string(expected) + ", got '" +
                    s.value + "'");
}

std::string Params::text(std::string_view key) const { return get(key).value; }

double Params::real(std::string_view key) const {
  const std::string& v = get(key).value;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, "a number");
  return out;
}

std::int64_t Params::integer(std::string_view key) const {
  const double d = real(key);
  if (d != std::floor(d) || std::abs(d) > 9.0e15) bad_value(key, "an integer");
  return static_cast<std::int64_t>(d);
}

std::uint64_t Params::count(std::string_view key) const {
  const std::string& v = get(key).value;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc() && ptr == v.data() + v.size() && !v.empty()) return out;
  const double d = real(key);
  if (d < 0 || d != std::floor(d) || d > 9.0e18) bad_value(key, "a nonnegative integer");
  return static_cast<std::uint64_t>(d);
}

std::vector<double> Params::reals(std::string_view key) const {
  const std::string& v = get(key).value;
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = std::min(v.find(',', start), v.size());
    const std::string item = trim(std::string_view(v).substr(start, comma - start));
    double d = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), d);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) bad_value(key, "a comma-separated list of numbers");
    out.push_back(d);
    start = comma + 1;
  }
  return out;
}

ConfigHeader Params::header() const {
  ConfigHeader h{{"experiment", experiment_}};
  for (const auto& [k, s] : values_)
    if (k != "workers") h.emplace_back(k, s.value);
  return h;
}

}  // namespace catmouse::runner
