#include "catmouse/reflected.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "catmouse/errors.hpp"
#include "catmouse/parallel.hpp"

namespace catmouse::reflected {

namespace {

constexpr std::uint64_t kTagHitting = 10;
constexpr std::uint64_t kTagFree = 11;
constexpr std::uint64_t kTagW = 12;
constexpr std::uint64_t kTagCollapse = 13;
constexpr std::uint64_t kTagOscillation = 14;

void check_p(double p) {
  if (!(p > 0.0 && p < 0.5)) throw ConfigError("reflected walk: need 0 < p < 1/2, got " + std::to_string(p));
}

// Free walk step on Z.
inline std::int64_t free_step(std::int64_t x, std::uint32_t up, Stream& rng) {
  return rng.next_u32() < up ? x + 1 : x - 1;
}

}  // namespace

void check_budget(const char* what, double declared_steps, double cap_steps) {
  if (declared_steps > cap_steps)
    throw BudgetExceeded(std::string(what) + ": declared " + std::to_string(declared_steps) +
                             " steps exceeds the cap of " + std::to_string(cap_steps),
                         declared_steps, cap_steps);
}

double nu_reflected_explicit(double p, std::int64_t x, std::int64_t y) {
  check_p(p);
  if (x < 0 || y < 0) throw ConfigError("nu_reflected_explicit: negative state");
  const double r = rho_of(p);
  auto pw = [r](std::int64_t k) { return std::pow(r, static_cast<double>(k)); };
  if (x == y - 1) return pw(y - 1) * (1.0 - r) * (1.0 - p);
  if (x == y) return pw(y) * (1.0 - r);
  if (x == y + 1) return pw(y + 1) * (1.0 - r) * p;
  return pw(x) * (1.0 - r);
}

double expected_hitting_up(double p, int n) {
  check_p(p);
  const double inv = 1.0 / rho_of(p);
  double total = 0.0, inner = 0.0, power = 1.0;
  for (int k = 0; k < n; ++k) {
    inner += power;
    power *= inv;
    total += inner;
  }
  return total / p;
}

double tau1_generating_function(double p, double u) {
  const double q = 1.0 - p;
  return (1.0 - std::sqrt(1.0 - 4.0 * p * q * u * u)) / (2.0 * p * u);
}

std::complex<double> free_jump_gf(double rho, std::complex<double> u) {
  return rho * (1.0 - rho) * u * u / (-rho * rho * u * u + (1.0 + rho) * u - 1.0);
}

namespace {

struct FreeRoots {
  double a, b, c;
};

FreeRoots free_roots(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("free jump law: need 0 < rho < 1");
  const double root = std::sqrt((1.0 - rho) * (1.0 + 3.0 * rho));
  const double a = (1.0 + rho - root) / (2.0 * rho * rho);
  const double b = (1.0 + rho + root) / (2.0 * rho * rho);
  return {a, b, (1.0 - rho) / (rho * (b - a))};
}

}  // namespace

double free_jump_pmf(double rho, std::int64_t k) {
  const auto [a, b, c] = free_roots(rho);
  if (k <= 1) return c * std::pow(a, static_cast<double>(1 - k));
  return c * std::pow(b, -static_cast<double>(k - 1));
}

double free_jump_cdf(double rho, std::int64_t k) {
  const auto [a, b, c] = free_roots(rho);
  if (k <= 1) return c * std::pow(a, static_cast<double>(1 - k)) / (1.0 - a);
  // c/(1-a) up to 1, then a geometric sum of ratio 1/b.
  const double upper = (1.0 - std::pow(b, -static_cast<double>(k - 1))) / (b - 1.0);
  return c / (1.0 - a) + c * upper;
}

double half_moment_contraction(double rho) { return free_jump_gf(rho, 1.0 / std::sqrt(rho)).real(); }

std::uint64_t hitting_time_up_one(const ReflectedWalk& walk, std::int64_t n, Stream& rng) {
  std::int64_t x = 0;
  std::uint64_t t = 0;
  while (x < n) {
    x = walk.step(x, rng);
    ++t;
  }
  return t;
}

std::vector<double> hitting_time_up(double p, int n, std::size_t replicas, std::uint64_t seed,
                                    unsigned workers, double step_budget) {
  check_p(p);
  if (n < 1) throw ConfigError("hitting_time_up: need n >= 1");
  check_budget("hitting_time_up", static_cast<double>(replicas) * expected_hitting_up(p, n), step_budget);
  std::vector<double> out(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    Stream rng = replica_stream(seed, kTagHitting, r);
    out[r] = static_cast<double>(reflected_passage_steps(p, 0, n, rng));
  });
  return out;
}

std::uint64_t downward_hitting_time(const ReflectedWalk& walk, std::int64_t n, Stream& rng) {
  std::int64_t x = n;
  std::uint64_t t = 0;
  while (x > 0) {
    x = walk.step(x, rng);
    ++t;
  }
  return t;
}

GfEstimate tau1_gf_check(double p, double u, std::size_t samples, Stream& rng) {
  check_p(p);
  if (!(u > 0.0 && u < 1.0) || samples < 2) throw ConfigError("tau1_gf_check: need 0 < u < 1, samples >= 2");
  const ReflectedWalk walk(p);
  const auto horizon = static_cast<std::uint64_t>(std::ceil(std::log(1e-18) / std::log(u)));
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    std::int64_t x = 1;
    std::uint64_t t = 0;
    while (x > 0 && t < horizon) {
      x = walk.step(x, rng);
      ++t;
    }
    const double v = x == 0 ? std::pow(u, static_cast<double>(t)) : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double ns = static_cast<double>(samples);
  GfEstimate g;
  g.estimate = sum / ns;
  g.se = std::sqrt(std::max(0.0, sum_sq / ns - g.estimate * g.estimate) / (ns - 1.0));
  g.exact = tau1_generating_function(p, u);
  g.verdict = make_verdict("tau1-gf", "mean-3sigma", std::abs(g.estimate - g.exact) / g.se, 3.0);
  g.verdict.n1 = samples;
  g.verdict.se = g.se;
  g.verdict.estimate = g.estimate;
  g.verdict.target = g.exact;
  return g;
}

std::int64_t remeet_margin(double rho) {
  return static_cast<std::int64_t>(std::ceil(std::log(1e-9) / std::log(rho)));
}

FreeJump sample_free_jump(double p, Stream& rng) {
  check_p(p);
  const std::uint32_t up = u32_threshold(p);
  const std::int64_t margin = remeet_margin(rho_of(p));
  std::int64_t c = 0, m = 0, max_c = 0, max_m = 0;
  FreeJump j;
  bool apart = false;
  while (c - m > -margin) {
    if (c == m) {
      if (apart) ++j.meetings;
      c = free_step(c, up, rng);
      m = free_step(m, up, rng);
      max_m = std::max(max_m, m);
    } else {
      c = free_step(c, up, rng);
    }
    apart = c != m;
    max_c = std::max(max_c, c);
    ++j.steps;
    if (max_m > 1 + max_c) throw std::logic_error("sample_free_jump: mouse maximum above 1 + cat maximum");
  }
  j.value = m;
  return j;
}

std::vector<std::int64_t> free_jump_samples(double p, std::size_t count, std::uint64_t seed,
                                            unsigned workers) {
  constexpr std::size_t kChunks = 256;
  std::vector<std::int64_t> out(count);
  parallel_for(kChunks, workers, [&](std::size_t c) {
    Stream rng = replica_stream(seed, kTagFree, c);
    for (std::size_t i = c; i < count; i += kChunks) out[i] = sample_free_jump(p, rng).value;
  });
  return out;
}

WSample sample_W(double p, Stream& rng, const WConfig& config) {
  check_p(p);
  const double rho = rho_of(p);
  const double log_rho = std::log(rho);
  const double mean_e = limit_constant(p);
  const double delta = half_moment_contraction(rho);
  const double coef = std::sqrt(mean_e) * std::sqrt(std::numbers::pi) / 2.0 / (1.0 - delta);
  WSample w;
  double s = 0.0;
  for (;;) {
    const double e = rng.exponential(mean_e);
    if (w.terms == 0) w.first_term = e;
    w.value += std::exp(-s * log_rho) * e;
    s += static_cast<double>(sample_free_jump(p, rng).value);
    ++w.terms;
    const double bound = coef * std::exp(-0.5 * s * log_rho);
    w.tail_ratio = bound / std::sqrt(w.value);
    if (w.tail_ratio <= config.tail_fraction || w.terms >= config.max_terms) break;
  }
  return w;
}

std::vector<WSample> w_samples(double p, std::size_t count, std::uint64_t seed, unsigned workers,
                               const WConfig& config) {
  constexpr std::size_t kChunks = 256;
  std::vector<WSample> out(count);
  parallel_for(kChunks, workers, [&](std::size_t c) {
    Stream rng = replica_stream(seed, kTagW, c);
    for (std::size_t i = c; i < count; i += kChunks) out[i] = sample_W(p, rng, config);
  });
  return out;
}

double hill_tail_index(std::vector<double> samples, std::size_t k) {
  if (k < 2 || k >= samples.size()) throw ConfigError("hill_tail_index: need 2 <= k < sample count");
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k), samples.end(),
                   std::greater<>());
  const double xk = samples[k];
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(samples[i] / xk);
  return static_cast<double>(k) / sum;
}

double collapse_declared_steps(double p, int n, std::size_t replicas, const CollapseConfig& config) {
  const double inv = std::pow(rho_of(p), -n);
  if (config.stop_at_first_return)
    return static_cast<double>(replicas) * (expected_hitting_up(p, n) + downward_rate(p) * (n + 1));
  return static_cast<double>(replicas) * std::ceil(config.censor * inv);
}

std::vector<CollapseRecord> collapse_experiment(double p, int n, std::size_t replicas,
                                                std::uint64_t seed, unsigned workers,
                                                const CollapseConfig& config) {
  check_p(p);
  if (n < 1) throw ConfigError("collapse_experiment: need n >= 1");
  if (!std::is_sorted(config.t_grid.begin(), config.t_grid.end()) ||
      (!config.t_grid.empty() && config.t_grid.front() < 0.0))
    throw ConfigError("collapse_experiment: time grid must be nonnegative and sorted");
  if (!(config.censor > 0.0)) throw ConfigError("collapse_experiment: censor level must be positive");
  check_budget("collapse_experiment", collapse_declared_steps(p, n, replicas, config), config.step_budget);
  const ReflectedWalk walk(p);
  const double scale = std::pow(rho_of(p), n);
  const auto cap = static_cast<std::uint64_t>(std::ceil(config.censor / scale));
  std::vector<std::uint64_t> grid;
  for (double t : config.t_grid) grid.push_back(static_cast<std::uint64_t>(std::floor(t / scale)));
  const double dn = static_cast<double>(n);
  std::vector<CollapseRecord> out(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    Stream rng = replica_stream(seed, kTagCollapse, r);
    CollapseRecord rec;
    rec.profile.assign(grid.size(), NAN);
    rec.rho_n_t1 = NAN;
    rec.rho_n_H0 = NAN;
    std::int64_t c = 0, m = n;
    std::uint64_t k = 0;
    std::size_t g = 0;
    bool met = false, t1_seen = false, h0_seen = false;
    auto record = [&] {
      while (g < grid.size() && grid[g] == k) rec.profile[g++] = static_cast<double>(m) / dn;
    };
    record();
    for (;;) {
      if (k >= cap) {
        if (!h0_seen) {
          rec.censored = true;
          rec.rho_n_H0 = config.censor;
        }
        break;
      }
      if (c < m && (!met || t1_seen)) {
        // The mouse waits while the cat climbs to it. Between the first
        // meeting and t1 the cat's return to 0 must be observed, so it steps.
        const std::uint64_t climb = reflected_passage_steps(p, c, m, rng);
        if (!h0_seen)
          while (g < grid.size() && grid[g] <= std::min(k + climb, cap)) rec.profile[g++] = static_cast<double>(m) / dn;
        if (k + climb > cap) {
          k = cap;
          continue;
        }
        k += climb;
        c = m;
        continue;
      }
      if (c == m) {
        met = true;
        c = walk.step(c, rng);
        m = walk.step(m, rng);
      } else {
        c = walk.step(c, rng);
      }
      ++k;
      if (met && !t1_seen && c == 0) {
        t1_seen = true;
        rec.rho_n_t1 = static_cast<double>(k) * scale;
        rec.jump = m - n;
        if (config.stop_at_first_return) break;
      }
      if (m == 0 && !h0_seen) {
        h0_seen = true;
        rec.rho_n_H0 = static_cast<double>(k) * scale;
      }
      if (h0_seen) {
        if (t1_seen) break;
      } else {
        record();
      }
    }
    rec.steps = k;
    out[r] = std::move(rec);
  });
  return out;
}

OscillationResult oscillation_probe(double p, int n, double s, double t, std::size_t replicas,
                                    std::uint64_t seed, unsigned workers, double step_budget) {
  check_p(p);
  if (n < 1 || !(s >= 0.0 && s < t) || replicas == 0)
    throw ConfigError("oscillation_probe: need n >= 1, 0 <= s < t and replicas > 0");
  const double inv = std::pow(rho_of(p), -n);
  const auto ks = static_cast<std::uint64_t>(std::floor(s * inv));
  const auto kt = static_cast<std::uint64_t>(std::floor(t * inv));
  check_budget("oscillation_probe", static_cast<double>(replicas) * static_cast<double>(kt), step_budget);
  const ReflectedWalk walk(p);
  struct Hit {
    bool window = false, from_zero = false;
    std::uint64_t steps = 0;
  };
  std::vector<Hit> hits(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    Stream rng = replica_stream(seed, kTagOscillation, r);
    std::int64_t c = 0, m = 0;
    Hit h;
    for (std::uint64_t k = 0;; ++k) {
      if (2 * m >= n) {
        h.from_zero = true;
        if (k >= ks) h.window = true;
      }
      if (h.window || k == kt) break;
      if (c == m) {
        c = walk.step(c, rng);
        m = walk.step(m, rng);
      } else {
        c = walk.step(c, rng);
      }
      ++h.steps;
    }
    hits[r] = h;
  });
  OscillationResult res;
  res.replicas = replicas;
  for (const auto& h : hits) {
    res.hits_window += h.window;
    res.hits_from_zero += h.from_zero;
    res.steps += h.steps;
  }
  res.estimate_window = static_cast<double>(res.hits_window) / static_cast<double>(replicas);
  res.estimate_from_zero = static_cast<double>(res.hits_from_zero) / static_cast<double>(replicas);
  res.wilson_window = wilson_interval(res.hits_window, replicas);
  res.wilson_from_zero = wilson_interval(res.hits_from_zero, replicas);
  return res;
}

double trend_z(std::uint64_t hits_a, std::uint64_t n_a, std::uint64_t hits_b, std::uint64_t n_b) {
  const double pa = static_cast<double>(hits_a) / static_cast<double>(n_a);
  const double pb = static_cast<double>(hits_b) / static_cast<double>(n_b);
  const double var = pa * (1 - pa) / static_cast<double>(n_a) + pb * (1 - pb) / static_cast<double>(n_b);
  if (var <= 0.0) return pb > pa ? INFINITY : (pb < pa ? -INFINITY : 0.0);
  return (pb - pa) / std::sqrt(var);
}

}  // namespace catmouse::reflected
