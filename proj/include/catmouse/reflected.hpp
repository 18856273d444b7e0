#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "catmouse/chain.hpp"
#include "catmouse/stats.hpp"

namespace catmouse::reflected {

inline double rho_of(double p) { return p / (1.0 - p); }

// Limit of E_0(T_n) rho^n, also the mean of the exponential clocks E_k.
inline double limit_constant(double p) {
  const double r = rho_of(p);
  return (1.0 + r) / ((1.0 - r) * (1.0 - r));
}

// Almost sure limit of T_0 / n from C_0 = n.
inline double downward_rate(double p) {
  const double r = rho_of(p);
  return (1.0 + r) / (1.0 - r);
}

// Throws BudgetExceeded when declared > cap.
void check_budget(const char* what, double declared_steps, double cap_steps);

inline constexpr double kDefaultStepBudget = 2e11;

// nu(x, y) for the reflected walk with up-probability p.
double nu_reflected_explicit(double p, std::int64_t x, std::int64_t y);

// Exact E_0(T_n) = (1/p) sum_{k<n} sum_{i<=k} rho^{-i}.
double expected_hitting_up(double p, int n);

// E(u^{tau_1}) for the downward passage time from level i+1 to i.
double tau1_generating_function(double p, double u);

// E(u^{M'_inf}) for complex u in the domain of the closed form.
std::complex<double> free_jump_gf(double rho, std::complex<double> u);

// delta = E(rho^{-M'_inf / 2}) < 1.
double half_moment_contraction(double rho);

// Exact law of M'_inf from partial fractions of its generating function:
// with roots a < 1 < b of rho^2 u^2 - (1+rho) u + 1 and c = (1-rho)/(rho (b-a)),
// P(M = k) = c a^(1-k) for k <= 1 and c b^-(k-1) for k >= 2.
double free_jump_pmf(double rho, std::int64_t k);
double free_jump_cdf(double rho, std::int64_t k);

// --- hitting times of the reflected cat -------------------------------------

// Step-by-step T_n from 0; kept as a reference for the passage sampler.
std::uint64_t hitting_time_up_one(const ReflectedWalk& walk, std::int64_t n, Stream& rng);

// T_n samples from C_0 = 0 through the passage sampler. The declared cost
// replicas * E_0(T_n) in walk steps is checked against the budget first.
std::vector<double> hitting_time_up(double p, int n, std::size_t replicas, std::uint64_t seed,
                                    unsigned workers = 1, double step_budget = kDefaultStepBudget);

// T_0 from C_0 = n.
std::uint64_t downward_hitting_time(const ReflectedWalk& walk, std::int64_t n, Stream& rng);

struct GfEstimate {
  double estimate = 0.0;
  double se = 0.0;
  double exact = 0.0;
  Verdict verdict;
};

// Monte Carlo E(u^{tau_1}) against the closed form.
GfEstimate tau1_gf_check(double p, double u, std::size_t samples, Stream& rng);

// --- free process -----------------------------------------------------------

struct FreeJump {
  std::int64_t value = 0;  // M'_inf
  std::uint64_t steps = 0;
  std::uint64_t meetings = 0;
};

// Lag L with rho^L < 1e-9: once the cat is L below the mouse the run stops.
std::int64_t remeet_margin(double rho);

// Free pair on Z from (0,0) until the cat is remeet_margin below the mouse.
// Checks sup M' <= 1 + sup C' along the path.
FreeJump sample_free_jump(double p, Stream& rng);

std::vector<std::int64_t> free_jump_samples(double p, std::size_t count, std::uint64_t seed,
                                            unsigned workers = 1);

// --- W = sum_k rho^{-S_k} E_k -----------------------------------------------

struct WConfig {
  // Stop once the half-moment tail bound is below this fraction of sqrt(W_K).
  double tail_fraction = 1e-3;
  std::uint64_t max_terms = 10'000'000;
};

struct WSample {
  double value = 0.0;
  double first_term = 0.0;  // E_0
  std::uint64_t terms = 0;
  // rho^{-S_K/2} E(sqrt E) / ((1 - delta) sqrt(W_K)); Markov gives
  // P(tail > eps W_K) <= tail_ratio / sqrt(eps).
  double tail_ratio = 0.0;
};

WSample sample_W(double p, Stream& rng, const WConfig& config = {});

std::vector<WSample> w_samples(double p, std::size_t count, std::uint64_t seed, unsigned workers = 1,
                               const WConfig& config = {});

// Hill estimate of the tail index from the k largest samples.
double hill_tail_index(std::vector<double> samples, std::size_t k);

// --- collapse on the exponential time scale ----------------------------------

struct CollapseConfig {
  std::vector<double> t_grid{0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
  // Runs stop at censor * rho^{-n} steps; rho^n H_0 is then reported as censor.
  double censor = 200.0;
  bool stop_at_first_return = false;
  double step_budget = kDefaultStepBudget;
};

struct CollapseRecord {
  double rho_n_H0 = 0.0;     // NaN if H_0 was not reached in a first-return run
  bool censored = false;
  double rho_n_t1 = 0.0;     // NaN if t_1 was not reached
  std::int64_t jump = 0;     // M_{t_1} - n
  std::vector<double> profile;  // M_{floor(t rho^{-n})} / n, NaN once t >= rho^n H_0
  std::uint64_t steps = 0;
};

std::vector<CollapseRecord> collapse_experiment(double p, int n, std::size_t replicas,
                                                std::uint64_t seed, unsigned workers = 1,
                                                const CollapseConfig& config = {});

// Declared worst-case steps for a collapse run.
double collapse_declared_steps(double p, int n, std::size_t replicas, const CollapseConfig& config);

// --- oscillation probe -------------------------------------------------------

struct OscillationResult {
  std::uint64_t replicas = 0;
  std::uint64_t hits_window = 0;  // sup over [s, t]
  std::uint64_t hits_from_zero = 0;  // sup over [0, t]
  double estimate_window = 0.0;
  double estimate_from_zero = 0.0;
  Interval wilson_window;
  Interval wilson_from_zero;
  std::uint64_t steps = 0;
};

// P(sup_{s<=u<=t} M_{floor(u rho^{-n})} / n >= 1/2) from M_0 = C_0 = 0.
OscillationResult oscillation_probe(double p, int n, double s, double t, std::size_t replicas,
                                    std::uint64_t seed, unsigned workers = 1,
                                    double step_budget = kDefaultStepBudget);

// One-sided two-proportion z for b exceeding a.
double trend_z(std::uint64_t hits_a, std::uint64_t n_a, std::uint64_t hits_b, std::uint64_t n_b);

}  // namespace catmouse::reflected
